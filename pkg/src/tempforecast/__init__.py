"""Next-day mean temperature forecasting from lagged daily weather with linear regression."""

__version__ = "0.1.0"
