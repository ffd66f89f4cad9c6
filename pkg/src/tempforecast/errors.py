"""Exception hierarchy shared by every stage of the forecasting pipeline."""


class TempForecastError(Exception):
    """Base class for all errors raised by this package."""


# --- data ingestion and shaping ---------------------------------------------

class MissingColumnError(TempForecastError):
    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__(f"CSV header is missing required column(s): {', '.join(self.columns)}")


class NoUsableRowsError(TempForecastError):
    pass


class TooFewObservationsError(TempForecastError):
    pass


class NonMonotonicDatesError(TempForecastError):
    pass


class DegenerateSplitError(TempForecastError):
    pass


# --- numerics ----------------------------------------------------------------

class DomainError(TempForecastError, ValueError):
    pass


class RankDeficientError(TempForecastError):
    """Design matrix column `column` is (numerically) a combination of earlier ones."""

    def __init__(self, column, name=None):
        self.column = column
        self.name = name
        label = repr(name) if name is not None else f"index {column}"
        super().__init__(f"design matrix is rank deficient at column {label}")


class ConvergenceError(TempForecastError):
    pass


# --- regression / selection --------------------------------------------------

class InsufficientObservationsError(TempForecastError):
    pass


class DimensionMismatchError(TempForecastError, ValueError):
    pass


class ConstantInputError(TempForecastError, ValueError):
    pass


class AllFeaturesDroppedError(TempForecastError):
    def __init__(self, report):
        self.report = report
        super().__init__(
            f"no feature reaches |r| >= {report.threshold:g} against the target "
            f"({len(report.dropped)} dropped)"
        )


# --- pipeline ----------------------------------------------------------------

class ColumnMismatchError(TempForecastError):
    pass


class InvalidParameterError(TempForecastError, ValueError):
    pass


class StageError(TempForecastError):
    """A pipeline stage failed; wraps the underlying cause."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
