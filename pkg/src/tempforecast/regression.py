"""Multiple linear regression with an intercept and the usual OLS inference table."""

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import (
    DimensionMismatchError,
    InsufficientObservationsError,
    RankDeficientError,
)

INTERCEPT = "const"
PVALUE_DISPLAY_FLOOR = 1e-15


@dataclass(frozen=True, eq=False)
class RegressionFit:
    """y = k0 + sum_i coefficients[i] * x_i plus inference.

    std_errors, t_stats and p_values have the intercept first, so they are
    one longer than `coefficients`.
    """

    feature_names: tuple
    k0: float
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    r_squared: float
    adj_r_squared: float
    f_statistic: float
    f_pvalue: float
    n_obs: int
    df_resid: int
    rss: float

    @property
    def term_names(self):
        return (INTERCEPT,) + tuple(self.feature_names)

    @property
    def params(self):
        return np.concatenate([[self.k0], self.coefficients])

    @property
    def feature_p_values(self):
        return self.p_values[1:]

    def to_dict(self):
        return {
            "feature_names": list(self.feature_names),
            "k0": self.k0,
            "coefficients": self.coefficients.tolist(),
            "std_errors": self.std_errors.tolist(),
            "t_stats": self.t_stats.tolist(),
            "p_values": self.p_values.tolist(),
            "r_squared": self.r_squared,
            "adj_r_squared": self.adj_r_squared,
            "f_statistic": self.f_statistic,
            "f_pvalue": self.f_pvalue,
            "n_obs": self.n_obs,
            "df_resid": self.df_resid,
            "rss": self.rss,
        }

    @classmethod
    def from_dict(cls, d):
        def arr(key):
            return _frozen([math.nan if v is None else v for v in d[key]])

        def num(key):
            return math.nan if d[key] is None else float(d[key])

        return cls(
            feature_names=tuple(d["feature_names"]),
            k0=num("k0"),
            coefficients=arr("coefficients"),
            std_errors=arr("std_errors"),
            t_stats=arr("t_stats"),
            p_values=arr("p_values"),
            r_squared=num("r_squared"),
            adj_r_squared=num("adj_r_squared"),
            f_statistic=num("f_statistic"),
            f_pvalue=num("f_pvalue"),
            n_obs=int(d["n_obs"]),
            df_resid=int(d["df_resid"]),
            rss=num("rss"),
        )


def _frozen(values):
    a = np.array(values, dtype=float)
    a.setflags(write=False)
    return a


def _t_and_p(coef, se, df_resid):
    if se > 0:
        t = coef / se
    elif coef != 0:
        t = math.copysign(math.inf, coef)
    else:
        # 0/0: exact zero estimate with zero spread; treat as no evidence
        return 0.0, 1.0
    return t, numerics.student_t_two_sided_pvalue(t, df_resid)


def ols_fit(ds):
    """Fit the regression of ds.target on ds.rows with a leading column of ones."""
    n, p = ds.n_rows, ds.n_features
    if n < p + 2:
        raise InsufficientObservationsError(
            f"{n} observations cannot fit {p} features plus intercept with a residual degree of freedom"
        )
    X = np.column_stack([np.ones(n), ds.rows])
    y = ds.target
    try:
        sol = numerics.lstsq(X, y)
    except RankDeficientError as exc:
        name = INTERCEPT if exc.column == 0 else ds.feature_names[exc.column - 1]
        raise RankDeficientError(exc.column, name) from exc

    df_resid = n - p - 1
    rss = sol.residual_sum_squares
    sigma2 = rss / df_resid
    se = np.sqrt(sigma2 * sol.xtx_inverse_diagonal)
    t_stats, p_values = zip(*(_t_and_p(c, s, df_resid) for c, s in zip(sol.coefficients, se)))

    tss = float(np.sum((y - y.mean()) ** 2))
    if tss > 0:
        r2 = 1.0 - rss / tss
        adj = 1.0 - (1.0 - r2) * (n - 1) / df_resid
    else:
        r2 = adj = math.nan
    if p >= 1 and tss > 0:
        if r2 < 1.0:
            f_stat = (r2 / p) / ((1.0 - r2) / df_resid)
            f_stat = max(f_stat, 0.0)
            f_p = numerics.f_sf(f_stat, p, df_resid)
        else:
            f_stat, f_p = math.inf, 0.0
    else:
        # intercept-only model (or constant target): overall F test undefined
        f_stat = f_p = math.nan

    return RegressionFit(
        feature_names=tuple(ds.feature_names),
        k0=float(sol.coefficients[0]),
        coefficients=_frozen(sol.coefficients[1:]),
        std_errors=_frozen(se),
        t_stats=_frozen(t_stats),
        p_values=_frozen(p_values),
        r_squared=r2,
        adj_r_squared=adj,
        f_statistic=f_stat,
        f_pvalue=f_p,
        n_obs=n,
        df_resid=df_resid,
        rss=rss,
    )


def predict(fit, x):
    """k0 + sum(k_i * x_i)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (len(fit.feature_names),):
        raise DimensionMismatchError(
            f"expected {len(fit.feature_names)} feature values, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise DimensionMismatchError("feature values must be finite")
    return fit.k0 + float(np.dot(fit.coefficients, x))


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:#.6g}"


def _fmt_p(value):
    if not math.isnan(value) and value < PVALUE_DISPLAY_FLOOR:
        value = 0.0
    return _fmt(value)


def summarize(fit, title="OLS Regression Results"):
    """Fixed-width coefficient table with a diagnostics footer."""
    name_w = max([len(n) for n in fit.term_names] + [8])
    col_w = 14
    width = name_w + 4 * col_w
    header = f"{'term':<{name_w}}" + "".join(
        f"{h:>{col_w}}" for h in ("coef", "std err", "t", "P>|t|")
    )
    lines = [title.center(width).rstrip(), "=" * width, header, "-" * width]
    coefs = fit.params
    for i, name in enumerate(fit.term_names):
        lines.append(
            f"{name:<{name_w}}"
            f"{_fmt(coefs[i]):>{col_w}}{_fmt(fit.std_errors[i]):>{col_w}}"
            f"{_fmt(fit.t_stats[i]):>{col_w}}{_fmt_p(fit.p_values[i]):>{col_w}}"
        )
    lines.append("=" * width)
    half = width // 2
    footer = [
        ("No. Observations:", str(fit.n_obs), "Df Residuals:", str(fit.df_resid)),
        ("R-squared:", _fmt(fit.r_squared), "Adj. R-squared:", _fmt(fit.adj_r_squared)),
        ("F-statistic:", _fmt(fit.f_statistic), "Prob (F-statistic):", _fmt_p(fit.f_pvalue)),
    ]
    for l1, v1, l2, v2 in footer:
        left = f"{l1:<20}{v1:>{half - 22}}"
        right = f"{l2:<20}{v2:>{width - half - 22}}"
        lines.append(f"{left}  {right}".rstrip())
    lines.append("=" * width)
    return "\n".join(lines) + "\n"
