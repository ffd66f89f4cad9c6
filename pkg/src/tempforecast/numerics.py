"""Least squares via Householder QR and the special functions behind p-values.

Everything here is written out by hand on top of plain numpy arrays; no
LAPACK least-squares driver and no scipy.special.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, RankDeficientError

RANK_TOL = 1e-10

_BETACF_EPS = 1e-16
_BETACF_FPMIN = 1e-300
_BETACF_MAXIT = 20000


@dataclass(frozen=True, eq=False)
class LeastSquaresSolution:
    coefficients: np.ndarray
    residual_sum_squares: float
    rank: int
    xtx_inverse_diagonal: np.ndarray


def _as_matrix(X):
    X = np.array(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DomainError(f"expected a 2-D matrix, got {X.ndim} dimensions")
    return X


def householder_qr(X):
    """Factor X (n x p, n >= p) in place into Householder vectors and R.

    Returns ``(R, reflectors)`` where R is the upper p x p triangle and
    ``reflectors[j]`` is the unit vector acting on rows j: (None when the
    column was already zero below the diagonal).
    """
    A = _as_matrix(X).copy()
    n, p = A.shape
    reflectors = []
    for j in range(p):
        x = A[j:, j]
        norm = np.linalg.norm(x)
        if norm == 0.0:
            reflectors.append(None)
            continue
        # sign choice avoids cancellation in v[0]
        alpha = -math.copysign(norm, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        A[j:, j:] -= 2.0 * np.outer(v, v @ A[j:, j:])
        A[j, j] = alpha
        A[j + 1:, j] = 0.0
        reflectors.append(v)
    return np.triu(A[:p, :p]), reflectors


def apply_qt(reflectors, y):
    """Compute Q^T y from the stored reflectors."""
    y = np.array(y, dtype=float)
    for j, v in enumerate(reflectors):
        if v is not None:
            y[j:] -= 2.0 * v * (v @ y[j:])
    return y


def back_substitute(R, b):
    p = R.shape[0]
    x = np.zeros(p)
    for i in range(p - 1, -1, -1):
        x[i] = (b[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
    return x


def upper_triangular_inverse(R):
    p = R.shape[0]
    inv = np.zeros_like(R)
    eye = np.eye(p)
    for col in range(p):
        inv[:, col] = back_substitute(R, eye[:, col])
    return inv


def check_rank(R, tol=RANK_TOL):
    """Raise RankDeficientError at the first column whose |R_jj| is negligible."""
    diag = np.abs(np.diag(R))
    scale = diag.max() if diag.size else 0.0
    for j, d in enumerate(diag):
        if scale == 0.0 or d < tol * scale:
            raise RankDeficientError(j)


def lstsq(X, y, tol=RANK_TOL):
    """Minimise ||y - X k||^2 for full-column-rank X with n >= p.

    ``diag((X^T X)^-1)`` comes from R^-1 (row sums of squares), never from
    forming X^T X.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if p < 1 or n < p:
        raise DomainError(f"lstsq needs n >= p >= 1, got n={n}, p={p}")
    if y.shape != (n,):
        raise DomainError(f"target has shape {y.shape}, expected ({n},)")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DomainError("lstsq inputs must be finite")

    R, reflectors = householder_qr(X)
    check_rank(R, tol)
    qty = apply_qt(reflectors, y)
    coef = back_substitute(R, qty[:p])
    rss = float(qty[p:] @ qty[p:])
    r_inv = upper_triangular_inverse(R)
    xtx_inv_diag = np.einsum("ij,ij->i", r_inv, r_inv)
    return LeastSquaresSolution(coef, rss, p, xtx_inv_diag)


# --- special functions ---------------------------------------------------------

def _beta_continued_fraction(a, b, x):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_FPMIN:
        d = _BETACF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ConvergenceError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a, b, x):
    """I_x(a, b), accurate to about 1e-10 absolute or better."""
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"incomplete beta needs a, b > 0, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"incomplete beta needs 0 <= x <= 1, got x={x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        result = front * _beta_continued_fraction(a, b, x) / a
    else:
        result = 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b
    return min(1.0, max(0.0, result))


def _check_df(*dfs):
    for df in dfs:
        if not (df > 0 and math.isfinite(df)):
            raise DomainError(f"degrees of freedom must be positive, got {df}")


def _t_tail_mass(t, df):
    # P(|T| >= |t|)
    t2 = t * t
    if math.isinf(t2):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2))


def student_t_cdf(t, df):
    """P(T <= t) for Student's t with `df` degrees of freedom."""
    _check_df(df)
    if math.isnan(t):
        raise DomainError("t is NaN")
    half_tail = 0.5 * _t_tail_mass(t, df)
    return 1.0 - half_tail if t > 0 else half_tail


def student_t_two_sided_pvalue(t, df):
    """2 * (1 - F(|t|)), evaluated without the cancellation of the naive form."""
    _check_df(df)
    if math.isnan(t):
        raise DomainError("t is NaN")
    return _t_tail_mass(t, df)


def f_cdf(x, df1, df2):
    """CDF of the F(df1, df2) distribution."""
    _check_df(df1, df2)
    if not x >= 0:
        raise DomainError(f"F variate must be >= 0, got {x}")
    if math.isinf(x):
        return 1.0
    return regularized_incomplete_beta(df1 / 2.0, df2 / 2.0, df1 * x / (df1 * x + df2))


def f_sf(x, df1, df2):
    """Upper tail 1 - f_cdf(x), computed directly for small p-values."""
    _check_df(df1, df2)
    if not x >= 0:
        raise DomainError(f"F variate must be >= 0, got {x}")
    if math.isinf(x):
        return 0.0
    return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * x))
