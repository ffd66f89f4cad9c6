"""Two-stage feature selection: a Pearson |r| filter, then p-value backward elimination."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllFeaturesDroppedError, ConstantInputError, InvalidParameterError
from .regression import ols_fit

DEFAULT_CORR_THRESHOLD = 0.6
DEFAULT_ALPHA = 0.05


def pearson_r(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson_r needs two 1-D vectors of equal length")
    if x.size < 2:
        raise ValueError("pearson_r needs at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ConstantInputError("correlation is undefined for a constant input")
    r = float(np.sum(dx * dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class CorrelationReport:
    """Correlation of each feature with the target, ascending by |r|."""

    entries: tuple  # (feature_name, r) pairs
    threshold: float
    kept: tuple
    dropped: tuple
    constant: tuple = ()  # zero-variance features, listed with r = 0

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "entries": [{"feature": name, "r": r, "abs_r": abs(r)} for name, r in self.entries],
            "kept": list(self.kept),
            "dropped": list(self.dropped),
            "constant": list(self.constant),
        }

    def render(self, target="meantempm"):
        width = max([len(n) for n, _ in self.entries] + [len(target)])
        lines = [f"{'':<{width}}  {target:>12}"]
        lines += [f"{name:<{width}}  {abs(r):>12.6f}" for name, r in self.entries]
        lines.append(f"threshold |r| >= {self.threshold:g}: kept {len(self.kept)}, dropped {len(self.dropped)}")
        return "\n".join(lines) + "\n"


def correlation_filter(ds, threshold=DEFAULT_CORR_THRESHOLD):
    """Keep the columns whose |r| with the target is at least `threshold`.

    Column order is preserved. Raises AllFeaturesDroppedError (carrying the
    report) if nothing survives.
    """
    if not 0.0 < threshold < 1.0:
        raise InvalidParameterError(f"threshold must lie in (0, 1), got {threshold}")
    if ds.n_rows < 2:
        raise ValueError("correlation filter needs at least two rows")
    rs = []
    constant = []
    for j, name in enumerate(ds.feature_names):
        try:
            r = pearson_r(ds.rows[:, j], ds.target)
        except ConstantInputError:
            r = 0.0
            constant.append(name)
        rs.append(r)

    kept = tuple(n for n, r in zip(ds.feature_names, rs) if abs(r) >= threshold)
    dropped = tuple(n for n, r in zip(ds.feature_names, rs) if abs(r) < threshold)
    order = sorted(range(len(rs)), key=lambda j: abs(rs[j]))  # stable: ties keep column order
    report = CorrelationReport(
        entries=tuple((ds.feature_names[j], rs[j]) for j in order),
        threshold=threshold,
        kept=kept,
        dropped=dropped,
        constant=tuple(constant),
    )
    if not kept:
        raise AllFeaturesDroppedError(report)
    return ds.select(kept), report


@dataclass(frozen=True)
class EliminationStep:
    removed: str
    p_value: float
    surviving: int


@dataclass(frozen=True)
class EliminationTrace:
    steps: tuple
    final_features: tuple
    alpha: float
    initial_features: tuple = ()

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "initial_features": list(self.initial_features),
            "steps": [
                {"removed": s.removed, "p_value": s.p_value, "surviving": s.surviving}
                for s in self.steps
            ],
            "final_features": list(self.final_features),
        }

    def render(self):
        lines = [f"backward elimination at alpha = {self.alpha:g}"]
        for i, s in enumerate(self.steps, 1):
            lines.append(f"  step {i:>2}: drop {s.removed:<16} p = {s.p_value:#.6g}  ({s.surviving} left)")
        if not self.steps:
            lines.append("  no feature removed")
        lines.append(f"final features ({len(self.final_features)}): {', '.join(self.final_features) or '-'}")
        return "\n".join(lines) + "\n"


def backward_eliminate(ds, alpha=DEFAULT_ALPHA):
    """Repeatedly drop the feature with the largest p-value while it exceeds alpha.

    Refits from scratch after each removal. The intercept is never a
    candidate. Ties on the maximum go to the lowest column index. Returns the
    final fit (intercept-only if every feature went) and the trace.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    current = ds
    steps = []
    fit = ols_fit(current)
    while current.n_features:
        pvals = fit.feature_p_values
        worst = int(np.argmax(pvals))
        if not pvals[worst] > alpha:
            break
        removed = current.feature_names[worst]
        remaining = [n for n in current.feature_names if n != removed]
        steps.append(EliminationStep(removed, float(pvals[worst]), len(remaining)))
        current = current.select(remaining)
        fit = ols_fit(current)
    trace = EliminationTrace(tuple(steps), current.feature_names, alpha, ds.feature_names)
    return fit, trace
