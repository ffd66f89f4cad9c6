"""End-to-end run: data -> lag table -> selection -> split -> fit -> evaluation -> artifacts."""

import json
import logging
import math
import os
import shutil
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .datamodel import (
    DEFAULT_LAG_DEPTH,
    DailyObservation,
    SplitStrategy,
    SupervisedDataset,
    build_lag_features,
    ingest_csv,
    split,
)
from .errors import ColumnMismatchError, InvalidParameterError, StageError, TempForecastError
from .regression import RegressionFit, predict, summarize
from .selection import DEFAULT_ALPHA, DEFAULT_CORR_THRESHOLD, backward_eliminate, correlation_filter

log = logging.getLogger(__name__)

SIG_DIGITS = 12


@dataclass(frozen=True)
class SynthParams:
    n_days: int = 1000
    base_temp: float = 15.0
    seasonal_amplitude: float = 10.0
    ar_coefficient: float = 0.7
    noise_sd: float = 2.0
    seed: int = 42
    start_date: date = date(2016, 1, 1)


@dataclass(frozen=True)
class PipelineConfig:
    input_path: Optional[str] = None
    synth: SynthParams = field(default_factory=SynthParams)
    lag_depth: int = DEFAULT_LAG_DEPTH
    corr_threshold: float = DEFAULT_CORR_THRESHOLD
    alpha: float = DEFAULT_ALPHA
    test_fraction: float = 0.2
    split_strategy: SplitStrategy = SplitStrategy.RANDOM
    seed: int = 42
    output_dir: Optional[str] = None
    schema: Optional[dict] = None

    def validate(self):
        for name in ("corr_threshold", "alpha", "test_fraction"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise InvalidParameterError(f"{name} must lie in (0, 1), got {value}")
        if self.lag_depth < 1:
            raise InvalidParameterError(f"lag_depth must be >= 1, got {self.lag_depth}")
        if self.seed < 0:
            raise InvalidParameterError("seed must be a non-negative integer")

    def to_dict(self):
        # output_dir is left out so reports from different directories compare equal
        d = {
            "input_path": self.input_path,
            "synth": None,
            "lag_depth": self.lag_depth,
            "corr_threshold": self.corr_threshold,
            "alpha": self.alpha,
            "test_fraction": self.test_fraction,
            "split_strategy": SplitStrategy(self.split_strategy).value,
            "seed": self.seed,
            "schema": self.schema,
        }
        if self.input_path is None:
            synth = asdict(self.synth)
            synth["start_date"] = self.synth.start_date.isoformat()
            d["synth"] = synth
        return d


# --- synthetic data --------------------------------------------------------------

def generate_synthetic(params, lag_depth=DEFAULT_LAG_DEPTH):
    """Seeded daily weather with a yearly cycle and AR(1) anomalies in mean temperature.

    Other measurements hang off the mean temperature: max/min sit a random
    2-6 °C either side, the dew point sits (100 - humidity)/5 below it, and
    humidity, precipitation, pressure and wind are independent draws.
    """
    p = params
    if p.n_days < lag_depth + 10:
        raise InvalidParameterError(f"n_days must be at least {lag_depth + 10}, got {p.n_days}")
    if not -1.0 < p.ar_coefficient < 1.0:
        raise InvalidParameterError(f"ar_coefficient must lie in (-1, 1), got {p.ar_coefficient}")
    if p.noise_sd < 0 or p.seed < 0:
        raise InvalidParameterError("noise_sd and seed must be non-negative")

    n = p.n_days
    rng = np.random.default_rng(p.seed)
    innovations = rng.standard_normal(n) * p.noise_sd
    anomaly = np.empty(n)
    # stationary start
    anomaly[0] = innovations[0] / math.sqrt(1.0 - p.ar_coefficient ** 2)
    for d in range(1, n):
        anomaly[d] = p.ar_coefficient * anomaly[d - 1] + innovations[d]
    day = np.arange(n)
    mean = p.base_temp + p.seasonal_amplitude * np.sin(2.0 * np.pi * day / 365.0) + anomaly

    above = rng.uniform(2.0, 6.0, n)
    below = rng.uniform(2.0, 6.0, n)
    humidity = np.clip(70.0 + 12.0 * rng.standard_normal(n), 15.0, 100.0)
    dew = mean - (100.0 - humidity) / 5.0
    dew_above = rng.uniform(0.5, 3.0, n)
    dew_below = rng.uniform(0.5, 3.0, n)
    rainy = rng.random(n) < 0.3
    precip = np.where(rainy, rng.exponential(4.0, n), 0.0)
    pressure = 1013.0 + 7.0 * rng.standard_normal(n)
    wind = rng.gamma(4.0, 3.0, n)

    return [
        DailyObservation(
            date=p.start_date + timedelta(days=int(d)),
            meantempm=float(mean[d]),
            maxtempm=float(mean[d] + above[d]),
            mintempm=float(mean[d] - below[d]),
            meandewptm=float(dew[d]),
            maxdewptm=float(dew[d] + dew_above[d]),
            mindewptm=float(dew[d] - dew_below[d]),
            meanhumidity=float(humidity[d]),
            precipm=float(precip[d]),
            meanpressurem=float(pressure[d]),
            meanwindspdm=float(wind[d]),
        )
        for d in range(n)
    ]


# --- evaluation ------------------------------------------------------------------

@dataclass(frozen=True)
class EvaluationReport:
    mae: float
    n_test: int
    pairs: tuple  # (actual, predicted)

    def to_dict(self):
        return {
            "mae": self.mae,
            "n_test": self.n_test,
            "pairs": [{"actual": a, "predicted": p} for a, p in self.pairs],
        }


def mean_absolute_error(actual, predicted):
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if actual.shape != predicted.shape or actual.size == 0:
        raise ValueError("MAE needs two non-empty vectors of equal length")
    return float(np.mean(np.abs(actual - predicted)))


def evaluate(fit, test):
    if tuple(test.feature_names) != tuple(fit.feature_names):
        raise ColumnMismatchError(
            f"test columns {list(test.feature_names)} do not match fitted features {list(fit.feature_names)}"
        )
    predicted = [predict(fit, row) for row in test.rows]
    actual = [float(v) for v in test.target]
    return EvaluationReport(mean_absolute_error(actual, predicted), len(actual), tuple(zip(actual, predicted)))


# --- scatter export ----------------------------------------------------------------

SVG_SIZE = 480
SVG_MARGIN = 60


def _scatter_svg(pairs):
    values = [v for pair in pairs for v in pair]
    lo, hi = min(values), max(values)
    pad = 0.05 * (hi - lo) if hi > lo else 1.0
    lo, hi = lo - pad, hi + pad
    span = SVG_SIZE - 2 * SVG_MARGIN

    def px(v):
        return SVG_MARGIN + (v - lo) / (hi - lo) * span

    def py(v):
        return SVG_SIZE - SVG_MARGIN - (v - lo) / (hi - lo) * span

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'<rect x="0" y="0" width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
        f'<rect x="{SVG_MARGIN}" y="{SVG_MARGIN}" width="{span}" height="{span}" '
        'fill="none" stroke="black" stroke-width="1"/>',
        f'<line id="reference" x1="{px(lo):.3f}" y1="{py(lo):.3f}" x2="{px(hi):.3f}" y2="{py(hi):.3f}" '
        'stroke="red" stroke-width="1.5" stroke-dasharray="6,4"/>',
    ]
    for k in range(6):
        v = lo + k * (hi - lo) / 5
        out.append(f'<text x="{px(v):.3f}" y="{SVG_SIZE - SVG_MARGIN + 18}" font-size="11" '
                   f'text-anchor="middle">{v:.1f}</text>')
        out.append(f'<text x="{SVG_MARGIN - 8}" y="{py(v) + 4:.3f}" font-size="11" '
                   f'text-anchor="end">{v:.1f}</text>')
    out.append('<g fill="steelblue" fill-opacity="0.6">')
    for actual, predicted in pairs:
        out.append(f'<circle cx="{px(actual):.3f}" cy="{py(predicted):.3f}" r="3"/>')
    out.append("</g>")
    out.append(f'<text x="{SVG_SIZE / 2}" y="{SVG_SIZE - 15}" font-size="13" '
               'text-anchor="middle">Actual mean temperature (°C)</text>')
    out.append(f'<text x="18" y="{SVG_SIZE / 2}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 18 {SVG_SIZE / 2})">Predicted mean temperature (°C)</text>')
    out.append(f'<text x="{SVG_SIZE / 2}" y="30" font-size="14" text-anchor="middle">'
               'Actual vs predicted (dashed: y = x)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _scatter_csv(pairs):
    lines = ["actual,predicted"] + [f"{a:.6f},{p:.6f}" for a, p in pairs]
    return "\n".join(lines) + "\n"


def export_scatter(report, directory):
    """Write scatter.csv and scatter.svg into `directory`; returns both paths."""
    if not report.pairs:
        raise ValueError("cannot export an empty evaluation")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / "scatter.csv"
    svg_path = directory / "scatter.svg"
    csv_path.write_text(_scatter_csv(report.pairs), encoding="utf-8")
    svg_path.write_text(_scatter_svg(report.pairs), encoding="utf-8")
    return csv_path, svg_path


# --- report serialisation ------------------------------------------------------------

def _round_sig(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    if math.isnan(value):
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(f"{value:.{SIG_DIGITS}g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (float, int, np.floating, np.integer)) or obj is None:
        return _round_sig(obj)
    if isinstance(obj, date):
        return obj.isoformat()
    return obj


def dumps_report(report):
    return json.dumps(_clean(report), indent=2, ensure_ascii=False) + "\n"


def dataset_to_dict(ds):
    return {
        "feature_names": list(ds.feature_names),
        "dates": None if ds.dates is None else [d.isoformat() for d in ds.dates],
        "rows": ds.rows.tolist(),
        "target": ds.target.tolist(),
    }


def dataset_from_dict(d):
    dates = None if d.get("dates") is None else tuple(date.fromisoformat(s) for s in d["dates"])
    rows = np.array(d["rows"], dtype=float).reshape(len(d["target"]), len(d["feature_names"]))
    return SupervisedDataset(tuple(d["feature_names"]), rows, d["target"], dates)


def fit_from_report(fit_dict):
    d = dict(fit_dict)
    for key in ("f_statistic",):
        if d.get(key) == "inf":
            d[key] = math.inf
    return RegressionFit.from_dict(d)


# --- orchestration ---------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineResult:
    correlation: object
    trace: object
    fit: RegressionFit
    evaluation: EvaluationReport
    report: dict
    summary: str
    split: object = None


class Stage:
    """Context manager that re-raises failures as StageError(name, cause)."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.debug("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, (TempForecastError, OSError, ValueError, KeyError)) \
                and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def load_observations(cfg):
    if cfg.input_path is not None:
        return ingest_csv(cfg.input_path, cfg.schema)
    return generate_synthetic(cfg.synth, cfg.lag_depth), {}


@dataclass(frozen=True)
class Prepared:
    """Everything up to and including backward elimination."""

    n_observations: int
    dropped: dict
    dataset: SupervisedDataset
    correlation: object
    split: object
    fit: RegressionFit
    trace: object


def prepare(cfg):
    with Stage("config"):
        cfg.validate()
    with Stage("ingest" if cfg.input_path is not None else "generate"):
        observations, dropped = load_observations(cfg)
    with Stage("build_lag_features"):
        ds = build_lag_features(observations, cfg.lag_depth)
    corr, parts, fit, trace = select_and_fit(ds, cfg)
    return Prepared(len(observations), dict(dropped), ds, corr, parts, fit, trace)


def select_and_fit(ds, cfg):
    """Correlation filter on all rows, then split, then elimination on train rows only."""
    with Stage("correlation_filter"):
        filtered, corr = correlation_filter(ds, cfg.corr_threshold)
    with Stage("split"):
        parts = split(filtered, cfg.test_fraction, cfg.split_strategy, cfg.seed)
    with Stage("backward_eliminate"):
        fit, trace = backward_eliminate(parts.train, cfg.alpha)
    return corr, parts, fit, trace


def run_pipeline(cfg):
    """Run every stage in memory, then write the artifact bundle (if output_dir is set).

    Returns a PipelineResult; the first four fields are the correlation
    report, elimination trace, final fit and test evaluation.
    """
    prep = prepare(cfg)
    fit, parts = prep.fit, prep.split
    with Stage("evaluate"):
        test = parts.test.select(fit.feature_names)
        evaluation = evaluate(fit, test)

    summary = summarize(fit)
    report = {
        "tool": {"name": "tempforecast", "version": __version__},
        "config": cfg.to_dict(),
        "data": {
            "n_observations": prep.n_observations,
            "dropped_rows": prep.dropped,
            "n_supervised_rows": prep.dataset.n_rows,
            "n_lag_features": prep.dataset.n_features,
        },
        "correlation": prep.correlation.to_dict(),
        "split": {
            "strategy": SplitStrategy(parts.strategy).value,
            "seed": parts.seed,
            "n_train": parts.train.n_rows,
            "n_test": parts.test.n_rows,
        },
        "elimination": prep.trace.to_dict(),
        "fit": fit.to_dict(),
        "summary": summary,
        "evaluation": evaluation.to_dict(),
        "test_set": dataset_to_dict(test),
    }
    result = PipelineResult(prep.correlation, prep.trace, fit, evaluation, report, summary, parts)
    if cfg.output_dir is not None:
        with Stage("write_artifacts"):
            write_artifacts(result, cfg.output_dir)
    return result


def write_artifacts(result, output_dir):
    """Stage every file in a scratch directory, then move them into place."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        (staging / "report.json").write_text(dumps_report(result.report), encoding="utf-8")
        (staging / "summary.txt").write_text(result.summary, encoding="utf-8")
        export_scatter(result.evaluation, staging)
        names = ["report.json", "summary.txt", "scatter.csv", "scatter.svg"]
        for name in names:
            os.replace(staging / name, out / name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return [out / n for n in names]
