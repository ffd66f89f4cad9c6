"""Daily observations, the 3-day lag table built from them, and train/test splits."""

import csv
import enum
import math
from collections import Counter
from dataclasses import dataclass, fields
from datetime import date
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateSplitError,
    InvalidParameterError,
    MissingColumnError,
    NoUsableRowsError,
    NonMonotonicDatesError,
    TooFewObservationsError,
)

TARGET = "meantempm"
DEFAULT_LAG_DEPTH = 3


class InvalidObservationError(ValueError):
    pass


@dataclass(frozen=True)
class DailyObservation:
    """One day of weather. Temperatures and dew points in °C."""

    date: date
    meantempm: float
    maxtempm: float
    mintempm: float
    meandewptm: float
    maxdewptm: float
    mindewptm: float
    meanhumidity: float
    precipm: float
    meanpressurem: float
    meanwindspdm: float

    def __post_init__(self):
        for name in BASE_FEATURES:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidObservationError(f"{name} is not finite: {value!r}")
        if not self.mintempm <= self.meantempm <= self.maxtempm:
            raise InvalidObservationError("expected mintempm <= meantempm <= maxtempm")
        if not self.mindewptm <= self.meandewptm <= self.maxdewptm:
            raise InvalidObservationError("expected mindewptm <= meandewptm <= maxdewptm")
        if not 0.0 <= self.meanhumidity <= 100.0:
            raise InvalidObservationError("meanhumidity outside [0, 100]")
        if self.precipm < 0 or self.meanwindspdm < 0:
            raise InvalidObservationError("precipm and meanwindspdm must be >= 0")
        if self.meanpressurem <= 0:
            raise InvalidObservationError("meanpressurem must be > 0")


BASE_FEATURES = tuple(f.name for f in fields(DailyObservation) if f.name != "date")
DEFAULT_SCHEMA = {"date": "date", **{name: name for name in BASE_FEATURES}}


class IngestResult(NamedTuple):
    observations: list
    dropped: dict  # reason -> count; empty when nothing was dropped


def ingest_csv(path, schema=None):
    """Read daily observations from a CSV file.

    `schema` maps logical field names (``date`` plus the ten base features)
    to CSV header names; unmapped fields keep their own name. Rows with a
    blank, unparseable or physically inconsistent value are dropped and
    tallied in ``IngestResult.dropped``. If a date repeats, the first row
    wins.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    mapping = dict(DEFAULT_SCHEMA)
    if schema:
        unknown = set(schema) - set(mapping)
        if unknown:
            raise InvalidParameterError(f"schema names unknown field(s): {', '.join(sorted(unknown))}")
        mapping.update(schema)

    dropped = Counter()
    by_date = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in mapping.values() if col not in header]
        if missing:
            raise MissingColumnError(missing)
        for raw in reader:
            try:
                values = {}
                for name, col in mapping.items():
                    cell = (raw.get(col) or "").strip()
                    if not cell:
                        raise _Missing(name)
                    values[name] = date.fromisoformat(cell) if name == "date" else float(cell)
                obs = DailyObservation(**values)
            except _Missing:
                dropped["missing_value"] += 1
                continue
            except InvalidObservationError:
                dropped["invalid_value"] += 1
                continue
            except ValueError:
                dropped["unparseable"] += 1
                continue
            if obs.date in by_date:
                dropped["duplicate_date"] += 1
                continue
            by_date[obs.date] = obs

    if not by_date:
        raise NoUsableRowsError(f"{path} has no usable rows (dropped: {dict(dropped) or 'none'})")
    observations = [by_date[d] for d in sorted(by_date)]
    return IngestResult(observations, dict(sorted(dropped.items())))


class _Missing(Exception):
    pass


def write_csv(observations, path):
    """Write observations with the default header; floats use repr so they round-trip."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DEFAULT_SCHEMA.keys())
        for obs in observations:
            writer.writerow([obs.date.isoformat()] + [repr(float(getattr(obs, f))) for f in BASE_FEATURES])


def _readonly(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SupervisedDataset:
    """Design-matrix view: one row per target day, columns named ``base_k``.

    The intercept column is not stored; regression adds it.
    """

    feature_names: tuple
    rows: np.ndarray
    target: np.ndarray
    dates: Optional[tuple] = None

    def __post_init__(self):
        names = tuple(self.feature_names)
        rows = _readonly(self.rows)
        target = _readonly(self.target)
        if rows.ndim == 1 and rows.size == 0:
            rows = _readonly(np.empty((target.shape[0], 0)))
        if rows.ndim != 2 or rows.shape[1] != len(names):
            raise ValueError(f"rows shape {rows.shape} does not match {len(names)} feature names")
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names")
        if target.shape != (rows.shape[0],):
            raise ValueError(f"target shape {target.shape} does not match {rows.shape[0]} rows")
        dates = self.dates
        if dates is not None:
            dates = tuple(dates)
            if len(dates) != rows.shape[0]:
                raise ValueError("dates length does not match row count")
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "dates", dates)

    @property
    def n_rows(self):
        return self.rows.shape[0]

    @property
    def n_features(self):
        return self.rows.shape[1]

    def column(self, name):
        return self.rows[:, self.feature_names.index(name)]

    def select(self, names: Sequence[str]) -> "SupervisedDataset":
        """Keep only `names`, in the order given."""
        idx = [self.feature_names.index(n) for n in names]
        return SupervisedDataset(tuple(names), self.rows[:, idx], self.target, self.dates)

    def take(self, indices) -> "SupervisedDataset":
        """Row subset, in the order of `indices`."""
        indices = list(indices)
        dates = None if self.dates is None else tuple(self.dates[i] for i in indices)
        return SupervisedDataset(
            self.feature_names,
            self.rows[indices] if indices else np.empty((0, self.n_features)),
            self.target[indices],
            dates,
        )


def build_lag_features(observations, lag_depth=DEFAULT_LAG_DEPTH, features=BASE_FEATURES):
    """Turn daily observations into a supervised table of lagged features.

    Row for day d holds ``f_k = f(d - k days)`` for each base feature f and
    k = 1..lag_depth; the target is meantempm on day d. Only days preceded
    by `lag_depth` consecutive calendar days get a row. Input order does not
    matter; repeated dates are an error.
    """
    if not isinstance(lag_depth, (int, np.integer)) or lag_depth < 1:
        raise InvalidParameterError(f"lag_depth must be a positive integer, got {lag_depth!r}")
    obs = sorted(observations, key=lambda o: o.date)
    for prev, cur in zip(obs, obs[1:]):
        if cur.date <= prev.date:
            raise NonMonotonicDatesError(f"date {cur.date.isoformat()} appears more than once")
    if len(obs) <= lag_depth:
        raise TooFewObservationsError(
            f"need more than {lag_depth} observations for lag depth {lag_depth}, got {len(obs)}"
        )

    values = np.array([[getattr(o, f) for f in features] for o in obs], dtype=float)
    ordinals = [o.date.toordinal() for o in obs]
    run = 0  # consecutive predecessors of obs[i]
    keep = []
    for i in range(1, len(obs)):
        run = run + 1 if ordinals[i] == ordinals[i - 1] + 1 else 0
        if run >= lag_depth:
            keep.append(i)
    if not keep:
        raise TooFewObservationsError(f"no day has {lag_depth} consecutive preceding days")

    names = tuple(f"{f}_{k}" for k in range(1, lag_depth + 1) for f in features)
    rows = np.array([np.concatenate([values[i - k] for k in range(1, lag_depth + 1)]) for i in keep])
    target = np.array([obs[i].meantempm for i in keep])
    dates = tuple(obs[i].date for i in keep)
    return SupervisedDataset(names, rows, target, dates)


class SplitStrategy(str, enum.Enum):
    RANDOM = "random"
    CHRONOLOGICAL = "chronological"


@dataclass(frozen=True, eq=False)
class SplitDataset:
    train: SupervisedDataset
    test: SupervisedDataset
    seed: int
    strategy: SplitStrategy
    train_index: tuple
    test_index: tuple


def n_test_rows(n, test_fraction):
    # round half up
    return int(math.floor(test_fraction * n + 0.5))


def split(ds, test_fraction=0.2, strategy=SplitStrategy.RANDOM, seed=42):
    """Partition rows into train and test.

    |test| = round(test_fraction * n) with halves rounded up. The random
    strategy depends only on (seed, n); chronological puts the last rows
    (the dataset is date ordered) into test. Both keep original row order
    inside each part.
    """
    strategy = SplitStrategy(strategy)
    if not 0.0 < test_fraction < 1.0:
        raise InvalidParameterError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = ds.n_rows
    n_test = n_test_rows(n, test_fraction)
    if n < 2 or n_test == 0 or n_test == n:
        raise DegenerateSplitError(f"split of {n} rows at fraction {test_fraction} leaves an empty side")

    if strategy is SplitStrategy.CHRONOLOGICAL:
        order = np.argsort(ds.dates, kind="stable") if ds.dates is not None else np.arange(n)
        test_idx = sorted(int(i) for i in order[n - n_test:])
    else:
        rng = np.random.default_rng(seed)
        test_idx = sorted(int(i) for i in rng.permutation(n)[:n_test])
    test_set = set(test_idx)
    train_idx = [i for i in range(n) if i not in test_set]
    return SplitDataset(
        ds.take(train_idx), ds.take(test_idx), seed, strategy, tuple(train_idx), tuple(test_idx)
    )
