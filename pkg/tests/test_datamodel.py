from datetime import date, timedelta

import numpy as np
import pytest

from tempforecast.datamodel import (
    BASE_FEATURES,
    DailyObservation,
    InvalidObservationError,
    SplitStrategy,
    SupervisedDataset,
    build_lag_features,
    ingest_csv,
    split,
    write_csv,
)
from tempforecast.errors import (
    DegenerateSplitError,
    MissingColumnError,
    NoUsableRowsError,
    NonMonotonicDatesError,
    TooFewObservationsError,
)

from oracles import lag_window_days

START = date(2017, 3, 1)


def make_obs(day, temp=10.0):
    return DailyObservation(
        date=day, meantempm=temp, maxtempm=temp + 3, mintempm=temp - 3,
        meandewptm=temp - 4, maxdewptm=temp - 2, mindewptm=temp - 6,
        meanhumidity=70.0, precipm=0.0, meanpressurem=1012.0, meanwindspdm=9.0,
    )


def consecutive(n, start=START):
    return [make_obs(start + timedelta(days=i), temp=float(i)) for i in range(n)]


def write_rows(path, rows, header=("date",) + BASE_FEATURES):
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def csv_row(day, temp=10.0, precip="0.0"):
    return [day.isoformat(), temp, temp + 3, temp - 3, temp - 4, temp - 2, temp - 6, 70, precip, 1012, 9]


class TestDailyObservation:
    def test_valid(self):
        assert make_obs(START).meantempm == 10.0

    @pytest.mark.parametrize("field,value", [
        ("maxtempm", 5.0), ("mindewptm", 7.0), ("meanhumidity", 101.0),
        ("precipm", -1.0), ("meanwindspdm", -0.1), ("meanpressurem", 0.0),
        ("meantempm", float("nan")),
    ])
    def test_invariants(self, field, value):
        kwargs = make_obs(START).__dict__ | {field: value}
        with pytest.raises(InvalidObservationError):
            DailyObservation(**kwargs)

    def test_ten_base_features(self):
        assert len(BASE_FEATURES) == 10
        assert BASE_FEATURES[0] == "meantempm"


class TestIngest:
    def test_drops_blank_precip_rows(self, tmp_path):
        rows = [csv_row(START + timedelta(days=i), precip="" if i in (5, 400, 999) else "1.5")
                for i in range(1000)]
        result = ingest_csv(write_rows(tmp_path / "w.csv", rows))
        assert len(result.observations) == 997
        assert result.dropped == {"missing_value": 3}

    def test_singleton(self, tmp_path):
        observations, dropped = ingest_csv(write_rows(tmp_path / "w.csv", [csv_row(START)]))
        assert len(observations) == 1
        assert dropped == {}

    def test_header_only_is_an_error(self, tmp_path):
        with pytest.raises(NoUsableRowsError):
            ingest_csv(write_rows(tmp_path / "w.csv", []))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ingest_csv(tmp_path / "absent.csv")

    def test_missing_column(self, tmp_path):
        header = ("date",) + BASE_FEATURES[:-1]
        path = write_rows(tmp_path / "w.csv", [csv_row(START)[:-1]], header=header)
        with pytest.raises(MissingColumnError) as info:
            ingest_csv(path)
        assert info.value.columns == ("meanwindspdm",)

    def test_sorts_and_tallies(self, tmp_path):
        rows = [
            csv_row(START + timedelta(days=2)),
            csv_row(START),
            ["2017-13-01"] + csv_row(START)[1:],      # bad date
            csv_row(START + timedelta(days=1), precip="abc"),
            csv_row(START)[:2] + [0.0] + csv_row(START)[3:],  # max < mean
            csv_row(START),                            # duplicate date
        ]
        observations, dropped = ingest_csv(write_rows(tmp_path / "w.csv", rows))
        assert [o.date for o in observations] == [START, START + timedelta(days=2)]
        assert dropped == {"duplicate_date": 1, "invalid_value": 1, "unparseable": 2}

    def test_schema_mapping(self, tmp_path):
        header = ("Date", "TempAvg") + BASE_FEATURES[1:]
        path = write_rows(tmp_path / "w.csv", [csv_row(START)], header=header)
        observations, _ = ingest_csv(path, {"date": "Date", "meantempm": "TempAvg"})
        assert observations[0].meantempm == 10.0

    def test_round_trip(self, tmp_path):
        obs = consecutive(6)
        write_csv(obs, tmp_path / "w.csv")
        assert ingest_csv(tmp_path / "w.csv").observations == obs


class TestBuildLagFeatures:
    def test_five_days_two_rows(self):
        ds = build_lag_features(consecutive(5), 3)
        assert ds.n_rows == 2
        assert ds.n_features == 30
        assert ds.dates == (START + timedelta(days=3), START + timedelta(days=4))

    def test_names(self):
        ds = build_lag_features(consecutive(5), 3)
        assert ds.feature_names[:2] == ("meantempm_1", "maxtempm_1")
        assert ds.feature_names[-1] == "meanwindspdm_3"
        assert len(set(ds.feature_names)) == 30

    def test_gap_invalidates_windows(self):
        days = [START + timedelta(days=i) for i in (0, 1, 2, 3, 5, 6, 7)]
        obs = [make_obs(d) for d in days]
        expected = lag_window_days(days, 3)
        assert expected == [START + timedelta(days=3)]
        assert list(build_lag_features(obs, 3).dates) == expected

    def test_too_few(self):
        with pytest.raises(TooFewObservationsError):
            build_lag_features(consecutive(3), 3)

    def test_no_consecutive_window(self):
        obs = [make_obs(START + timedelta(days=2 * i)) for i in range(6)]
        with pytest.raises(TooFewObservationsError):
            build_lag_features(obs, 3)

    def test_duplicate_dates(self):
        obs = consecutive(5) + [make_obs(START)]
        with pytest.raises(NonMonotonicDatesError):
            build_lag_features(obs, 3)

    def test_lag_values(self):
        obs = consecutive(8)
        ds = build_lag_features(obs, 3)
        by_date = {o.date: o for o in obs}
        for i, d in enumerate(ds.dates):
            assert ds.target[i] == by_date[d].meantempm
            for k in (1, 2, 3):
                past = by_date[d - timedelta(days=k)]
                assert ds.column(f"meantempm_{k}")[i] == past.meantempm
                assert ds.column(f"maxdewptm_{k}")[i] == past.maxdewptm

    def test_order_independent(self):
        obs = consecutive(12)
        shuffled = [obs[i] for i in np.random.default_rng(0).permutation(12)]
        a, b = build_lag_features(obs, 2), build_lag_features(shuffled, 2)
        assert a.dates == b.dates
        np.testing.assert_array_equal(a.rows, b.rows)

    def test_custom_feature_subset(self):
        ds = build_lag_features(consecutive(6), 2, features=("meantempm", "precipm"))
        assert ds.feature_names == ("meantempm_1", "precipm_1", "meantempm_2", "precipm_2")


def toy_dataset(n, p=2):
    rows = np.arange(n * p, dtype=float).reshape(n, p)
    dates = tuple(START + timedelta(days=i) for i in range(n))
    return SupervisedDataset(tuple(f"f{j}" for j in range(p)), rows, np.arange(n, dtype=float), dates)


class TestSplit:
    @pytest.mark.parametrize("strategy", list(SplitStrategy))
    def test_997_row_split(self, strategy):
        parts = split(toy_dataset(997), 0.2, strategy, seed=42)
        assert parts.test.n_rows == 199
        assert parts.train.n_rows == 798

    def test_half_rounds_up(self):
        # 0.25 * 10 = 2.5 -> 3
        assert split(toy_dataset(10), 0.25).test.n_rows == 3

    def test_chronological_takes_latest(self):
        parts = split(toy_dataset(10), 0.2, SplitStrategy.CHRONOLOGICAL)
        assert parts.test_index == (8, 9)
        assert parts.test.dates == (START + timedelta(days=8), START + timedelta(days=9))

    def test_seeded_random_is_deterministic(self):
        a = split(toy_dataset(50), 0.2, "random", seed=5)
        b = split(toy_dataset(50), 0.2, "random", seed=5)
        assert a.test_index == b.test_index
        assert split(toy_dataset(50), 0.2, "random", seed=6).test_index != a.test_index

    def test_partition(self):
        parts = split(toy_dataset(31), 0.3, "random", seed=1)
        assert sorted(parts.train_index + parts.test_index) == list(range(31))
        assert not set(parts.train_index) & set(parts.test_index)
        np.testing.assert_array_equal(parts.test.target, np.array(parts.test_index, dtype=float))

    @pytest.mark.parametrize("n,fraction", [(1, 0.5), (4, 0.1), (4, 0.9)])
    def test_degenerate(self, n, fraction):
        with pytest.raises(DegenerateSplitError):
            split(toy_dataset(n), fraction)


class TestSupervisedDataset:
    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError):
            SupervisedDataset(("a", "a"), np.zeros((3, 2)), np.zeros(3))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            SupervisedDataset(("a",), np.zeros((3, 2)), np.zeros(3))

    def test_arrays_are_read_only(self):
        ds = toy_dataset(4)
        with pytest.raises(ValueError):
            ds.rows[0, 0] = 1.0

    def test_select_reorders(self):
        ds = toy_dataset(4, p=3).select(["f2", "f0"])
        assert ds.feature_names == ("f2", "f0")
        np.testing.assert_array_equal(ds.rows[0], [2.0, 0.0])
