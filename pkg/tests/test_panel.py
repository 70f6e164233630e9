import csv
import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthint.errors import (
    EmptyPanelAfterAlignment,
    InsufficientPreHistory,
    NeverReachedThreshold,
    NoMobilityData,
)
from synthint.panel import (
    MEMO3,
    PAPER4,
    AlignmentSpec,
    BucketSpec,
    MobilityScoreSpec,
    Panel,
    align_to_event,
    bucket_interventions,
    build_aligned_panel,
    find_day0,
    mobility_score,
)

from conftest import make_series
from oracles import cumulative_day0


class TestAlignToEvent:
    def test_day0_at_cumulative_crossing(self):
        row = align_to_event(
            make_series("u", [10, 40, 40, 30]),
            AlignmentSpec(event_threshold=80, pre_window_days=1, post_window_days=2),
        )
        assert row.day0_index == 2  # cumulative 90 at index 2
        np.testing.assert_array_equal(row.values, [40, 40, 30])
        assert row.mask.all()

    def test_never_reached_threshold(self):
        with pytest.raises(NeverReachedThreshold):
            align_to_event(
                make_series("u", [5, 5, 5]),
                AlignmentSpec(event_threshold=80, pre_window_days=1,
                              post_window_days=1),
            )

    def test_insufficient_pre_history(self):
        with pytest.raises(InsufficientPreHistory):
            align_to_event(
                make_series("u", [90, 1, 1]),
                AlignmentSpec(event_threshold=80, pre_window_days=1,
                              post_window_days=1),
            )

    def test_missing_pre_cell_rejected(self):
        series = make_series("u", [1, 0, 90, 1], mask=[True, False, True, True])
        with pytest.raises(InsufficientPreHistory):
            align_to_event(
                series,
                AlignmentSpec(event_threshold=80, pre_window_days=2,
                              post_window_days=1),
            )

    def test_post_window_past_series_end_is_missing(self):
        row = align_to_event(
            make_series("u", [50, 50, 3]),
            AlignmentSpec(event_threshold=80, pre_window_days=1,
                          post_window_days=4),
        )
        np.testing.assert_array_equal(row.mask, [True, True, True, False, False])

    def test_day0_date(self):
        row = align_to_event(
            make_series("u", [50, 50, 3], start=dt.date(2020, 3, 1)),
            AlignmentSpec(event_threshold=80, pre_window_days=1,
                          post_window_days=1),
        )
        assert row.day0_date == dt.date(2020, 3, 2)


class TestBuildAlignedPanel:
    def test_drops_and_reports(self):
        panel = Panel(units=(
            make_series("a", [50, 50, 1, 1]),
            make_series("b", [1, 1, 1, 1]),
            make_series("c", [40, 60, 2, 2]),
        ))
        spec = AlignmentSpec(event_threshold=80, pre_window_days=1,
                             post_window_days=2)
        aligned, exclusions = build_aligned_panel(panel, spec)
        assert aligned.matrix.shape == (2, 3)
        assert aligned.unit_ids == ("a", "c")
        assert [e["unit_id"] for e in exclusions] == ["b"]
        assert exclusions[0]["reason"] == "NeverReachedThreshold"

    def test_empty_panel(self):
        panel = Panel(units=(make_series("a", [1, 1]),))
        with pytest.raises(EmptyPanelAfterAlignment):
            build_aligned_panel(
                panel, AlignmentSpec(event_threshold=80, pre_window_days=1,
                                     post_window_days=1)
            )

    def test_snapshot_day0_matches_spreadsheet_oracle(self, snapshot_deaths_path):
        spec = AlignmentSpec(event_threshold=80, pre_window_days=20,
                             post_window_days=15)
        per_country: dict[str, list[float]] = {}
        with open(snapshot_deaths_path) as fh:
            for row in csv.DictReader(fh):
                per_country.setdefault(row["country"], []).append(
                    float(row["new_deaths"])
                )
        expected_survivors = []
        for country, daily in per_country.items():
            day0 = cumulative_day0(daily, 80)
            if day0 is not None and day0 >= 20:
                expected_survivors.append(country)

        from synthint.ingest import parse_deaths_csv

        panel, _ = parse_deaths_csv(snapshot_deaths_path.read_bytes())
        aligned, exclusions = build_aligned_panel(panel, spec)
        assert sorted(aligned.unit_ids) == sorted(expected_survivors)
        for unit in aligned.unit_ids:
            day0 = cumulative_day0(per_country[unit], 80)
            start = dt.date.fromisoformat("2020-02-15")
            assert aligned.day0_dates[unit] == start + dt.timedelta(days=day0)


class TestMobilityScore:
    spec = MobilityScoreSpec(lag_window=(-3, -1))

    def test_mean_of_constant_categories(self):
        start = dt.date(2020, 3, 1)
        mobility = {
            "retail_and_recreation": make_series("r", [-30.0] * 10, start),
            "transit_stations": make_series("t", [-50.0] * 10, start),
        }
        score = mobility_score(mobility, dt.date(2020, 3, 8), self.spec)
        assert score == pytest.approx(-0.40)

    def test_window_entirely_missing(self):
        start = dt.date(2020, 3, 1)
        mobility = {
            "retail_and_recreation": make_series(
                "r", [0.0] * 10, start, mask=[False] * 10
            ),
        }
        with pytest.raises(NoMobilityData):
            mobility_score(mobility, dt.date(2020, 3, 8), self.spec)

    def test_staggered_gaps_average_observed_cells_only(self):
        start = dt.date(2020, 3, 1)
        mobility = {
            "retail_and_recreation": make_series(
                "r", [-10, -20, -30, 0], start,
                mask=[True, True, False, True],
            ),
            "transit_stations": make_series(
                "t", [-40, 0, -60, 0], start,
                mask=[True, False, True, True],
            ),
        }
        # window covers indices 0..2; observed cells: -10, -20, -40, -60
        score = mobility_score(mobility, dt.date(2020, 3, 4), self.spec)
        assert score == pytest.approx(np.mean([-10, -20, -40, -60]) / 100)

    def test_missing_category_is_skipped(self):
        start = dt.date(2020, 3, 1)
        mobility = {"transit_stations": make_series("t", [-50.0] * 10, start)}
        score = mobility_score(mobility, dt.date(2020, 3, 8), self.spec)
        assert score == pytest.approx(-0.50)


class TestBucketing:
    def test_paper_examples(self):
        partition = bucket_interventions(
            {"a": -0.05, "b": -0.55, "c": -0.10, "d": 0.20}, MEMO3
        )
        assert partition.assignment == {
            "a": "low",       # reduction below 10%
            "b": "severe",    # reduction above 40%
            "c": "moderate",  # boundary goes to the more restrictive side
            "d": "low",       # mobility increase counts as zero reduction
        }

    def test_partition_invariants(self):
        scores = {f"u{i}": -i / 20 for i in range(15)}
        partition = bucket_interventions(scores, PAPER4)
        all_members = [u for g in partition.groups.values() for u in g]
        assert sorted(all_members) == sorted(scores)
        assert set(partition.assignment) == set(scores)

    def test_four_level_preset_edges(self):
        assert PAPER4.edges == (0.05, 0.30, 0.50)
        assert len(PAPER4.labels) == 4

    def test_bad_spec_rejected(self):
        with pytest.raises(ValueError):
            BucketSpec(edges=(0.4, 0.1), labels=("a", "b", "c"))
        with pytest.raises(ValueError):
            BucketSpec(edges=(0.1,), labels=("a",))


# --- property tests ---

daily_values = st.lists(
    st.floats(min_value=0, max_value=50, allow_nan=False), min_size=3,
    max_size=40,
)


@given(daily=daily_values, threshold=st.floats(min_value=1, max_value=200))
def test_day0_minimality(daily, threshold):
    values = np.asarray(daily)
    mask = np.ones(len(values), dtype=bool)
    day0 = find_day0(values, mask, threshold)
    cumulative = np.cumsum(values)
    if day0 is None:
        assert cumulative[-1] < threshold
    else:
        assert cumulative[day0] >= threshold
        assert (cumulative[:day0] < threshold).all()


@given(daily=daily_values, t1=st.floats(min_value=1, max_value=100),
       t2=st.floats(min_value=0, max_value=100))
def test_raising_threshold_never_moves_day0_earlier(daily, t1, t2):
    values = np.asarray(daily)
    mask = np.ones(len(values), dtype=bool)
    low, high = min(t1, t1 + t2), max(t1, t1 + t2)
    d_low = find_day0(values, mask, low)
    d_high = find_day0(values, mask, high)
    if d_high is not None:
        assert d_low is not None and d_low <= d_high


@given(daily=daily_values, shift=st.integers(min_value=-300, max_value=300))
@settings(max_examples=50)
def test_calendar_shift_leaves_aligned_row_unchanged(daily, shift):
    spec = AlignmentSpec(event_threshold=30, pre_window_days=1,
                         post_window_days=2)
    base = make_series("u", daily, start=dt.date(2020, 3, 1))
    moved = make_series("u", daily,
                        start=dt.date(2020, 3, 1) + dt.timedelta(days=shift))
    try:
        row_a = align_to_event(base, spec)
    except (NeverReachedThreshold, InsufficientPreHistory) as exc:
        with pytest.raises(type(exc)):
            align_to_event(moved, spec)
        return
    row_b = align_to_event(moved, spec)
    np.testing.assert_array_equal(row_a.values, row_b.values)
    np.testing.assert_array_equal(row_a.mask, row_b.mask)
    assert row_a.day0_index == row_b.day0_index


@given(scores=st.dictionaries(
    st.text(min_size=1, max_size=6),
    st.floats(min_value=-2, max_value=2, allow_nan=False),
    min_size=1, max_size=30,
))
def test_bucketing_total_and_disjoint(scores):
    partition = bucket_interventions(scores, MEMO3)
    members = [u for g in partition.groups.values() for u in g]
    assert len(members) == len(set(members)) == len(scores)
    assert set(members) == set(scores)


@given(daily=daily_values)
def test_alignment_deterministic(daily):
    spec = AlignmentSpec(event_threshold=30, pre_window_days=1,
                         post_window_days=2)
    series = make_series("u", daily)
    try:
        first = align_to_event(series, spec)
    except (NeverReachedThreshold, InsufficientPreHistory):
        return
    second = align_to_event(series, spec)
    np.testing.assert_array_equal(first.values, second.values)
    np.testing.assert_array_equal(first.mask, second.mask)
