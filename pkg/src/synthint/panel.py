"""Panel data model: time series, event alignment, mobility scoring, bucketing.

Turns raw per-unit outcome series into the engine's inputs: an event-aligned
observation matrix with an explicit missing mask, and a partition of units
into intervention groups derived from mobility scores.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyPanelAfterAlignment,
    InsufficientPreHistory,
    NeverReachedThreshold,
    NoMobilityData,
)

MOBILITY_CATEGORIES = (
    "retail_and_recreation",
    "grocery_and_pharmacy",
    "parks",
    "transit_stations",
    "workplaces",
    "residential",
)


@dataclass(frozen=True, eq=False)
class UnitSeries:
    """One unit's daily outcome series with an observed/missing mask."""

    unit_id: str
    values: np.ndarray
    calendar_start: dt.date
    missing_mask: np.ndarray  # True = observed

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.missing_mask, dtype=bool)
        if values.ndim != 1 or len(values) < 1:
            raise ValueError("values must be a nonempty 1-d sequence")
        if len(mask) != len(values):
            raise ValueError("values and missing_mask must have equal length")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing_mask", mask)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class Panel:
    """A collection of unit series sharing one outcome variable."""

    units: tuple[UnitSeries, ...]
    outcome_name: str = "daily_deaths"

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        ids = [u.unit_id for u in self.units]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate unit_id in panel")

    def __len__(self) -> int:
        return len(self.units)

    def unit_ids(self) -> list[str]:
        return [u.unit_id for u in self.units]


@dataclass(frozen=True)
class AlignmentSpec:
    """How to locate Day 0 and window the series around it."""

    event_threshold: float = 80.0
    pre_window_days: int = 20
    post_window_days: int = 15

    def __post_init__(self):
        if self.event_threshold < 0:
            raise ValueError("event_threshold must be nonnegative")
        if self.pre_window_days < 1 or self.post_window_days < 1:
            raise ValueError("window lengths must be >= 1")

    @property
    def total_days(self) -> int:
        return self.pre_window_days + self.post_window_days


@dataclass(frozen=True, eq=False)
class AlignedRow:
    """A single unit windowed around its Day 0."""

    unit_id: str
    values: np.ndarray
    mask: np.ndarray
    day0_index: int  # index of Day 0 in the original series
    day0_date: dt.date


@dataclass(frozen=True, eq=False)
class AlignedPanel:
    """Event-aligned N x T observation matrix with Day-0 column t0_index."""

    matrix: np.ndarray
    mask: np.ndarray
    t0_index: int
    unit_ids: tuple[str, ...]
    day_labels: tuple[int, ...]
    day0_dates: dict[str, dt.date] = field(default_factory=dict)

    def __post_init__(self):
        n, t = self.matrix.shape
        if self.mask.shape != (n, t) or len(self.unit_ids) != n:
            raise ValueError("inconsistent aligned panel shapes")
        if not self.mask[:, : self.t0_index].all():
            raise ValueError("pre-intervention segment must be fully observed")

    @property
    def n_units(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_days(self) -> int:
        return self.matrix.shape[1]

    def row(self, unit_id: str) -> int:
        return self.unit_ids.index(unit_id)


@dataclass(frozen=True)
class MobilityScoreSpec:
    """Which mobility categories to average, over which lagged window."""

    categories: tuple[str, ...] = ("retail_and_recreation", "transit_stations")
    lag_window: tuple[int, int] = (-20, -1)  # inclusive days relative to Day 0

    def __post_init__(self):
        if not self.categories:
            raise ValueError("categories must be nonempty")
        lo, hi = self.lag_window
        if hi >= 0 or lo > hi:
            raise ValueError("lag_window must end before Day 0")


@dataclass(frozen=True)
class BucketSpec:
    """Mobility-reduction cut points defining the intervention labels."""

    edges: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.edges) + 1:
            raise ValueError("need exactly |edges| + 1 labels")
        if any(not (0 < e < 1) for e in self.edges):
            raise ValueError("edges must lie in (0, 1)")
        if any(a >= b for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("edges must be strictly increasing")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be distinct")


#: Three-level bucketing: <10%, 10-40%, >40% mobility reduction.
MEMO3 = BucketSpec(edges=(0.10, 0.40), labels=("low", "moderate", "severe"))

#: Four-level bucketing: <5%, 5-30%, 30-50%, >50% mobility reduction.
PAPER4 = BucketSpec(
    edges=(0.05, 0.30, 0.50),
    labels=("none", "moderate", "strict", "very_strict"),
)

BUCKET_PRESETS = {"memo3": MEMO3, "paper4": PAPER4}


@dataclass(frozen=True)
class InterventionPartition:
    """Assignment of each unit to exactly one intervention group."""

    assignment: dict[str, str]
    groups: dict[str, tuple[str, ...]]

    def __post_init__(self):
        seen: set[str] = set()
        for label, members in self.groups.items():
            for uid in members:
                if uid in seen:
                    raise ValueError(f"unit {uid!r} appears in two groups")
                seen.add(uid)
                if self.assignment.get(uid) != label:
                    raise ValueError(f"assignment/groups disagree for {uid!r}")
        if seen != set(self.assignment):
            raise ValueError("groups do not cover all assigned units")

    def labels(self) -> list[str]:
        return list(self.groups)

    def group_sizes(self) -> dict[str, int]:
        return {label: len(members) for label, members in self.groups.items()}


def find_day0(values: np.ndarray, mask: np.ndarray, threshold: float) -> int | None:
    """First index where the running sum of observed values reaches threshold.

    Missing days contribute nothing to the cumulative sum.
    """
    cumulative = np.cumsum(np.where(mask, values, 0.0))
    hits = np.nonzero(cumulative >= threshold)[0]
    return int(hits[0]) if hits.size else None


def align_to_event(series: UnitSeries, spec: AlignmentSpec) -> AlignedRow:
    """Window a unit's series around the day its cumulative outcome first
    reaches the event threshold.

    Raises NeverReachedThreshold or InsufficientPreHistory when the unit
    cannot produce a fully observed pre-intervention segment.
    """
    day0 = find_day0(series.values, series.missing_mask, spec.event_threshold)
    if day0 is None:
        raise NeverReachedThreshold(
            f"{series.unit_id}: cumulative total never reaches "
            f"{spec.event_threshold}"
        )
    start = day0 - spec.pre_window_days
    if start < 0 or not series.missing_mask[start:day0].all():
        raise InsufficientPreHistory(
            f"{series.unit_id}: fewer than {spec.pre_window_days} observed "
            f"days precede Day 0"
        )
    t = spec.total_days
    values = np.zeros(t)
    mask = np.zeros(t, dtype=bool)
    end = min(day0 + spec.post_window_days, len(series))
    n_avail = end - start
    values[:n_avail] = series.values[start:end]
    mask[:n_avail] = series.missing_mask[start:end]
    day0_date = series.calendar_start + dt.timedelta(days=day0)
    return AlignedRow(series.unit_id, values, mask, day0, day0_date)


def build_aligned_panel(
    panel: Panel, spec: AlignmentSpec
) -> tuple[AlignedPanel, list[dict]]:
    """Align every unit, dropping (and reporting) those that fail.

    Returns the aligned panel plus an exclusion report, one entry per
    dropped unit with its reason.
    """
    rows: list[AlignedRow] = []
    exclusions: list[dict] = []
    for unit in panel.units:
        try:
            rows.append(align_to_event(unit, spec))
        except (NeverReachedThreshold, InsufficientPreHistory) as exc:
            exclusions.append(
                {"unit_id": unit.unit_id,
                 "reason": type(exc).__name__,
                 "detail": str(exc)}
            )
    if not rows:
        raise EmptyPanelAfterAlignment("no unit survived alignment")
    aligned = AlignedPanel(
        matrix=np.vstack([r.values for r in rows]),
        mask=np.vstack([r.mask for r in rows]),
        t0_index=spec.pre_window_days,
        unit_ids=tuple(r.unit_id for r in rows),
        day_labels=tuple(range(-spec.pre_window_days, spec.post_window_days)),
        day0_dates={r.unit_id: r.day0_date for r in rows},
    )
    return aligned, exclusions


def mobility_score(
    mobility: dict[str, UnitSeries],
    day0_date: dt.date,
    spec: MobilityScoreSpec = MobilityScoreSpec(),
) -> float:
    """Mean percent-change-from-baseline over the lagged window, as a
    signed fraction (negative = reduction). Missing days are skipped.
    """
    lo, hi = spec.lag_window
    cells: list[float] = []
    for category in spec.categories:
        series = mobility.get(category)
        if series is None:
            continue
        for offset in range(lo, hi + 1):
            day = day0_date + dt.timedelta(days=offset)
            idx = (day - series.calendar_start).days
            if 0 <= idx < len(series) and series.missing_mask[idx]:
                cells.append(series.values[idx])
    if not cells:
        raise NoMobilityData(
            f"no mobility observations in window [{lo}, {hi}] around {day0_date}"
        )
    return float(np.mean(cells)) / 100.0


def bucket_interventions(
    scores: dict[str, float], spec: BucketSpec
) -> InterventionPartition:
    """Assign each unit to an intervention label by mobility reduction.

    reduction = max(0, -score); intervals are half-open [lo, hi),
    lower-inclusive, so a reduction exactly at an edge falls in the more
    restrictive bucket.
    """
    assignment: dict[str, str] = {}
    groups: dict[str, list[str]] = {label: [] for label in spec.labels}
    for unit_id, score in scores.items():
        if not np.isfinite(score):
            raise ValueError(f"non-finite mobility score for {unit_id!r}")
        reduction = max(0.0, -score)
        i = int(np.searchsorted(spec.edges, reduction, side="right"))
        label = spec.labels[i]
        assignment[unit_id] = label
        groups[label].append(unit_id)
    return InterventionPartition(
        assignment=assignment,
        groups={label: tuple(members) for label, members in groups.items()
                if members},
    )


def smooth_daily(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Centered 3-day moving average over observed cells; optional, off by
    default in the pipeline."""
    out = values.astype(float).copy()
    n = len(values)
    for i in range(n):
        lo, hi = max(0, i - 1), min(n, i + 2)
        window = [values[j] for j in range(lo, hi) if mask[j]]
        if window:
            out[i] = float(np.mean(window))
    return out
