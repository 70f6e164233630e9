"""CSV parsers for the normalized death-count and mobility layouts.

Both parsers are total over well-formed files: rows that fail validation
are rejected individually and reported exactly once, never aborting the
parse. Internal calendar gaps become missing-mask entries.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import MalformedHeader
from .panel import MOBILITY_CATEGORIES, Panel, UnitSeries

DEATHS_HEADER = ["country", "date", "new_deaths"]
MOBILITY_HEADER = ["country", "date", "category", "pct_change"]


@dataclass
class ParseReport:
    """Row-level diagnostics accumulated during a parse."""

    rejected: list[dict] = field(default_factory=list)

    def reject(self, line_no: int, reason: str) -> None:
        self.rejected.append({"line_no": line_no, "reason": reason})


def _decode(data: bytes | str) -> io.StringIO:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def _check_header(row: list[str] | None, expected: list[str]) -> None:
    if row is None or [c.strip() for c in row] != expected:
        raise MalformedHeader(
            f"expected header {','.join(expected)!r}, got "
            f"{','.join(row) if row else '<empty file>'!r}"
        )


def _parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip())


def _series_from_daymap(
    unit_id: str, by_date: dict[dt.date, float]
) -> UnitSeries:
    """Dense series spanning min..max date; gaps become missing cells."""
    start, end = min(by_date), max(by_date)
    n = (end - start).days + 1
    values = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    for day, value in by_date.items():
        idx = (day - start).days
        values[idx] = value
        mask[idx] = True
    return UnitSeries(unit_id, values, start, mask)


def parse_deaths_csv(data: bytes | str) -> tuple[Panel, ParseReport]:
    """Parse `country,date,new_deaths` into a Panel, one series per
    country sorted by date. Negative counts and duplicate (country, date)
    keys are rejected per row."""
    reader = csv.reader(_decode(data))
    _check_header(next(reader, None), DEATHS_HEADER)
    report = ParseReport()
    per_country: dict[str, dict[dt.date, float]] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            report.reject(line_no, f"expected 3 fields, got {len(row)}")
            continue
        country = row[0].strip()
        try:
            day = _parse_date(row[1])
            deaths = float(row[2])
        except ValueError as exc:
            report.reject(line_no, str(exc))
            continue
        if not country:
            report.reject(line_no, "empty country")
            continue
        if deaths < 0:
            report.reject(line_no, f"negative new_deaths {deaths}")
            continue
        by_date = per_country.setdefault(country, {})
        if day in by_date:
            report.reject(line_no, f"duplicate (country, date) ({country}, {day})")
            continue
        by_date[day] = deaths
    units = tuple(
        _series_from_daymap(country, by_date)
        for country, by_date in per_country.items()
    )
    return Panel(units=units, outcome_name="daily_deaths"), report


def parse_mobility_csv(
    data: bytes | str,
) -> tuple[dict[str, dict[str, UnitSeries]], ParseReport]:
    """Parse `country,date,category,pct_change` into per-country
    per-category series. Unknown categories are rejected per row;
    category names are trimmed before matching."""
    reader = csv.reader(_decode(data))
    _check_header(next(reader, None), MOBILITY_HEADER)
    report = ParseReport()
    per_key: dict[tuple[str, str], dict[dt.date, float]] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            report.reject(line_no, f"expected 4 fields, got {len(row)}")
            continue
        country = row[0].strip()
        category = row[2].strip()
        try:
            day = _parse_date(row[1])
            pct = float(row[3])
        except ValueError as exc:
            report.reject(line_no, str(exc))
            continue
        if not country:
            report.reject(line_no, "empty country")
            continue
        if category not in MOBILITY_CATEGORIES:
            report.reject(line_no, f"unknown category {category!r}")
            continue
        by_date = per_key.setdefault((country, category), {})
        if day in by_date:
            report.reject(
                line_no,
                f"duplicate (country, date, category) "
                f"({country}, {day}, {category})",
            )
            continue
        by_date[day] = pct
    out: dict[str, dict[str, UnitSeries]] = {}
    for (country, category), by_date in per_key.items():
        out.setdefault(country, {})[category] = _series_from_daymap(
            f"{country}/{category}", by_date
        )
    return out, report
