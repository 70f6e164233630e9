"""End-to-end case-study pipeline: ingest, align, score, bucket, run the
engine, self-validate, project, and assemble the run artifact."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import engine, projection
from .errors import NoMobilityData, PipelineError
from .ingest import parse_deaths_csv, parse_mobility_csv
from .panel import (
    BUCKET_PRESETS,
    AlignmentSpec,
    BucketSpec,
    MobilityScoreSpec,
    Panel,
    UnitSeries,
    bucket_interventions,
    build_aligned_panel,
    mobility_score,
    smooth_daily,
)

MOBILITY_COVERAGE_FLAG = 0.5  # flag units observing < 50% of window cells


@dataclass(frozen=True)
class RunConfig:
    """Full configuration surface of one pipeline run."""

    deaths_csv: str
    mobility_csv: str
    alignment: AlignmentSpec = AlignmentSpec()
    mobility: MobilityScoreSpec = MobilityScoreSpec()
    bucket_preset: str | None = "memo3"
    buckets: BucketSpec | None = None
    svt: engine.SvtConfig = engine.SvtConfig()
    horizon_days: int = projection.DEFAULT_HORIZON_DAYS
    smooth: bool = False

    def __post_init__(self):
        if (self.bucket_preset is None) == (self.buckets is None):
            raise ValueError("exactly one of bucket_preset / buckets required")
        if self.bucket_preset is not None and self.bucket_preset not in BUCKET_PRESETS:
            raise ValueError(
                f"unknown preset {self.bucket_preset!r}; "
                f"known: {sorted(BUCKET_PRESETS)}"
            )

    @property
    def bucket_spec(self) -> BucketSpec:
        if self.buckets is not None:
            return self.buckets
        return BUCKET_PRESETS[self.bucket_preset]

    def to_dict(self) -> dict:
        buckets: dict = {
            "edges": [float(e) for e in self.bucket_spec.edges],
            "labels": list(self.bucket_spec.labels),
        }
        if self.bucket_preset is not None:
            buckets["preset"] = self.bucket_preset
        svt: dict = {"rule": self.svt.rule, "min_rank": self.svt.min_rank}
        if self.svt.rule == "energy":
            svt["energy_fraction"] = float(self.svt.energy_fraction)
        else:
            svt["fixed_rank"] = int(self.svt.fixed_rank)
        return {
            "deaths_csv": self.deaths_csv,
            "mobility_csv": self.mobility_csv,
            "alignment": {
                "event_threshold": float(self.alignment.event_threshold),
                "pre_window_days": self.alignment.pre_window_days,
                "post_window_days": self.alignment.post_window_days,
            },
            "mobility_score": {
                "categories": list(self.mobility.categories),
                "lag_window": list(self.mobility.lag_window),
            },
            "buckets": buckets,
            "svt": svt,
            "horizon_days": self.horizon_days,
            "smooth": self.smooth,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        try:
            # numeric fields are coerced so e.g. a threshold of 80 and
            # 80.0 parse to the same config (and the same content hash)
            align_defaults = AlignmentSpec()
            raw_align = doc.get("alignment", {})
            alignment = AlignmentSpec(
                event_threshold=float(raw_align.get(
                    "event_threshold", align_defaults.event_threshold)),
                pre_window_days=int(raw_align.get(
                    "pre_window_days", align_defaults.pre_window_days)),
                post_window_days=int(raw_align.get(
                    "post_window_days", align_defaults.post_window_days)),
            )
            mob = doc.get("mobility_score", {})
            mobility = MobilityScoreSpec(
                categories=tuple(mob.get("categories",
                                         MobilityScoreSpec().categories)),
                lag_window=tuple(int(d) for d in mob.get("lag_window", (-20, -1))),
            )
            raw_buckets = doc.get("buckets", "memo3")
            preset: str | None = None
            buckets: BucketSpec | None = None
            if isinstance(raw_buckets, str):
                preset = raw_buckets
            elif "preset" in raw_buckets:
                preset = raw_buckets["preset"]
            else:
                buckets = BucketSpec(
                    edges=tuple(float(e) for e in raw_buckets["edges"]),
                    labels=tuple(raw_buckets["labels"]),
                )
            raw_svt = doc.get("svt", {})
            raw_fixed = raw_svt.get("fixed_rank")
            svt = engine.SvtConfig(
                rule=raw_svt.get("rule", "energy"),
                energy_fraction=float(raw_svt.get("energy_fraction", 0.90)),
                fixed_rank=None if raw_fixed is None else int(raw_fixed),
                min_rank=int(raw_svt.get("min_rank", 1)),
            )
            return cls(
                deaths_csv=doc["deaths_csv"],
                mobility_csv=doc["mobility_csv"],
                alignment=alignment,
                mobility=mobility,
                bucket_preset=preset,
                buckets=buckets,
                svt=svt,
                horizon_days=int(doc.get("horizon_days",
                                         projection.DEFAULT_HORIZON_DAYS)),
                smooth=bool(doc.get("smooth", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"invalid run config: {exc}") from exc


def _smoothed(panel: Panel) -> Panel:
    units = tuple(
        replace(u, values=smooth_daily(u.values, u.missing_mask))
        for u in panel.units
    )
    return Panel(units=units, outcome_name=panel.outcome_name)


def run_pipeline(config: RunConfig) -> dict:
    """Execute the full pipeline and return the (unsealed) artifact doc."""
    deaths_path = Path(config.deaths_csv)
    mobility_path = Path(config.mobility_csv)
    for path in (deaths_path, mobility_path):
        if not path.exists():
            raise PipelineError(f"input file not found: {path}")

    panel, deaths_report = parse_deaths_csv(deaths_path.read_bytes())
    mobility, mobility_report = parse_mobility_csv(mobility_path.read_bytes())
    if config.smooth:
        panel = _smoothed(panel)

    aligned, exclusions = build_aligned_panel(panel, config.alignment)

    scores: dict[str, float] = {}
    warnings: list[str] = []
    for uid in aligned.unit_ids:
        day0 = aligned.day0_dates[uid]
        per_category = mobility.get(uid)
        if per_category is None:
            exclusions.append(
                {"unit_id": uid, "reason": "NoMobilityData",
                 "detail": "no mobility series for unit"}
            )
            continue
        try:
            scores[uid] = mobility_score(per_category, day0, config.mobility)
        except NoMobilityData as exc:
            exclusions.append(
                {"unit_id": uid, "reason": "NoMobilityData", "detail": str(exc)}
            )
            continue
        coverage = _window_coverage(per_category, day0, config.mobility)
        if coverage < MOBILITY_COVERAGE_FLAG:
            warnings.append(
                f"{uid}: mobility window coverage {coverage:.0%} below "
                f"{MOBILITY_COVERAGE_FLAG:.0%}"
            )
    if not scores:
        raise PipelineError("no aligned unit has mobility data")

    partition = bucket_interventions(scores, config.bucket_spec)
    cf = engine.run_si(aligned, partition, config.svt)
    validation = {
        unit: {k: (float(v) if np.isfinite(v) else None)
               for k, v in metrics.items()}
        for unit, metrics in engine.self_validation(cf).items()
    }

    predicted = {
        unit: {
            label: [float(x) for x in entry.trajectory]
            for (u, label), entry in cf.entries.items()
            if u == unit
        }
        for unit in cf.unit_order
    }
    models: dict[str, dict] = {}
    for (unit, label), entry in cf.entries.items():
        model = entry.model
        models.setdefault(unit, {})[label] = {
            "weights": [[d, float(w)] for d, w in
                        zip(model.donor_ids, model.weights)],
            "pre_rank": model.ranks[0],
            "post_rank": model.ranks[1],
            "pre_fit_rmse": float(model.pre_fit_rmse),
            "top_donors": [[d, w] for d, w in engine.top_donors(model, 4)],
        }

    doc = {
        "schema_version": 1,
        "config": config.to_dict(),
        "panel": {
            "outcome_name": panel.outcome_name,
            "unit_ids": list(aligned.unit_ids),
            "n_units": aligned.n_units,
            "t0_index": aligned.t0_index,
            "day_labels": list(aligned.day_labels),
            "day0_dates": {u: d.isoformat()
                           for u, d in aligned.day0_dates.items()},
            "exclusions": exclusions,
        },
        "partition": {
            "assignment": dict(partition.assignment),
            "groups": {label: list(members)
                       for label, members in partition.groups.items()},
            "scores": {u: float(s) for u, s in scores.items()},
        },
        "counterfactuals": {
            "predicted": predicted,
            "observed_post": {
                unit: {
                    "values": [float(x) for x in cf.observed[unit]],
                    "mask": [bool(b) for b in cf.observed_mask[unit]],
                }
                for unit in cf.unit_order
            },
            "projections": {},
        },
        "diagnostics": {
            "models": models,
            "validation": validation,
            "failures": cf.failures,
            "engine_warnings": list(cf.warnings),
            "pipeline_warnings": warnings,
            "parse": {
                "deaths_rejected": deaths_report.rejected,
                "mobility_rejected": mobility_report.rejected,
            },
        },
    }
    doc["counterfactuals"]["projections"] = project_from_doc(
        doc, config.horizon_days
    )
    return doc


def _window_coverage(
    per_category: dict[str, UnitSeries], day0: dt.date, spec: MobilityScoreSpec
) -> float:
    lo, hi = spec.lag_window
    total = len(spec.categories) * (hi - lo + 1)
    observed = 0
    for category in spec.categories:
        series = per_category.get(category)
        if series is None:
            continue
        for offset in range(lo, hi + 1):
            idx = (day0 + dt.timedelta(days=offset) - series.calendar_start).days
            if 0 <= idx < len(series) and series.missing_mask[idx]:
                observed += 1
    return observed / total if total else 0.0


def project_from_doc(doc: dict, horizon_days: int) -> dict[str, dict[str, dict]]:
    """Recompute the projection table from an artifact's trajectories at a
    different horizon."""
    out: dict[str, dict[str, dict]] = {}
    label_order = list(doc["config"]["buckets"]["labels"])
    assignment = doc["partition"]["assignment"]
    for unit in doc["panel"]["unit_ids"]:
        own = assignment.get(unit)
        if own is None:
            continue
        own_rank = label_order.index(own)
        rows: dict[str, dict] = {}
        observed = np.asarray(doc["counterfactuals"]["observed_post"][unit]["values"])
        predicted = doc["counterfactuals"]["predicted"].get(unit, {})
        candidates: list[tuple[str, np.ndarray, str]] = [(own, observed, "observed")]
        for label in label_order[:own_rank]:
            trajectory = predicted.get(label)
            if trajectory is not None:
                candidates.append(
                    (label, np.asarray(trajectory), "counterfactual")
                )
        for label, trajectory, source in candidates:
            try:
                fit = projection.fit_exponential(trajectory)
                proj = projection.project_peak(fit, trajectory, horizon_days)
            except Exception as exc:
                rows[label] = {"source": source, "error": type(exc).__name__,
                               "detail": str(exc)}
                continue
            raw_peak_day = int(np.argmax(trajectory))
            rows[label] = {
                "source": source,
                "a": fit.a,
                "b": fit.b,
                "r2_log": fit.r2_log,
                "horizon_days": proj.horizon_days,
                "horizon_start_day": proj.horizon_start_day,
                "projected": [float(x) for x in proj.projected],
                "peak_fitted": [proj.projected_peak[0],
                                float(proj.projected_peak[1])],
                "peak_raw": [raw_peak_day, float(trajectory[raw_peak_day])],
            }
        out[unit] = rows
    return out


def summarize(doc: dict) -> str:
    """Human-readable one-screen summary of an artifact."""
    panel = doc["panel"]
    groups = doc["partition"]["groups"]
    validation = doc["diagnostics"]["validation"]
    rmses = sorted(m["rmse"] for m in validation.values()
                   if m.get("rmse") is not None)
    median_rmse = rmses[len(rmses) // 2] if rmses else float("nan")
    lines = [
        f"units aligned: {panel['n_units']} "
        f"(excluded: {len(panel['exclusions'])})",
        "bucket sizes: "
        + ", ".join(f"{label}={len(members)}"
                    for label, members in groups.items()),
        f"counterfactual entries: "
        f"{sum(len(v) for v in doc['counterfactuals']['predicted'].values())}",
        f"median self-validation RMSE: {median_rmse:.4g}",
    ]
    if doc.get("content_hash"):
        lines.append(f"content hash: {doc['content_hash']}")
    return "\n".join(lines)
