"""Report rendering: delimited metric/projection tables plus matplotlib
figures written alongside them."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

VALIDATION_COLUMNS = ["unit", "intervention", "rmse", "mape", "r2",
                      "top_donor_1", "top_donor_2", "top_donor_3", "top_donor_4"]
PROJECTION_COLUMNS = ["unit", "intervention", "source", "a", "b", "r2_log",
                      "peak_fitted_day", "peak_fitted_value",
                      "peak_raw_day", "peak_raw_value"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def validation_rows(doc: dict) -> list[dict]:
    validation = doc["diagnostics"]["validation"]
    models = doc["diagnostics"]["models"]
    assignment = doc["partition"]["assignment"]
    rows = []
    for unit in doc["panel"]["unit_ids"]:
        metrics = validation.get(unit)
        if metrics is None:
            continue
        label = assignment[unit]
        donors = models.get(unit, {}).get(label, {}).get("top_donors", [])
        row = {
            "unit": unit,
            "intervention": label,
            "rmse": metrics["rmse"],
            "mape": metrics["mape"],
            "r2": metrics["r2"],
        }
        for i in range(4):
            row[f"top_donor_{i + 1}"] = (
                f"{donors[i][0]}:{donors[i][1]:.4g}" if i < len(donors) else ""
            )
        rows.append(row)
    return rows


def projection_rows(doc: dict) -> list[dict]:
    rows = []
    for unit in doc["panel"]["unit_ids"]:
        for label, proj in doc["counterfactuals"]["projections"].get(unit, {}).items():
            if "error" in proj:
                continue
            if proj["source"] != "counterfactual":
                # the table covers interventions less restrictive than the
                # unit's own; the current-trajectory fit stays in the artifact
                continue
            rows.append({
                "unit": unit,
                "intervention": label,
                "source": proj["source"],
                "a": proj["a"],
                "b": proj["b"],
                "r2_log": proj["r2_log"],
                "peak_fitted_day": proj["peak_fitted"][0],
                "peak_fitted_value": proj["peak_fitted"][1],
                "peak_raw_day": proj["peak_raw"][0],
                "peak_raw_value": proj["peak_raw"][1],
            })
    return rows


def write_table(rows: list[dict], columns: list[str], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def plot_counterfactuals(doc: dict, unit: str, path: Path) -> None:
    """Observed post-period (solid) vs counterfactuals per intervention
    (dashed), with the Day-0 marker at t=0."""
    t0 = doc["panel"]["t0_index"]
    day_labels = doc["panel"]["day_labels"]
    post_days = day_labels[t0:]
    observed = doc["counterfactuals"]["observed_post"][unit]
    predicted = doc["counterfactuals"]["predicted"].get(unit, {})

    fig, ax = plt.subplots(figsize=(8, 5))
    obs_days = [d for d, m in zip(post_days, observed["mask"]) if m]
    obs_vals = [v for v, m in zip(observed["values"], observed["mask"]) if m]
    ax.plot(obs_days, obs_vals, "k-", lw=2, label="observed")
    for label in doc["config"]["buckets"]["labels"]:
        trajectory = predicted.get(label)
        if trajectory is None:
            continue
        ax.plot(post_days, trajectory, "--", label=f"predicted ({label})")
    ax.axvline(0, color="gray", ls=":", label="Day 0")
    ax.set_xlabel("days since Day 0")
    ax.set_ylabel(doc["panel"]["outcome_name"])
    ax.set_title(f"{unit}: observed vs counterfactual trajectories")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_top_donors(doc: dict, unit: str, path: Path) -> None:
    """Horizontal bars of top-donor weights per intervention."""
    models = doc["diagnostics"]["models"].get(unit, {})
    labels = [lb for lb in doc["config"]["buckets"]["labels"] if lb in models]
    if not labels:
        return
    fig, axes = plt.subplots(1, len(labels), figsize=(4 * len(labels), 4),
                             squeeze=False)
    for ax, label in zip(axes[0], labels):
        donors = models[label]["top_donors"]
        names = [d for d, _ in donors][::-1]
        weights = [w for _, w in donors][::-1]
        ax.barh(names, weights)
        ax.set_title(label, fontsize=10)
        ax.tick_params(labelsize=8)
    fig.suptitle(f"{unit}: top donors by |weight|")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_projection(doc: dict, unit: str, path: Path) -> None:
    """Post-period trajectories with their fitted exponential extensions."""
    projections = doc["counterfactuals"]["projections"].get(unit, {})
    usable = {lb: p for lb, p in projections.items() if "error" not in p}
    if not usable:
        return
    observed = doc["counterfactuals"]["observed_post"][unit]
    predicted = doc["counterfactuals"]["predicted"].get(unit, {})
    own = doc["partition"]["assignment"][unit]

    fig, ax = plt.subplots(figsize=(8, 5))
    for label, proj in usable.items():
        base = (observed["values"] if label == own
                else predicted.get(label))
        if base is None:
            continue
        ax.plot(range(len(base)), base,
                "-" if label == own else "--", label=f"{label} ({proj['source']})")
        start = proj["horizon_start_day"]
        days = range(start, start + len(proj["projected"]))
        ax.plot(days, proj["projected"], ":",
                label=f"{label} projection")
        ax.plot(*proj["peak_fitted"], "x")
    ax.set_xlabel("days since Day 0")
    ax.set_ylabel(doc["panel"]["outcome_name"])
    ax.set_title(f"{unit}: exponential projections")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_validation_report(
    doc: dict, out_dir: Path, units: list[str] | None = None
) -> list[Path]:
    """Write metrics.csv plus per-unit trajectory and donor figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / "metrics.csv"]
    write_table(validation_rows(doc), VALIDATION_COLUMNS, written[0])
    for unit in units or doc["panel"]["unit_ids"]:
        safe = unit.replace("/", "_").replace(" ", "_")
        fig_path = out_dir / f"{safe}_counterfactuals.png"
        plot_counterfactuals(doc, unit, fig_path)
        written.append(fig_path)
        donors_path = out_dir / f"{safe}_donors.png"
        plot_top_donors(doc, unit, donors_path)
        if donors_path.exists():
            written.append(donors_path)
    return written


def render_projection_report(
    doc: dict, out_dir: Path, units: list[str] | None = None
) -> list[Path]:
    """Write projections.csv plus per-unit projection figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / "projections.csv"]
    write_table(projection_rows(doc), PROJECTION_COLUMNS, written[0])
    for unit in units or doc["panel"]["unit_ids"]:
        safe = unit.replace("/", "_").replace(" ", "_")
        fig_path = out_dir / f"{safe}_projection.png"
        plot_projection(doc, unit, fig_path)
        if fig_path.exists():
            written.append(fig_path)
    return written
