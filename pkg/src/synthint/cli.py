"""Command-line driver: run the pipeline, inspect artifacts, serve the
what-if explorer API."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import artifact, pipeline, report
from .errors import SynthintError

log = logging.getLogger("synthint")


def _fail(stage: str, exc: Exception) -> None:
    click.echo(f"error: {stage}: {exc}", err=True)
    sys.exit(1)


@click.group()
@click.option("--log-level", default="warning",
              type=click.Choice(["debug", "info", "warning", "error"]),
              help="Logging verbosity.")
def main(log_level: str) -> None:
    """Synthetic-interventions counterfactual estimation."""
    logging.basicConfig(level=log_level.upper(),
                        format="%(levelname)s %(name)s: %(message)s")


@main.command("run")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON run-config document.")
@click.option("--output", "-o", default=None,
              type=click.Path(dir_okay=False),
              help="Artifact output path (default: <hash>.json in cwd).")
def cmd_run(config_path: str, output: str | None) -> None:
    """Execute the full pipeline and write a run artifact."""
    try:
        raw = json.loads(Path(config_path).read_text())
        config = pipeline.RunConfig.from_dict(raw)
    except (json.JSONDecodeError, ValueError) as exc:
        _fail("config", exc)
    try:
        doc = pipeline.run_pipeline(config)
    except SynthintError as exc:
        _fail("pipeline", exc)
    run_hash = artifact.content_hash(doc)
    path = Path(output) if output else Path(f"{run_hash}.json")
    artifact.write_run(doc, path)
    doc["content_hash"] = run_hash
    click.echo(pipeline.summarize(doc))
    click.echo(f"artifact written: {path}")


def _load(artifact_path: str) -> dict:
    try:
        return artifact.read_run(artifact_path)
    except SynthintError as exc:
        _fail("artifact", exc)


@main.command("validate")
@click.argument("artifact_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", default=None, type=click.Path(file_okay=False),
              help="Write metrics.csv and per-unit figures here.")
@click.option("--unit", "units", multiple=True,
              help="Restrict figures to these units (repeatable).")
def cmd_validate(artifact_path: str, out_dir: str | None,
                 units: tuple[str, ...]) -> None:
    """Per-unit self-validation metrics and top-4 donors."""
    doc = _load(artifact_path)
    rows = report.validation_rows(doc)
    click.echo(f"{'unit':<24}{'bucket':<12}{'rmse':>10}{'mape':>10}{'r2':>10}"
               "  top donors")
    for row in rows:
        donors = ", ".join(
            row[f"top_donor_{i}"] for i in range(1, 5) if row[f"top_donor_{i}"]
        )
        click.echo(
            f"{row['unit']:<24}{row['intervention']:<12}"
            f"{_num(row['rmse']):>10}{_num(row['mape']):>10}"
            f"{_num(row['r2']):>10}  {donors}"
        )
    if out_dir:
        written = report.render_validation_report(
            doc, Path(out_dir), list(units) or None
        )
        click.echo(f"wrote {len(written)} files to {out_dir}")


@main.command("project")
@click.argument("artifact_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--horizon", default=None, type=int,
              help="Projection horizon in days (default: the run's).")
@click.option("--out-dir", default=None, type=click.Path(file_okay=False),
              help="Write projections.csv and figures here.")
@click.option("--unit", "units", multiple=True,
              help="Restrict figures to these units (repeatable).")
def cmd_project(artifact_path: str, horizon: int | None,
                out_dir: str | None, units: tuple[str, ...]) -> None:
    """Peak projections per (unit, less-restrictive intervention)."""
    doc = _load(artifact_path)
    if horizon is not None:
        doc["counterfactuals"]["projections"] = pipeline.project_from_doc(
            doc, horizon
        )
    rows = report.projection_rows(doc)
    click.echo(f"{'unit':<24}{'bucket':<12}{'source':<16}"
               f"{'growth/day':>12}{'peak(fit)':>12}{'peak(raw)':>12}")
    for row in rows:
        click.echo(
            f"{row['unit']:<24}{row['intervention']:<12}{row['source']:<16}"
            f"{_num(row['b']):>12}{_num(row['peak_fitted_value']):>12}"
            f"{_num(row['peak_raw_value']):>12}"
        )
    own_only = {
        unit for unit, projs in
        doc["counterfactuals"]["projections"].items()
        if len(projs) == 1
    }
    for unit in sorted(own_only):
        click.echo(f"warning: {unit} is already in the least-restrictive "
                   "bucket; nothing to lift", err=True)
    if out_dir:
        written = report.render_projection_report(
            doc, Path(out_dir), list(units) or None
        )
        click.echo(f"wrote {len(written)} files to {out_dir}")


@main.command("serve")
@click.option("--dir", "artifact_dir", required=True,
              type=click.Path(file_okay=False),
              help="Directory of run artifacts (created if missing).")
@click.option("--bind", default="127.0.0.1:8000",
              help="host:port to listen on.")
def cmd_serve(artifact_dir: str, bind: str) -> None:
    """Serve the HTTP/JSON API for the scenario explorer."""
    import uvicorn

    from .service import create_app

    host, _, port = bind.rpartition(":")
    app = create_app(Path(artifact_dir))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


def _num(x) -> str:
    return "" if x is None else f"{x:.4g}"


if __name__ == "__main__":
    main()
