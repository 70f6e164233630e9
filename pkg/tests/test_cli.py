import json

import numpy as np
import pytest
from click.testing import CliRunner

from synthint import artifact
from synthint.cli import main

runner = CliRunner()


@pytest.fixture(scope="module")
def run_artifact(tmp_path_factory, request):
    """One snapshot run shared by the CLI tests."""
    tmp = tmp_path_factory.mktemp("cli-run")
    config = {
        "deaths_csv": str(request.config.rootpath / "src" / "synthint"
                          / "data" / "snapshot" / "deaths.csv"),
        "mobility_csv": str(request.config.rootpath / "src" / "synthint"
                            / "data" / "snapshot" / "mobility.csv"),
        "buckets": "memo3",
    }
    config_path = tmp / "config.json"
    config_path.write_text(json.dumps(config))
    out_path = tmp / "run.json"
    result = runner.invoke(
        main, ["run", "--config", str(config_path), "-o", str(out_path)]
    )
    assert result.exit_code == 0, result.output
    return config_path, out_path, result.output


class TestRun:
    def test_summary_and_artifact(self, run_artifact):
        _, out_path, output = run_artifact
        assert "units aligned" in output
        assert "content hash" in output
        doc = artifact.read_run(out_path)
        labels = doc["config"]["buckets"]["labels"]
        assert labels == ["low", "moderate", "severe"]
        # every surviving scored country has an entry under all 3 labels
        # minus pairs that failed (none expected on the snapshot)
        predicted = doc["counterfactuals"]["predicted"]
        assert all(len(v) == 3 for v in predicted.values())
        assert not doc["diagnostics"]["failures"]

    def test_deterministic_hash(self, run_artifact, tmp_path):
        config_path, out_path, _ = run_artifact
        again = tmp_path / "again.json"
        result = runner.invoke(
            main, ["run", "--config", str(config_path), "-o", str(again)]
        )
        assert result.exit_code == 0
        assert (artifact.read_run(again)["content_hash"]
                == artifact.read_run(out_path)["content_hash"])

    def test_missing_input_file(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({
            "deaths_csv": str(tmp_path / "nope.csv"),
            "mobility_csv": str(tmp_path / "nope2.csv"),
        }))
        result = runner.invoke(main, ["run", "--config", str(config_path)])
        assert result.exit_code != 0
        assert "nope.csv" in result.output

    def test_bad_config(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text("{not json")
        result = runner.invoke(main, ["run", "--config", str(config_path)])
        assert result.exit_code != 0
        assert "error: config" in result.output


class TestValidate:
    def test_one_row_per_country(self, run_artifact):
        _, out_path, _ = run_artifact
        result = runner.invoke(main, ["validate", str(out_path)])
        assert result.exit_code == 0, result.output
        doc = artifact.read_run(out_path)
        lines = [ln for ln in result.output.splitlines()
                 if ln and not ln.startswith("unit")]
        assert len(lines) == len(doc["diagnostics"]["validation"])

    def test_metrics_match_recomputation(self, run_artifact):
        _, out_path, _ = run_artifact
        doc = artifact.read_run(out_path)
        for unit, metrics in doc["diagnostics"]["validation"].items():
            label = doc["partition"]["assignment"][unit]
            observed = np.asarray(
                doc["counterfactuals"]["observed_post"][unit]["values"]
            )
            mask = np.asarray(
                doc["counterfactuals"]["observed_post"][unit]["mask"]
            )
            predicted = np.asarray(
                doc["counterfactuals"]["predicted"][unit][label]
            )
            err = predicted[mask] - observed[mask]
            assert metrics["rmse"] == pytest.approx(
                float(np.sqrt(np.mean(err**2)))
            )

    def test_tampered_artifact_fails(self, run_artifact, tmp_path):
        _, out_path, _ = run_artifact
        bad = tmp_path / "tampered.json"
        doc = json.loads(out_path.read_text())
        doc["panel"]["n_units"] += 1
        bad.write_text(json.dumps(doc))
        result = runner.invoke(main, ["validate", str(bad)])
        assert result.exit_code != 0

    def test_report_files_written(self, run_artifact, tmp_path):
        _, out_path, _ = run_artifact
        out_dir = tmp_path / "report"
        result = runner.invoke(
            main, ["validate", str(out_path), "--out-dir", str(out_dir),
                   "--unit", "Sweden", "--unit", "India"]
        )
        assert result.exit_code == 0, result.output
        assert (out_dir / "metrics.csv").exists()
        assert (out_dir / "Sweden_counterfactuals.png").exists()
        assert (out_dir / "India_donors.png").exists()

    def test_top_four_donors_in_table(self, run_artifact):
        _, out_path, _ = run_artifact
        doc = artifact.read_run(out_path)
        for unit, per_label in doc["diagnostics"]["models"].items():
            for label, model in per_label.items():
                assert len(model["top_donors"]) == min(
                    4, len(model["weights"])
                )


class TestProject:
    def test_severe_country_gets_two_rows(self, run_artifact):
        _, out_path, _ = run_artifact
        doc = artifact.read_run(out_path)
        severe = doc["partition"]["groups"]["severe"][0]
        projections = doc["counterfactuals"]["projections"][severe]
        less_restrictive = [lb for lb, p in projections.items()
                            if p.get("source") == "counterfactual"]
        assert sorted(less_restrictive) == ["low", "moderate"]

    def test_least_restrictive_country_warns(self, run_artifact):
        _, out_path, _ = run_artifact
        result = runner.invoke(main, ["project", str(out_path)])
        assert result.exit_code == 0, result.output
        doc = artifact.read_run(out_path)
        low_country = doc["partition"]["groups"]["low"][0]
        assert f"warning: {low_country}" in result.output

    def test_peaks_match_recomputation(self, run_artifact):
        from synthint.pipeline import project_from_doc

        _, out_path, _ = run_artifact
        doc = artifact.read_run(out_path)
        recomputed = project_from_doc(doc, doc["config"]["horizon_days"])
        assert recomputed == doc["counterfactuals"]["projections"]

    def test_horizon_override_and_report(self, run_artifact, tmp_path):
        _, out_path, _ = run_artifact
        out_dir = tmp_path / "proj"
        result = runner.invoke(
            main, ["project", str(out_path), "--horizon", "10",
                   "--out-dir", str(out_dir), "--unit", "India"]
        )
        assert result.exit_code == 0, result.output
        assert (out_dir / "projections.csv").exists()
        assert (out_dir / "India_projection.png").exists()
