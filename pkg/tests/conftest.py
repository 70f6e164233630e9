import datetime as dt
import json
from pathlib import Path

import numpy as np
import pytest

SNAPSHOT_DIR = Path(__file__).resolve().parents[1] / "src" / "synthint" / "data" / "snapshot"


@pytest.fixture(scope="session")
def snapshot_deaths_path() -> Path:
    return SNAPSHOT_DIR / "deaths.csv"


@pytest.fixture(scope="session")
def snapshot_mobility_path() -> Path:
    return SNAPSHOT_DIR / "mobility.csv"


@pytest.fixture(scope="session")
def snapshot_config(snapshot_deaths_path, snapshot_mobility_path) -> dict:
    return {
        "deaths_csv": str(snapshot_deaths_path),
        "mobility_csv": str(snapshot_mobility_path),
        "buckets": "memo3",
    }


@pytest.fixture()
def snapshot_config_file(tmp_path, snapshot_config) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(snapshot_config))
    return path


def make_series(unit_id, values, start=dt.date(2020, 3, 1), mask=None):
    from synthint.panel import UnitSeries

    values = np.asarray(values, dtype=float)
    if mask is None:
        mask = np.ones(len(values), dtype=bool)
    return UnitSeries(unit_id, values, start, np.asarray(mask, dtype=bool))
