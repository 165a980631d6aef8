"""Secondary acceptance: render real optimizer exports without error.

The optimizer's scaled-run exports (written by the primary acceptance suite
under out/scaled/) are used when present; otherwise a fresh small run is
produced through the optimizer's command-line interface, which is the only
coupling between the two packages.
"""
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from eagga_plots import mean_and_standard_error, plot_front, plot_hv

REPO_ROOT = Path(__file__).resolve().parents[2]
SCALED_EXPORTS = REPO_ROOT / "out" / "scaled"


def _generate_exports(tmp_path) -> Path:
    """Produce exports by driving the optimizer CLI on a synthetic CSV."""
    rng = np.random.default_rng(20240801)
    n, p = 300, 8
    X = rng.normal(size=(n, p))
    X[:, 1] += 0.7
    X[:, 2] += 0.7
    latent = 1.5 * X[:, 0] + 2.2 * (X[:, 1] * X[:, 2] - 0.49)
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-latent))).astype(int)
    data = tmp_path / "data.csv"
    with open(data, "w") as fh:
        fh.write(",".join([f"x{i}" for i in range(1, p + 1)] + ["y"]) + "\n")
        for i in range(n):
            fh.write(",".join([repr(float(v)) for v in X[i]] + [str(int(y[i]))]) + "\n")
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"mu": 10, "nu": 5, "max_evaluations": 40, "seed": 1}))
    out = tmp_path / "run"
    proc = subprocess.run(
        [sys.executable, "-m", "eagga.cli", "run", "--config", str(config),
         "--data", str(data), "--target", "y", "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="module")
def exports(tmp_path_factory):
    if (SCALED_EXPORTS / "pareto_front.csv").is_file():
        return SCALED_EXPORTS
    return _generate_exports(tmp_path_factory.mktemp("run"))


def test_acceptance_front_renders(exports, tmp_path):
    out = plot_front([exports / "pareto_front.csv", exports / "test_front.csv"],
                     tmp_path / "front.png")
    assert out.is_file() and out.stat().st_size > 0
    print("ACCEPTANCE plots front rendering: PASS")


def test_acceptance_hv_renders_without_warnings(exports, tmp_path):
    warnings = plot_hv([exports / "hv_trace.csv"], tmp_path / "hv.png")
    assert warnings == []
    assert (tmp_path / "hv.png").is_file()
    print("ACCEPTANCE plots hv rendering (no monotonicity warnings): PASS")


def test_acceptance_mean_se_exact():
    rows = np.array([
        [0.50, 0.60, 0.70, 0.70],
        [0.52, 0.62, 0.66, 0.72],
        [0.54, 0.58, 0.74, 0.74],
    ])
    mean, se = mean_and_standard_error(rows)
    assert mean == pytest.approx([0.52, 0.60, 0.70, 0.72], abs=1e-15)
    assert se[0] == pytest.approx(0.02 / np.sqrt(3), abs=1e-15)
    assert se[1] == pytest.approx(0.02 / np.sqrt(3), abs=1e-15)
    assert se[2] == pytest.approx(0.04 / np.sqrt(3), abs=1e-15)
    assert se[3] == pytest.approx(0.02 / np.sqrt(3), abs=1e-15)
    print("ACCEPTANCE plots mean/SE aggregation: PASS")
