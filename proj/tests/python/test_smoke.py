import json
import math
import os

import numpy as np
import pytest
from scipy import special

import ruelle


def test_version():
    assert ruelle.__version__ == "0.1.0"


def test_circle_xy_eigendata():
    circle = ruelle.circle_alphabet(64)
    assert circle.size == 64
    assert np.isclose(circle.weights.sum(), 1.0)
    op = ruelle.TransferOperator(ruelle.dot_coupling_potential(circle, 1.0))
    eig = ruelle.power_iteration(op)
    assert eig.lam == pytest.approx(special.i0(1.0), rel=1e-12)
    assert eig.gap_ratio == pytest.approx(special.i1(1.0) / special.i0(1.0), rel=1e-10)
    assert float(eig.h @ eig.nu) == pytest.approx(1.0, abs=1e-12)


def test_dense_matrix_spectrum():
    f = ruelle.table_potential(ruelle.finite_alphabet(3), 2, list(np.linspace(-1.0, 1.0, 9)))
    op = ruelle.TransferOperator(f)
    moduli = np.sort(np.abs(np.linalg.eigvals(op.dense_matrix())))[::-1]
    eig = ruelle.power_iteration(op)
    assert eig.lam == pytest.approx(moduli[0], rel=1e-12)
    assert eig.gap_ratio == pytest.approx(moduli[1] / moduli[0], rel=1e-9)


def test_errors_are_translated():
    with pytest.raises(ruelle.RuelleError):
        ruelle.finite_alphabet(0)


def test_kernel_samples():
    draws = ruelle.sample_kernel([0.0, 0.0, 1.0], 2.0, 20000, 5)
    assert draws.shape == (20000, 3)
    assert np.allclose(np.linalg.norm(draws, axis=1), 1.0)
    sem = draws[:, 2].std() / math.sqrt(len(draws))
    assert abs(draws[:, 2].mean() - ruelle.langevin(2.0)) < 4 * sem


def test_run_config(tmp_path):
    cfg = {
        "experiment": "pressure",
        "seed": 1,
        "alphabet": {"kind": "circle", "nodes": 32},
        "potential": {"kind": "xy-nn"},
        "params": {"beta": 1.0, "finite_n": [16, 32]},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    status, _ = ruelle.run_config(str(path), out=str(tmp_path / "run"))
    assert status == 0
    result = json.loads((tmp_path / "run" / "result.json").read_text())
    assert result["pressure"] == pytest.approx(math.log(special.i0(1.0)), rel=1e-12)
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["status"] == "ok"


def test_invalid_config_exit_status(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"experiment": "nope"}))
    status, log = ruelle.run_config(str(path), out=str(tmp_path / "run"))
    assert status == 2
    assert log


@pytest.mark.skipif("RUELLE_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_validate(tmp_path):
    import subprocess

    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"experiment": "spectrum", "alphabet": {"kind": "octahedral"},
                                "potential": {"kind": "dot"}}))
    proc = subprocess.run([os.environ["RUELLE_CLI"], "validate", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
