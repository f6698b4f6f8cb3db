"""Command-line drivers: artifacts, summaries, and exit-code contract."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from uvstab.cli import main
from uvstab.config import read_csv


@pytest.fixture
def config_path(tmp_path):
    def write(name="run.json", **overrides):
        doc = {
            "version": 1,
            "params": {"I": [1.0, 2.0, 3.0], "M": [1.0, 2.0, 3.0]},
            "alpha_e": 3.0,
            "section": {"a": 0.01, "n_returns": 6},
        }
        doc.update(overrides)
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return write


def test_coeffs_json(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["coeffs", "--config", config_path(), "--out", str(out)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["D"] == 4.0
    assert doc["omega_e"] == 1.0
    assert doc["twist"] == -0.75
    assert doc["satisfied"] is True
    assert json.loads((out / "coeffs.json").read_text()) == doc


def test_config_error_exit_code(config_path, tmp_path, capsys):
    bad = config_path("bad.json", section={"frobnicate": 1})
    assert main(["coeffs", "--config", bad, "--out", str(tmp_path)]) == 2
    assert "section.frobnicate" in capsys.readouterr().err
    assert main(["coeffs", "--config", str(tmp_path / "absent.json")]) == 2


def test_intermediate_axis_exit_code(config_path, tmp_path, capsys):
    bad = config_path("interm.json", params={"I": [1.0, 3.0, 2.0], "M": [1, 2, 3]})
    assert main(["coeffs", "--config", bad, "--out", str(tmp_path)]) == 4
    assert "intermediate" in capsys.readouterr().err


def test_seed_flag_reserved(config_path, tmp_path):
    assert main(
        ["coeffs", "--config", config_path(), "--out", str(tmp_path), "--seed", "7"]
    ) == 0


def test_simulate_equilibrium_has_zero_drift(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(
        [
            "simulate", "--config", config_path(), "--out", str(out),
            "--equilibrium", "--t-final", "50",
        ]
    )
    assert code == 0
    header, data = read_csv(out / "trajectory.csv")
    assert header == [
        "t", "pi_x", "pi_y", "pi_z", "p_x", "p_y", "p_z",
        "energy", "p_norm", "pi_dot_p", "pi_norm",
    ]
    assert np.all(data[:, 1:] == data[0, 1:])  # exact fixed point
    stdout = capsys.readouterr().out
    assert "energy=0.000e+00" in stdout


def test_simulate_original_reports_drifts(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(
        ["simulate", "--config", config_path(), "--out", str(out), "--t-final", "20"]
    ) == 0
    header, data = read_csv(out / "trajectory.csv")
    p_norm = data[:, 8]
    assert np.abs(p_norm - p_norm[0]).max() < 1e-8
    assert "max drift" in capsys.readouterr().out


def test_simulate_blownup_momentum_conserved(config_path, tmp_path):
    out = tmp_path / "out"
    code = main(
        [
            "simulate", "--config", config_path(), "--out", str(out),
            "--system", "blownup", "--a", "0", "--t-final", "50",
        ]
    )
    assert code == 0
    header, data = read_csv(out / "trajectory.csv")
    assert header == ["t", "w_x", "w_y", "w_z", "wdot_x", "wdot_y", "wdot_z", "energy", "J"]
    J = data[:, 8]
    assert np.abs(J - J[0]).max() / abs(J[0]) < 1e-8
    w_norm = np.linalg.norm(data[:, 1:4], axis=1)
    assert np.abs(w_norm - 1.0).max() < 1e-10


def test_simulate_rejects_bad_flags(config_path, tmp_path, capsys):
    assert main(
        ["simulate", "--config", config_path(), "--out", str(tmp_path), "--t-final", "-1"]
    ) == 2
    assert main(
        ["simulate", "--config", config_path(), "--out", str(tmp_path), "--a", "-0.1"]
    ) == 2
    capsys.readouterr()


def test_poincare_artifacts(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    cfg = config_path(
        section={"a": 0.01, "n_returns": 6, "I_grid": [0.0025, 0.01, 0.02, 0.03]}
    )
    assert main(["poincare", "--config", cfg, "--out", str(out)]) == 0
    header, data = read_csv(out / "poincare.csv")
    assert header == ["I", "dpsi", "T", "valid"]
    assert data.shape == (4, 4)
    assert np.all(data[:, 3] == 1.0)
    assert (out / "poincare.png").exists()
    stdout = capsys.readouterr().out
    assert "twist fit: slope=" in stdout


def test_figure_artifacts(tmp_path, capsys):
    cfg = tmp_path / "fig.json"
    cfg.write_text(
        json.dumps(
            {
                "version": 1,
                "params": {"I": [0.5, 0.5, 1.0], "M": [1.0, 2.0, 3.0]},
                "alpha_e": 1.0,
                "section": {"a": 0.01, "n_returns": 6},
            }
        )
    )
    out = tmp_path / "out"
    code = main(
        [
            "figure", "--config", str(cfg), "--out", str(out),
            "--i1-min", "0.4", "--i1-max", "0.6", "--i1-count", "2",
        ]
    )
    assert code == 0
    header, data = read_csv(out / "figure.csv")
    assert header == ["I1", "measured", "predicted", "rel_err"]
    assert data.shape == (2, 4)
    assert np.all(data[:, 3] < 0.1)
    assert_allclose(data[0, 0], 0.4)
    assert (out / "figure.gp").exists()
    assert "figure.csv" in (out / "figure.gp").read_text()
    assert (out / "figure.png").exists()
    capsys.readouterr()


def test_figure_empty_grid(tmp_path, config_path):
    out = tmp_path / "out"
    assert main(
        [
            "figure", "--config", config_path(), "--out", str(out),
            "--i1-count", "0",
        ]
    ) == 0
    assert (out / "figure.csv").read_text().strip() == "I1,measured,predicted,rel_err"


def test_verify_subset(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(
        ["verify", "--checks", "equilibrium-fixed,dense-endpoints", "--out", str(out)]
    )
    assert code == 0
    stdout = capsys.readouterr().out
    assert "PASS equilibrium-fixed" in stdout
    report = json.loads((out / "verify.json").read_text())
    assert [r["name"] for r in report] == ["equilibrium-fixed", "dense-endpoints"]
    assert all(r["passed"] for r in report)


def test_verify_unknown_check(tmp_path, capsys):
    assert main(["verify", "--checks", "bogus", "--out", str(tmp_path)]) == 2
    assert "unknown check" in capsys.readouterr().err
