import json
import shutil
import subprocess

import pytest

from nlhelm.cli import main


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


LINEAR = {
    "forward": {
        "k": 1.0, "nu": 1.0, "eps": 0.0, "R0": 1.0, "R1": 2.0, "N": 30,
        "nonlinearity": {"type": "constant", "value": 0.0}, "rtol": 1e-9, "atol": 1e-12,
    }
}

ROUNDTRIP = {
    "forward": {
        "k": 1.0, "nu": 0.1, "eps": 0.3, "R0": 1.0, "R1": 2.0, "N": 16,
        "nonlinearity": {"type": "chebyshev", "a": [0.2, -0.1, 0.05], "interval": [0.0, 2.5]},
        "rtol": 1e-11, "atol": 1e-13, "max_step": 1e-3,
    },
    "inverse": {"K": 3, "r_range": [1.3, 1.9]},
}


def test_forward_linear_run(tmp_path, capsys):
    assert main(["forward", "--config", write(tmp_path / "c.json", LINEAR), "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "plane_wave_check: pass" in out
    lines = (tmp_path / "o" / "field_R1.csv").read_text().splitlines()
    assert lines[0].startswith("# config=")
    assert json.loads(lines[0][len("# config="):])["N"] == 30
    assert lines[1] == "t,re_U,im_U,abs_U"
    assert len(lines) == 2 + 181
    traj = json.loads((tmp_path / "o" / "trajectory.json").read_text())
    assert traj["config"]["k"] == 1.0


def test_malformed_json(tmp_path, caplog):
    bad = tmp_path / "bad.json"
    bad.write_text('{"forward": {"k": 1,\n}')
    assert main(["forward", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "line 2" in caplog.text


def test_config_field_error(tmp_path, caplog):
    cfg = {"forward": {**LINEAR["forward"], "N": -3}}
    assert main(["forward", "--config", write(tmp_path / "c.json", cfg), "--out", str(tmp_path)]) == 1
    assert "N must be" in caplog.text


def test_solver_failure_exit_code(tmp_path):
    cfg = {"forward": {**LINEAR["forward"], "eps": -50.0, "N": 4, "nonlinearity": {"type": "power", "p": 3}}}
    assert main(["forward", "--config", write(tmp_path / "c.json", cfg), "--out", str(tmp_path)]) == 2


def test_chebyshev_range_violation_exit_code(tmp_path):
    cfg = {"forward": {**LINEAR["forward"], "eps": 1.0, "N": 6,
                       "nonlinearity": {"type": "chebyshev", "a": [0.1, 0.2], "interval": [0.0, 0.5]}}}
    assert main(["forward", "--config", write(tmp_path / "c.json", cfg), "--out", str(tmp_path)]) == 2


def test_inverse_errors(tmp_path, caplog):
    cfg = write(tmp_path / "c.json", {"inverse": {"K": 3}})
    assert main(["inverse", "--config", cfg, "--traj", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1
    short = {"config": {"k": 1, "nu": 1, "eps": 1}, "r": [1.0, 2.0], "Z_re": [[0, 0], [0, 0]], "Z_im": [[0, 0], [0, 0]]}
    assert main(["inverse", "--config", cfg, "--traj", write(tmp_path / "t.json", short), "--out", str(tmp_path)]) == 1
    assert "no interior rings" in caplog.text
    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text('{"r": [1, 2, 3]}')
    assert main(["inverse", "--config", cfg, "--traj", str(corrupt), "--out", str(tmp_path)]) == 1


def test_forward_then_inverse_deterministic(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", ROUNDTRIP)
    assert main(["forward", "--config", cfg, "--out", str(tmp_path / "f")]) == 0
    traj = str(tmp_path / "f" / "trajectory.json")
    for name in ("a", "b"):
        assert main(["inverse", "--config", cfg, "--traj", traj, "--out", str(tmp_path / name)]) == 0
    first = (tmp_path / "a" / "coefficients.csv").read_bytes()
    assert first == (tmp_path / "b" / "coefficients.csv").read_bytes()
    lines = first.decode().splitlines()
    echo = json.loads(lines[0][len("# config="):])
    assert echo["inverse"]["K"] == 3 and echo["forward"]["N"] == 16
    assert lines[1] == "r,a_0,a_1,a_2,residual,cond"
    out = capsys.readouterr().out
    assert "median_deviation" in out


def test_roundtrip_command(tmp_path, capsys):
    assert main(["roundtrip", "--config", write(tmp_path / "c.json", ROUNDTRIP)]) == 0
    out = capsys.readouterr().out
    median = float(out.split("median_deviation: ")[1].split()[0])
    assert median <= 1e-3


def test_roundtrip_needs_reference(tmp_path):
    assert main(["roundtrip", "--config", write(tmp_path / "c.json", {**LINEAR, "inverse": {"K": 2}})]) == 1


def test_preset_experiment1(tmp_path):
    assert main(["preset", "experiment1", "--out", str(tmp_path)]) == 0
    for name in ("config.json", "trajectory.json", "field_R1.csv", "coefficients.csv"):
        assert (tmp_path / name).exists()
    config = json.loads((tmp_path / "config.json").read_text())
    assert config["forward"]["eps"] == 2.0 and config["forward"]["nu"] == 0.1


def test_validate_report(tmp_path, capsys):
    report_path = tmp_path / "r.json"
    assert main(["validate", "--seed", "0", "--report", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["passed"]
    names = {c["name"] for c in report["checks"]}
    assert {"gamma_normalization", "convolution_product", "composition_oracles",
            "stencil_exactness", "plane_wave_expansion", "roundtrip"} <= names
    for c in report["checks"]:
        assert c["max_error"] <= c["tolerance"]


def test_validate_negative_control(capsys):
    assert main(["validate", "--corrupt-gamma"]) == 3
    report = json.loads(capsys.readouterr().out)
    failed = [c for c in report["checks"] if not c["passed"]]
    assert [c["name"] for c in failed] == ["gamma_normalization"]
    assert failed[0]["counterexample"] is not None


@pytest.mark.skipif(shutil.which("nlhelm") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["nlhelm", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "nlhelm" in proc.stdout
