import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matchristoffel.cli import main
from matchristoffel.errors import ConfigError
from matchristoffel.experiment import ExperimentConfig, parse_degrees
from matchristoffel.presets import PRESETS
from matchristoffel.serialize import dumps, to_plain, write_flow_csv

CONFIG = {
    "measure": {"base": "chebyshev1", "p": 2, "params": {}},
    "perturbation": {"coeffs": [[[-1.5, 0.4], [0.2, 2.0]], [[1.0, 0.0], [0.0, 1.0]]]},
    "degrees": "0..4",
    "toda": {"grid": [{"t1": [[0.0], [0.0]]}, {"t1": [[0.0], [0.1]]}], "k": [1, 2]},
}


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(CONFIG))
    return path


# -- serialization ----------------------------------------------------------------

@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_exactly(x):
    assert json.loads(dumps({"x": x}))["x"] == x


def test_non_finite_become_null():
    assert json.loads(dumps([math.nan, math.inf])) == [None, None]


def test_plain_conversion():
    out = to_plain({"a": np.arange(3), "b": np.float32(0.5), "c": 1 + 2j, "d": (np.int64(4), True)})
    assert out == {"a": [0, 1, 2], "b": 0.5, "c": [1.0, 2.0], "d": [4, True]}


def test_flow_csv(tmp_path):
    path = write_flow_csv(tmp_path / "flow.csv", [(0.1, 2, "0_1", 1 / 3)])
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["t", "k", "entry", "value"]
    assert rows[1][:3] == ["0.10000000000000001", "2", "0_1"] and float(rows[1][3]) == 1 / 3


# -- configuration -----------------------------------------------------------------

def test_parse_degrees():
    assert parse_degrees("2..5") == (2, 5)
    assert parse_degrees([1, 3]) == (1, 3)
    assert parse_degrees(4) == (0, 4)
    for bad in ("5..2", "x", [1]):
        with pytest.raises(ConfigError):
            parse_degrees(bad)


@pytest.mark.parametrize("bad", [
    {},
    {"measure": {"base": "nope"}},
    {"measure": {"base": "chebyshev1", "p": 2}, "perturbation": {"coeffs": [[[1.0]]]}},
    {"measure": {"base": "chebyshev1"}, "gram": "fourier"},
    {"measure": {"base": "chebyshev1"}, "tolerances": {"nope": 1}},
    {"measure": {"base": "chebyshev1"}, "toda": {"grid": []}},
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_config_overrides():
    cfg = ExperimentConfig.from_dict(CONFIG, tol=1e-8, seed=7, degrees="1..3")
    assert cfg.factor_tol == 1e-8 and cfg.seed == 7 and cfg.degrees == (1, 3)
    assert cfg.toda["grid"][1].t1.shape == (2, 2)


# -- command line -------------------------------------------------------------------

@pytest.mark.parametrize("command,files", [
    ("moments", {"moments.json", "moment_matrix.csv"}),
    ("factor", {"factorization.json"}),
    ("biorth", {"system.json"}),
    ("christoffel", {"system.json", "perturbed_system.json", "connection.json"}),
    ("toda", {"flow.csv"}),
])
def test_pipelines(command, files, config, tmp_path, capsys):
    out = tmp_path / command
    assert main([command, "--config", str(config), "--out", str(out)]) == 0
    written = {p.name for p in out.iterdir()}
    assert files | {"report.json"} <= written
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] and report["checks"]
    assert "PASS" in capsys.readouterr().out


def test_christoffel_artifacts_content(config, tmp_path):
    out = tmp_path / "c"
    main(["christoffel", "--config", str(config), "--out", str(out)])
    pert = json.loads((out / "perturbed_system.json").read_text())
    assert pert["p"] == 2 and len(pert["P1"]) == 5
    assert len(pert["spectrum"]["eigenvalues"]) == 2
    conn = json.loads((out / "connection.json").read_text())
    assert {"omega1_band", "omega2", "residuals"} <= set(conn)
    assert len(conn["omega1_band"][0]) == conn["N"] + 1 == 2


def test_preset_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["preset", "chebyshev-example", "--out", str(a)]) == 0
    assert main(["preset", "chebyshev-example", "--out", str(b)]) == 0
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_preset_params_and_degrees(tmp_path):
    params = tmp_path / "p.json"
    params.write_text(json.dumps({"params": {"alpha": -0.3, "beta": 1.0}}))
    out = tmp_path / "j"
    assert main(["preset", "jacobi-51", "--config", str(params), "--degrees", "0..3", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["params"]["alpha"] == -0.3 and report["params"]["n_max"] == 3


def test_failed_checks_exit_one(config, tmp_path):
    data = dict(CONFIG, tolerances={"orthogonality": 1e-30})
    path = tmp_path / "strict.json"
    path.write_text(json.dumps(data))
    assert main(["biorth", "--config", str(path), "--out", str(tmp_path / "o")]) == 1


@pytest.mark.parametrize("payload,error", [
    ({"measure": {"base": "chebyshev1", "p": 2}, "perturbation": {"coeffs": [[[1.0]]]}}, "ConfigError"),
    ({"measure": {"base": "chebyshev1"}, "perturbation": {"coeffs": [[[1.0]], [[2.0]]]}}, "NotMonic"),
])
def test_errors_are_structured(payload, error, tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    out = tmp_path / "err"
    assert main(["christoffel", "--config", str(path), "--out", str(out)]) == 2
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == error and err["message"]
    assert json.loads(capsys.readouterr().err)["error"] == error


def test_missing_config(tmp_path):
    assert main(["factor", "--out", str(tmp_path / "o")]) == 2
    assert main(["factor", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "o")]) == 2


def test_list(capsys):
    assert main(["list"]) == 0
    listed = {line.split()[0] for line in capsys.readouterr().out.splitlines()}
    assert listed == set(PRESETS)
