import json

import numpy as np
import pytest

from pinvforecast.cli import main
from pinvforecast.forecast import horizon_bound
from pinvforecast.ingest import load_series
from pinvforecast.pipeline import RECIPES, resolve_config
from pinvforecast.errors import ConfigError


@pytest.fixture
def mg_file(tmp_path):
    out = tmp_path / "mg.txt"
    code = main(["generate", "mackey-glass", "--a", "0.2", "--b", "0.1", "--tau", "30",
                 "--x0", "1.2", "--n", "1500", "--out", str(out)])
    assert code == 0
    return out


def test_generate_mackey_glass(mg_file):
    s = load_series(mg_file)
    assert len(s) == 1500
    assert s.dt == pytest.approx(1.0)
    assert s.values[0] == 1.2


def test_generate_pure_decay_is_monotone(tmp_path):
    out = tmp_path / "decay.txt"
    assert main(["generate", "mackey-glass", "--a", "0", "--b", "0.1", "--tau", "30",
                 "--x0", "1.2", "--n", "50", "--out", str(out)]) == 0
    assert np.all(np.diff(load_series(out).values) < 0)


def test_generate_missing_flag_is_usage_error(tmp_path, capsys):
    code = main(["generate", "mackey-glass", "--a", "0.2", "--b", "0.1", "--tau", "30",
                 "--n", "10", "--out", str(tmp_path / "x.txt")])
    assert code == 2
    assert "--x0" in capsys.readouterr().err


def test_fit_then_predict(tmp_path, mg_file, capsys):
    model = tmp_path / "m.json"
    assert main(["fit", "--input", str(mg_file), "--d", "5", "--np", "3", "--M", "300", "--model", str(model)]) == 0
    data = json.loads(model.read_text())
    assert data["n_coefficients"] == 56 and len(data["a_mean"]) == 56
    assert data["fnn"] is None
    out = tmp_path / "out"
    assert main(["predict", "--input", str(mg_file), "--model", str(model), "--out-dir", str(out)]) == 0
    summary = json.loads((out / "forecast_predictions.summary.json").read_text())
    assert summary["m_p"] == horizon_bound(1500, 1, 5)
    assert summary["nmse_new"] < 1e-3
    assert (out / "forecast_rolling_mse.csv").exists()
    assert "m_p=1495" in capsys.readouterr().out


def test_fit_auto_dimension_recorded(tmp_path, mg_file):
    model = tmp_path / "m.json"
    assert main(["fit", "--input", str(mg_file), "--d", "auto", "--np", "2", "--M", "300",
                 "--d-max", "8", "--model", str(model)]) == 0
    data = json.loads(model.read_text())
    assert data["fnn"]["d"] == data["embedding"]["d"] == 3
    assert data["fnn"]["saturated"] is False


def test_constant_signal_round_trip(tmp_path):
    sig = tmp_path / "c.csv"
    sig.write_text("# rate_hz=100\n" + "0.5\n" * 200)
    model = tmp_path / "m.json"
    assert main(["fit", "--input", str(sig), "--d", "3", "--np", "2", "--M", "100", "--model", str(model)]) == 0
    assert main(["predict", "--input", str(sig), "--model", str(model), "--out-dir", str(tmp_path),
                 "--name", "c"]) == 0
    summary = json.loads((tmp_path / "c_predictions.summary.json").read_text())
    assert summary["mse"] <= 1e-24


def test_output_dir_from_environment(tmp_path, mg_file, monkeypatch):
    model = tmp_path / "m.json"
    assert main(["fit", "--input", str(mg_file), "--d", "5", "--np", "2", "--M", "200", "--model", str(model)]) == 0
    env_dir = tmp_path / "env"
    monkeypatch.setenv("PINVFORECAST_OUTPUT_DIR", str(env_dir))
    assert main(["predict", "--input", str(mg_file), "--model", str(model)]) == 0
    assert (env_dir / "forecast_predictions.csv").exists()


def test_reproduce_mackey_glass(tmp_path, capsys):
    assert main(["reproduce", "mg-t1", "--out-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "mg-t1_predictions.summary.json").read_text())
    assert summary["model"]["n_coefficients"] == 56
    assert summary["m_p"] == 1495
    assert summary["nmse_new"] < 1e-4
    for name in ("mg-t1_series.txt", "mg-t1_model.json", "mg-t1_predictions.csv", "mg-t1_rolling_mse.csv"):
        assert (tmp_path / name).exists()


def test_reproduce_surrogate(tmp_path):
    assert main(["reproduce", "mit207-t5", "--surrogate", "--out-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "mit207-t5_predictions.summary.json").read_text())
    assert summary["model"]["n_coefficients"] == 35
    assert summary["m_p"] == 9995
    assert summary["source"]["kind"] == "ecg-surrogate"


def test_reproduce_missing_export_is_data_error(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["reproduce", "cu02-t1", "--out-dir", str(tmp_path)]) == 3
    assert "cu02.csv" in capsys.readouterr().err


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["reproduce", "cu02-t5", "--surrogate", "--out-dir", str(a)]) == 0
    assert main(["reproduce", "cu02-t5", "--surrogate", "--out-dir", str(b)]) == 0
    for name in ("cu02-t5_series.txt", "cu02-t5_predictions.csv", "cu02-t5_rolling_mse.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma, mb = (json.loads((x / "cu02-t5_model.json").read_text()) for x in (a, b))
    # the output directory is echoed in the config and is the only expected difference
    assert ma["config"].pop("out_dir") != mb["config"].pop("out_dir")
    assert ma == mb


def test_config_file_precedence(tmp_path, mg_file):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"input": str(mg_file), "d": 4, "np": 2, "M": 250}))
    model = tmp_path / "m.json"
    assert main(["fit", "--config", str(cfg), "--np", "3", "--model", str(model)]) == 0
    data = json.loads(model.read_text())
    assert data["embedding"]["d"] == 4
    assert data["degree"] == 3
    assert data["n_train"] == 250


def test_config_file_unknown_key(tmp_path, mg_file, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"input": str(mg_file), "bogus": 1}))
    assert main(["fit", "--config", str(cfg), "--M", "100", "--model", str(tmp_path / "m.json")]) == 6
    assert "bogus" in capsys.readouterr().err
    with pytest.raises(ConfigError):
        resolve_config({"mode": "sideways"})


@pytest.mark.parametrize("argv,code", [
    (["fit", "--input", "nowhere.csv", "--M", "10", "--model", "m.json"], 3),
    (["fit", "--input", "SIG", "--d", "5", "--M", "5000", "--model", "m.json"], 4),
    (["predict", "--input", "SIG", "--model", "missing.json"], 3),
    (["fit", "--model", "m.json", "--M", "10"], 2),
    (["fit", "--input", "SIG", "--d", "zero", "--model", "m.json"], 2),
])
def test_exit_codes(tmp_path, mg_file, monkeypatch, argv, code):
    monkeypatch.chdir(tmp_path)
    argv = [str(mg_file) if a == "SIG" else a for a in argv]
    assert main(argv) == code


def test_unwritable_output_is_io_error(tmp_path, mg_file):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["fit", "--input", str(mg_file), "--d", "3", "--np", "1", "--M", "50",
                 "--model", str(blocker / "sub" / "m.json")]) == 7


@pytest.mark.parametrize("name,n,expected", [
    ("mit207-t1", 108_000, 107_996),
    ("mit207-t5", 108_000, 107_995),
    ("cu02-t1", 127_232, 127_228),
    ("cu02-t5", 127_232, 127_227),
])
def test_ecg_recipe_horizons(name, n, expected):
    r = RECIPES[name]
    assert horizon_bound(n, r.T, r.d) == expected
