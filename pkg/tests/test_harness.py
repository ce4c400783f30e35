import json

import numpy as np
import pytest

from tracelab.errors import ConfigError
from tracelab.harness import CACHE_ENV_VAR, ExperimentConfig, parse_lambda_grid, run
from tracelab import cli


def test_parse_lambda_grid_linear():
    g = parse_lambda_grid("100:200:5")
    assert np.allclose(g, [100, 125, 150, 175, 200])


def test_parse_lambda_grid_geometric():
    g = parse_lambda_grid("10:1000:3:geometric")
    assert np.allclose(g, [10, 100, 1000])


def test_parse_lambda_grid_errors():
    with pytest.raises(ConfigError):
        parse_lambda_grid("1:2")
    with pytest.raises(ConfigError):
        parse_lambda_grid("1:2:3:cubic")
    with pytest.raises(ConfigError):
        parse_lambda_grid("a:2:3")
    with pytest.raises(ConfigError):
        parse_lambda_grid("-1:10:4:geometric")


def _base_config(**over):
    d = {
        "kind": "trace",
        "model": {"weights": [1, 2]},
        "k_max": 40,
        "window": {"shape": "gaussian", "tau0": 0.0, "eps": 0.15},
        "lambda_grid": [10.0, 15.0, 20.0],
    }
    d.update(over)
    return d


def test_config_missing_field_names_path():
    with pytest.raises(ConfigError, match="config.model.weights"):
        ExperimentConfig.from_dict({"kind": "trace", "model": {}, "k_max": 10})


def test_config_bad_kind():
    with pytest.raises(ConfigError, match="kind"):
        ExperimentConfig.from_dict(_base_config(kind="scan"))


def test_config_dim_consistency():
    cfg = _base_config()
    cfg["model"]["dim"] = 2
    with pytest.raises(ConfigError, match="config.model.dim"):
        ExperimentConfig.from_dict(cfg)


def test_config_tolerance_positive():
    with pytest.raises(ConfigError, match="tail_tol"):
        ExperimentConfig.from_dict(_base_config(tail_tol=-1.0))


def test_config_grid_monotone():
    with pytest.raises(ConfigError, match="lambda_grid"):
        ExperimentConfig.from_dict(_base_config(lambda_grid=[10.0, 9.0]))


def test_window_width_guard():
    # period gap of w=(1,2) is pi; a bump of half-width 2 cannot fit
    cfg = _base_config(window={"shape": "bump", "tau0": 0.0, "eps": 2.0})
    with pytest.raises(ConfigError, match="period gap"):
        ExperimentConfig.from_dict(cfg)
    # gaussian guard uses four standard deviations
    cfg = _base_config(window={"shape": "gaussian", "tau0": 0.0, "eps": 0.5})
    with pytest.raises(ConfigError, match="period gap"):
        ExperimentConfig.from_dict(cfg)


def test_spectrum_run_deterministic(tmp_path, monkeypatch):
    monkeypatch.delenv(CACHE_ENV_VAR, raising=False)
    cfg = ExperimentConfig.from_dict(
        {
            "kind": "spectrum",
            "model": {"weights": [1, 2]},
            "k_max": 25,
            "cache_dir": str(tmp_path / "cache"),
            "out_dir": str(tmp_path / "a"),
        }
    )
    res1 = run(cfg)
    cfg2 = ExperimentConfig.from_dict(
        {
            "kind": "spectrum",
            "model": {"weights": [1, 2]},
            "k_max": 25,
            "cache_dir": str(tmp_path / "cache"),
            "out_dir": str(tmp_path / "b"),
        }
    )
    res2 = run(cfg2)
    a = (tmp_path / "a" / "spectrum.csv").read_bytes()
    b = (tmp_path / "b" / "spectrum.csv").read_bytes()
    assert a == b
    assert res1.exit_code == 0
    assert res2.manifest["package"]["provenance"] == "cache"


def test_corrupt_cache_is_rebuilt(tmp_path, monkeypatch):
    monkeypatch.delenv(CACHE_ENV_VAR, raising=False)
    base = {
        "kind": "spectrum",
        "model": {"weights": [1, 2]},
        "k_max": 12,
        "cache_dir": str(tmp_path / "cache"),
        "out_dir": str(tmp_path / "a"),
    }
    run(ExperimentConfig.from_dict(base))
    cache_file = next((tmp_path / "cache").glob("*.npz"))
    blob = bytearray(cache_file.read_bytes())
    blob[len(blob) // 3] ^= 0xFF
    cache_file.write_bytes(bytes(blob))
    res = run(ExperimentConfig.from_dict(dict(base, out_dir=str(tmp_path / "b"))))
    assert res.manifest["package"]["provenance"] == "rebuilt"
    a = (tmp_path / "a" / "spectrum.csv").read_bytes()
    b = (tmp_path / "b" / "spectrum.csv").read_bytes()
    assert a == b


def test_cache_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV_VAR, str(tmp_path / "envcache"))
    cfg = ExperimentConfig.from_dict(
        {
            "kind": "spectrum",
            "model": {"weights": [1, 2]},
            "k_max": 8,
            "cache_dir": str(tmp_path / "ignored"),
            "out_dir": str(tmp_path / "out"),
        }
    )
    run(cfg)
    assert list((tmp_path / "envcache").glob("*.npz"))
    assert not (tmp_path / "ignored").exists()


def test_trace_run_manifest(tmp_path):
    cfg = ExperimentConfig.from_dict(
        {
            "kind": "trace",
            "model": {"weights": [1, 2]},
            "k_max": 130,
            "window": {"shape": "gaussian", "tau0": 0.0, "eps": 0.15},
            "lambda_grid": "30:60:4",
            "out_dir": str(tmp_path),
        }
    )
    res = run(cfg)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config_sha256"] == cfg.digest()
    assert "trace.csv" in res.artifacts
    rows = (tmp_path / "trace.csv").read_text().splitlines()
    assert rows[0] == "grid,exact_re,exact_im,pred_re,pred_im,ratio_abs,ratio_arg"
    assert len(rows) == 5


def test_cli_config_error_exit_code(tmp_path, capsys):
    code = cli.main(["trace", "--weights", "1,2", "--kmax", "10"])
    assert code == 2  # no window given for a trace run
    assert "config error" in capsys.readouterr().err


def test_cli_spectrum_smoke(tmp_path):
    code = cli.main(
        [
            "spectrum",
            "--weights",
            "1,2",
            "--kmax",
            "10",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    assert (tmp_path / "spectrum.csv").exists()


def test_cli_flag_overrides_config_file(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(
        json.dumps(
            {
                "kind": "spectrum",
                "model": {"weights": [1, 2]},
                "k_max": 6,
                "out_dir": str(tmp_path / "x"),
            }
        )
    )
    code = cli.main(
        ["spectrum", "--config", str(cfg_path), "--kmax", "9", "--out", str(tmp_path / "y")]
    )
    assert code == 0
    data = (tmp_path / "y" / "spectrum.csv").read_text().splitlines()
    # k_max 9 covers eigenvalues up to 2*9 = 18 -> 19 distinct values
    assert len(data) - 1 == 19
