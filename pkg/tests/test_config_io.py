import json

import numpy as np
import pytest

from nhoqbm.config import (ConfigError, ScenarioConfig, config_hash, load_config,
                           parse_config, serialize_config)
from nhoqbm.environment import Regime
from nhoqbm.io import (FLOAT_FMT, read_csv, render, table_text, write_csv, write_manifest,
                       write_svg_plot)


class TestConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg.n_osc == 1 and cfg.solver.n_scaling == "com_reduced"
        m = cfg.spectral_model()
        assert (m.gamma, m.cutoff) == (0.05, 20.0)
        assert cfg.temperature_state().beta == 1.0

    def test_empty_text_is_defaults(self):
        assert parse_config("  ") == ScenarioConfig()

    @pytest.mark.parametrize("text,path", [
        ('{"n_osc": 0}', "n_osc"),
        ('{"temperature": {"beta": -1}}', "temperature.beta"),
        ('{"spectral": {"cutoff_shape": "gaussian"}}', "spectral.cutoff_shape"),
        ('{"solver": {"bogus": 1}}', "solver.bogus"),
        ('{"time": {"n_steps": 1}}', "time.n_steps"),
    ])
    def test_error_path(self, text, path):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.path == path
        assert str(info.value).startswith(path)

    @pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
    def test_malformed(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_cross_field_checks(self):
        with pytest.raises(ConfigError):
            parse_config('{"n_osc": 2, "potential": {"pattern": "dense", "matrix": [[0]]}}')
        with pytest.raises(ConfigError):
            parse_config('{"n_osc": 2, "initial_state": {"mean": [0, 0]}}')
        with pytest.raises(ConfigError):
            parse_config('{"spectral": {"kind": "discrete"}}')

    def test_round_trip_and_hash(self):
        cfg = parse_config('{"n_osc": 3, "potential": {"pattern": "chain", "kappa": 0.2}}')
        again = parse_config(serialize_config(cfg))
        assert again == cfg and config_hash(again) == config_hash(cfg)
        assert config_hash(cfg) != config_hash(ScenarioConfig())

    def test_builders(self):
        cfg = parse_config(json.dumps({
            "n_osc": 2, "potential": {"pattern": "all_pairs", "kappa": 0.5},
            "temperature": {"regime": "zero", "beta": None},
            "initial_state": {"kind": "thermal", "beta": 2.0},
            "spectral": {"kind": "discrete", "modes": [[0.1, 1.0, 1.5]]},
        }))
        assert cfg.temperature_state().regime is Regime.ZERO
        assert cfg.potential_model().kappa[0, 1] == 0.5
        assert cfg.initial_gaussian().cov[0, 0] == pytest.approx(0.5 / np.tanh(1.0))
        assert cfg.spectral_model().is_discrete

    def test_load_from_file(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text('{"n_osc": 4}')
        assert load_config(str(p)).n_osc == 4
        with pytest.raises(OSError):
            load_config(str(tmp_path / "missing.json"))


class TestOutput:
    def test_csv_round_trip_is_exact(self, tmp_path, rng):
        rows = rng.standard_normal((7, 3)) * 10.0 ** rng.integers(-300, 300, (7, 3))
        path = write_csv(tmp_path / "x.csv", ["a", "b", "c"], rows)
        header, back = read_csv(path)
        assert header == ["a", "b", "c"]
        np.testing.assert_array_equal(back, rows)
        assert FLOAT_FMT == "%.17g"

    def test_table(self):
        txt = table_text(["t", "value"], [[0.0, 1.5], [1.0, -2.25]])
        assert txt.splitlines()[0].split() == ["t", "value"]
        assert "-2.25" in txt

    def test_render_rejects_format(self):
        with pytest.raises(ValueError):
            render(["a"], [[1.0]], "xml")

    def test_manifest_is_deterministic(self, tmp_path):
        cfg = ScenarioConfig()
        first = (tmp_path / "a")
        second = (tmp_path / "b")
        for d in (first, second):
            d.mkdir()
            write_manifest(str(d), cfg, "kernels", [str(d / "kernels.csv")], {"n": np.int64(3)})
        a = (first / "manifest.json").read_text()
        assert a == (second / "manifest.json").read_text()
        m = json.loads(a)
        assert m["config_hash"] == config_hash(cfg) and m["n"] == 3
        assert m["files"] == ["kernels.csv"]

    def test_svg(self, tmp_path):
        p = write_svg_plot(tmp_path / "p.svg", np.linspace(0, 1, 5), {"y": np.arange(5.0)},
                           "demo")
        text = open(p).read()
        assert text.startswith("<svg") and "polyline" in text and "demo" in text
