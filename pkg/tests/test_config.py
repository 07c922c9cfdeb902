import pytest

from sharedctl.config import (
    ConfigError, load_population, load_scenario, save_population, scenario_from_dict,
)
from sharedctl.operator import default_population
from sharedctl.params import Mode


class TestScenarioConfig:
    def test_defaults(self):
        sc = scenario_from_dict({})
        assert sc.mode is Mode.SHARED
        assert sc.params.lam == 1.02
        assert sc.path.closed and sc.path.n_samples == 2048

    def test_flat_keys(self):
        sc = scenario_from_dict({
            "mode": "impedance", "B": 50.0, "lambda": 1.1, "w1": 0.7,
            "w2": 0.3, "imp.deadband": 0.004, "loops": 3, "plane_lock": "y",
        })
        assert sc.mode is Mode.IMPEDANCE
        assert sc.params.B == (50.0, 50.0, 50.0)
        assert sc.params.w == (0.7, 0.3)
        assert sc.imp.deadband == 0.004
        assert sc.lock_axis == 1

    def test_rejects_bad_lambda_with_field_name(self):
        with pytest.raises(ConfigError, match="lambda"):
            scenario_from_dict({"lambda": 0.9})

    def test_rejects_unknown_key(self):
        with pytest.raises(ConfigError, match="typo_key"):
            scenario_from_dict({"typo_key": 1})

    def test_rejects_bad_mode(self):
        with pytest.raises(ConfigError, match="mode"):
            scenario_from_dict({"mode": "autopilot"})

    def test_rejects_negative_weight(self):
        with pytest.raises(ConfigError, match="weights"):
            scenario_from_dict({"w1": -0.2})

    def test_rejects_bad_loop_split(self):
        with pytest.raises(ConfigError):
            scenario_from_dict({"loops": 1, "discard_loops": 2})

    def test_inline_circle_path(self):
        sc = scenario_from_dict({"path": "circle radius=0.03 samples=512"})
        assert sc.path.n_samples == 512

    def test_path_file(self, tmp_path):
        f = tmp_path / "p.path"
        f.write_text("circle radius=0.04 samples=256\n")
        sc = scenario_from_dict({"path": str(f)})
        assert sc.path.n_samples == 256

    def test_scenario_yaml(self, tmp_path):
        y = tmp_path / "s.yaml"
        y.write_text("mode: standalone\nlambda: 1.05\ntimeout_s: 30\n")
        sc = load_scenario(str(y))
        assert sc.mode is Mode.STANDALONE and sc.params.lam == 1.05
        assert sc.timeout == 30.0


class TestPopulationConfig:
    def test_round_trip(self, tmp_path):
        f = tmp_path / "pop.yaml"
        save_population(default_population(), str(f))
        assert load_population(str(f)) == default_population()

    def test_default_keyword(self):
        assert load_population("default") == default_population()

    def test_field_errors(self, tmp_path):
        f = tmp_path / "bad.yaml"
        f.write_text("profiles:\n  - skill: 2.0\n")
        with pytest.raises(ConfigError, match="profiles\\[0\\]"):
            load_population(str(f))

    def test_shipped_file_matches_generator(self):
        assert load_population("configs/population.yaml") == default_population()
