import json
import math

import pytest

from catport.catport_error import ConfigError
from catport.sweep_config import SweepConfig


class TestSweepConfig:
    def test_default_grid(self):
        config = SweepConfig().validate()
        assert config.alpha_sq_grid[0] == 0.5 and config.alpha_sq_grid[-1] == 30.0
        assert len(config.alpha_sq_grid) == 60
        assert config.theta_grid[-1] == pytest.approx(math.pi)
        assert config.phi_grid == [0.0, math.pi / 2.0]
        assert len(config.grid()) == 60 * 9 * 2

    def test_json_round_trip(self):
        config = SweepConfig(alpha_sq_grid=[1.0, 2.5], theta_grid=[0.3], phi_grid=[0.0, 1.1], truncation_tail=1e-10, format="json", workers=3)
        assert SweepConfig.from_json(config.to_json()) == config

    @pytest.mark.parametrize(
        "overrides",
        [
            {"alpha_sq_grid": []},
            {"alpha_sq_grid": [0.0, 1.0]},
            {"alpha_sq_grid": [1e-3, 1.0]},
            {"theta_grid": [float("nan")]},
            {"truncation_tail": 1e-3},
            {"truncation_tail": 0.0},
            {"format": "xlsx"},
            {"workers": 0},
        ],
    )
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            SweepConfig(**overrides).validate()

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            SweepConfig.from_dict({"alpha_sq": [1.0]})

    def test_malformed_values(self):
        with pytest.raises(ConfigError):
            SweepConfig.from_dict({"alpha_sq_grid": ["ten"]})

    def test_not_an_object(self):
        with pytest.raises(ConfigError):
            SweepConfig.from_json("[1, 2]")

    def test_load_fills_missing_keys_from_defaults(self, tmp_path):
        path = tmp_path / "grid.json"
        path.write_text(json.dumps({"alpha_sq_grid": [4.0], "theta_grid": [1.0]}))
        config = SweepConfig.load(str(path), {"outputs": "elsewhere", "truncation_tail": 1e-11})
        assert config.alpha_sq_grid == [4.0]
        assert config.outputs == "elsewhere"
        assert config.truncation_tail == 1e-11
        assert config.phi_grid == [0.0, math.pi / 2.0]

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            SweepConfig.load(str(tmp_path / "absent.json"))

    def test_overrides_skip_none(self):
        config = SweepConfig().with_overrides(alpha_sq_grid=[3.0], outputs=None)
        assert config.alpha_sq_grid == [3.0]
        assert config.outputs == "out"
