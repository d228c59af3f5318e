import json

import pytest

from touchcap.config import ConfigError, load_config, parse_config
from touchcap.servo import ServoMap, servo_angle


class TestLoadConfig:
    def test_bundled_default(self, config):
        assert "default" in config.profiles
        assert "fem_scaled" in config.profiles
        geom = config.geometry("default")
        assert geom.radius == 0.01
        assert geom.laminate.total_thickness == pytest.approx(25.2e-6)

    def test_unknown_profile(self, config):
        with pytest.raises(ConfigError, match="unknown profile"):
            config.geometry("nope")

    def test_file_round_trip(self, tmp_path, config):
        from importlib import resources
        text = resources.files("touchcap.data").joinpath(
            "default_device.json").read_text()
        path = tmp_path / "cfg.json"
        path.write_text(text)
        loaded = load_config(path)
        assert loaded.geometry("default") == config.geometry("default")
        assert loaded.servo == config.servo

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(path)


class TestParseConfig:
    def minimal(self):
        return {
            "profiles": {
                "default": {
                    "radius_m": 0.01,
                    "gap_m": 4e-4,
                    "layers": [{"name": "PI", "youngs_modulus_pa": 2.5e9,
                                "poisson_ratio": 0.34, "thickness_m": 25e-6}],
                }
            }
        }

    def test_minimal_parses_with_defaults(self):
        cfg = parse_config(self.minimal())
        assert cfg.thresholds.touch_onset_fraction == 0.05
        assert cfg.servo.p_max == 40e3
        assert cfg.solver.grid_nodes == 201

    def test_missing_profiles(self):
        with pytest.raises(ConfigError, match="profiles"):
            parse_config({})

    def test_missing_default_profile(self):
        doc = self.minimal()
        doc["profiles"] = {"other": doc["profiles"]["default"]}
        with pytest.raises(ConfigError, match="default"):
            parse_config(doc)

    def test_missing_field_named(self):
        doc = self.minimal()
        del doc["profiles"]["default"]["gap_m"]
        with pytest.raises(ConfigError, match="gap_m"):
            parse_config(doc)

    def test_bad_layer_rejected(self):
        doc = self.minimal()
        doc["profiles"]["default"]["layers"][0]["poisson_ratio"] = 0.7
        with pytest.raises(ConfigError, match="poisson"):
            parse_config(doc)

    def test_bad_solver_settings(self):
        doc = self.minimal()
        doc["solver"] = {"grid_nodes": 4}
        with pytest.raises(ConfigError, match="grid_nodes"):
            parse_config(doc)


class TestServoMap:
    def test_endpoints_exact(self, config):
        assert servo_angle(config.servo, 10e3) == 0.0
        assert servo_angle(config.servo, 40e3) == 90.0

    def test_midpoint_exact(self, config):
        assert servo_angle(config.servo, 25e3) == 45.0

    def test_clamping(self, config):
        assert servo_angle(config.servo, 5e3) == 0.0
        assert servo_angle(config.servo, 60e3) == 90.0

    def test_monotone_and_idempotent(self, config):
        pressures = [0.0, 5e3, 10e3, 17e3, 25e3, 40e3, 55e3]
        angles = [servo_angle(config.servo, p) for p in pressures]
        assert all(b >= a for a, b in zip(angles, angles[1:]))
        # Pre-clamped inputs map to the same angle again.
        for p in (10e3, 25e3, 40e3):
            assert servo_angle(config.servo, p) == servo_angle(
                config.servo, min(max(p, 10e3), 40e3))

    def test_rejects_bad_ranges(self):
        with pytest.raises(ValueError):
            ServoMap(p_min=2.0, p_max=1.0, angle_min=0.0, angle_max=90.0)
        with pytest.raises(ValueError):
            ServoMap(p_min=1.0, p_max=2.0, angle_min=90.0, angle_max=0.0)
