"""Tests for config-file loading: strict section/key validation, type
checking, defaults, and RunSpec construction with CLI-style overrides."""

import json
import math

import pytest

from advped.runconfig import (ConfigError, build_runspec, default_config,
                              load_config_file, validate_config)


class TestLoadConfigFile:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config_file(tmp_path / "nope.json")

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError, match="unreadable"):
            load_config_file(p)

    def test_round_trip(self, tmp_path):
        p = tmp_path / "ok.json"
        p.write_text(json.dumps({"run": {"episodes": 5, "agent":
                                         "rl_baseline"}}))
        doc = load_config_file(p)
        assert doc["run"]["episodes"] == 5
        assert doc["run"]["agent"] == "rl_baseline"
        # untouched sections come back as empty mappings
        assert doc["world"] == {} and doc["ddpg"] == {}


class TestValidateConfig:
    def test_root_must_be_object(self):
        with pytest.raises(ConfigError, match="root"):
            validate_config([1, 2])

    def test_unknown_section_named(self):
        with pytest.raises(ConfigError, match="training"):
            validate_config({"training": {}})

    def test_section_must_be_object(self):
        with pytest.raises(ConfigError, match="world"):
            validate_config({"world": 3})

    def test_unknown_run_key_named(self):
        with pytest.raises(ConfigError, match="episods"):
            validate_config({"run": {"episods": 10}})

    def test_type_checks(self):
        with pytest.raises(ConfigError, match="episodes"):
            validate_config({"run": {"episodes": "many"}})
        with pytest.raises(ConfigError, match="tie_is_away"):
            validate_config({"run": {"tie_is_away": 1}})
        # booleans are not acceptable integers
        with pytest.raises(ConfigError, match="seed"):
            validate_config({"run": {"seed": True}})

    def test_integral_float_accepted(self):
        doc = validate_config({"run": {"episodes": 10.0}})
        assert doc["run"]["episodes"] == 10
        with pytest.raises(ConfigError):
            validate_config({"run": {"episodes": 10.5}})

    def test_agent_and_orientation_constrained(self):
        with pytest.raises(ConfigError, match="agent"):
            validate_config({"run": {"agent": "dqn"}})
        with pytest.raises(ConfigError, match="orientation"):
            validate_config({"run": {"orientation": "sideways"}})
        validate_config({"run": {"orientation": "table"}})

    def test_positive_counts(self):
        for key in ("episodes", "seeds", "checkpoint_interval", "recall_n",
                    "smooth_window"):
            with pytest.raises(ConfigError, match=key):
                validate_config({"run": {key: 0}})

    def test_defaults(self):
        doc = default_config()
        run = doc["run"]
        assert run["agent"] == "rl_momentum"
        assert run["episodes"] == 2000
        assert run["seed"] == 0
        assert run["seeds"] == 1
        assert run["orientation"] == "prose"
        assert run["tie_is_away"] is True
        assert run["recall_n"] == 100


class TestBuildRunspec:
    def test_defaults_build(self):
        spec, run = build_runspec(default_config())
        assert spec.agent == "rl_momentum"
        assert spec.episodes == 2000
        assert spec.world.dt == 0.05
        assert spec.ddpg.batch_size == 1000
        assert run["seeds"] == 1

    def test_sections_feed_dataclasses(self):
        doc = validate_config({
            "world": {"max_steps": 100, "veh_speed_init": 5.0},
            "ddpg": {"gamma": 0.8, "hidden_dims": [32, 16],
                     "noise_sigma_min": 0.2},
            "socialforce": {"k_v": 50.0},
            "run": {"episodes": 3},
        })
        spec, _ = build_runspec(doc)
        assert spec.world.max_steps == 100
        assert spec.world.veh_speed_init == 5.0
        assert spec.ddpg.gamma == 0.8
        assert spec.ddpg.hidden_dims == (32, 16)
        assert spec.ddpg.noise_sigma_min == 0.2
        assert spec.socialforce.k_v == 50.0
        assert spec.episodes == 3

    def test_overrides_win_and_none_skipped(self):
        spec, run = build_runspec(default_config(), episodes=7, seed=None,
                                  agent="rl_baseline")
        assert spec.episodes == 7
        assert spec.seed == 0
        assert spec.agent == "rl_baseline"
        assert run["episodes"] == 7

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigError, match="override"):
            build_runspec(default_config(), learning_rate=0.1)

    def test_unknown_section_key_becomes_config_error(self):
        doc = validate_config({"ddpg": {}})
        doc["ddpg"]["learning_rate"] = 0.1  # bypass to hit from_dict
        with pytest.raises(ConfigError, match="learning_rate"):
            build_runspec(doc)

    def test_bad_section_value_becomes_config_error(self):
        doc = validate_config({"world": {"dt": -1.0}})
        with pytest.raises(ConfigError, match="dt"):
            build_runspec(doc)
        doc = validate_config({"ddpg": {"gamma": 2.0}})
        with pytest.raises(ConfigError, match="gamma"):
            build_runspec(doc)

    def test_seeds_override_validated(self):
        with pytest.raises(ConfigError, match="seeds"):
            build_runspec(default_config(), seeds=0)

    def test_out_becomes_path(self):
        spec, _ = build_runspec(default_config(), out="somewhere/else")
        assert str(spec.out_dir) == "somewhere/else"
