"""Unit tests for settings and experiment configuration."""

import pytest

from surit.config import (
    Assignment,
    DataConfig,
    ExperimentConfig,
    ModelConfig,
    Settings,
    SweepRegime,
    TrainingMode,
    dump_config,
    load_config,
    parse_overrides,
)
from surit.errors import InvalidConfigError, MissingFileError


@pytest.mark.unit
class TestSettings:
    """Test environment-driven settings."""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("SURIT_LOG_LEVEL", raising=False)
        settings = Settings(_env_file=None)
        assert settings.log_level == "INFO"
        assert settings.output_root.name == "runs"

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("SURIT_LOG_LEVEL", "WARNING")
        monkeypatch.setenv("SURIT_LOG_TO_FILE", "false")
        settings = Settings(_env_file=None)
        assert settings.log_level == "WARNING"
        assert settings.log_to_file is False


@pytest.mark.unit
class TestExperimentConfig:
    """Test defaults and validation."""

    def test_defaults(self):
        config = ExperimentConfig()
        assert config.training.mode is TrainingMode.JOINT
        assert config.training.lambda_sid == 10.0
        assert config.loss.assignment is Assignment.HEAT
        assert config.latency.alpha == 1.0
        assert config.latency.beta == 0.0
        assert config.sweep.regime is SweepRegime.FROZEN

    def test_unknown_key_rejected(self):
        with pytest.raises(InvalidConfigError):
            ExperimentConfig().with_overrides({"training.learning_rate": 0.1})

    def test_unknown_section_rejected(self):
        with pytest.raises(InvalidConfigError):
            ExperimentConfig().with_overrides({"optimizer.lr": 0.1})

    def test_experiment_prefix_accepted(self):
        assert ExperimentConfig().with_overrides({"experiment.seed": 4}).seed == 4

    @pytest.mark.parametrize(
        "key,value",
        [
            ("latency.alpha", 0.0),
            ("latency.alpha", 1.5),
            ("latency.beta", -1.0),
            ("training.lambda_sid", -0.5),
            ("data.vocab_size", 1),
            ("model.asr_hidden", 0),
        ],
    )
    def test_out_of_range(self, key, value):
        with pytest.raises(InvalidConfigError):
            ExperimentConfig().with_overrides({key: value})

    def test_cross_field_rules(self):
        with pytest.raises(ValueError):
            DataConfig(min_tokens=5, max_tokens=4)
        with pytest.raises(ValueError):
            DataConfig(k_min=5, k_max=4)
        with pytest.raises(ValueError):
            DataConfig(pool_size=4, k_eval=8, k_max=4)
        with pytest.raises(ValueError):
            ModelConfig(time_reduction=True, asr_layers=1)

    def test_overrides_return_copy(self):
        base = ExperimentConfig()
        changed = base.with_overrides({"training.lr": "0.01"})
        assert changed.training.lr == 0.01
        assert base.training.lr == 2e-3


@pytest.mark.unit
class TestConfigFiles:
    """Test the INI-style file format."""

    def test_round_trip(self, tmp_path, tiny_config):
        config = tiny_config.with_overrides({"model.time_reduction": True, "training.mode": "stepwise"})
        path = tmp_path / "experiment.ini"
        path.write_text(dump_config(config))
        assert load_config(path) == config

    def test_partial_file(self, tmp_path):
        path = tmp_path / "partial.ini"
        path.write_text("[experiment]\nseed = 9\n\n[latency]\nbeta = 2.5\n")
        config = load_config(path)
        assert config.seed == 9
        assert config.latency.beta == 2.5
        assert config.latency.alpha == 1.0

    def test_overrides_win_over_file(self, tmp_path):
        path = tmp_path / "experiment.ini"
        path.write_text("[training]\nepochs = 2\n")
        assert load_config(path, {"training.epochs": "5"}).training.epochs == 5

    def test_no_file_gives_defaults(self):
        assert load_config() == ExperimentConfig()

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_config(tmp_path / "absent.ini")

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "broken.ini"
        path.write_text("seed = 1\n")
        with pytest.raises(InvalidConfigError):
            load_config(path)

    def test_unknown_key_in_file(self, tmp_path):
        path = tmp_path / "typo.ini"
        path.write_text("[latency]\nbeta_value = 1\n")
        with pytest.raises(InvalidConfigError):
            load_config(path)


@pytest.mark.unit
class TestParseOverrides:
    """Test command-line override parsing."""

    def test_pairs(self):
        assert parse_overrides(["latency.beta=1", " seed = 3 "]) == {"latency.beta": "1", "seed": "3"}

    def test_value_may_contain_equals(self):
        assert parse_overrides(["a.b=x=y"]) == {"a.b": "x=y"}

    @pytest.mark.parametrize("pair", ["latency.beta", "=3"])
    def test_malformed(self, pair):
        with pytest.raises(InvalidConfigError):
            parse_overrides([pair])
