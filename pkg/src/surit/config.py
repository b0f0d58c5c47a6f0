"""Runtime settings and experiment configuration."""

import configparser
from enum import StrEnum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from surit.errors import InvalidConfigError, MissingFileError


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(env_file=".env", env_prefix="SURIT_", extra="ignore")

    # Application
    app_env: str = "development"

    # Logging
    log_level: str = "INFO"
    log_dir: Path = Path("logs")
    log_to_file: bool = True

    # Outputs
    output_root: Path = Path("runs")


settings = Settings()


class TrainingMode(StrEnum):
    JOINT = "joint"
    STEPWISE = "stepwise"


class Assignment(StrEnum):
    HEAT = "heat"
    PIT = "pit"


class SweepRegime(StrEnum):
    FROZEN = "frozen"
    JOINT = "joint"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DataConfig(_Section):
    """Synthetic corpus parameters."""

    vocab_size: int = Field(16, ge=2)
    feat_dim: int = Field(8, ge=1)
    frames_per_token: int = Field(3, ge=1)
    min_tokens: int = Field(4, ge=1)
    max_tokens: int = Field(10, ge=1)
    pool_size: int = Field(40, ge=2)
    n_train: int = Field(2000, ge=1)
    n_eval: int = Field(200, ge=1)
    k_min: int = Field(2, ge=2)
    k_max: int = Field(8, ge=2)
    k_eval: int = Field(8, ge=2)
    min_delay_frames: int = Field(5, ge=0)
    noise_std: float = Field(0.1, ge=0.0)
    voice_scale: float = Field(1.0, gt=0.0)
    profile_dim: int = Field(16, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self) -> "DataConfig":
        if self.min_tokens > self.max_tokens:
            raise ValueError("min_tokens must not exceed max_tokens")
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        if max(self.k_max, self.k_eval) > self.pool_size:
            raise ValueError("inventory size exceeds the speaker pool")
        return self


class ModelConfig(_Section):
    """Network sizes. Every layer width must be positive."""

    splice_context: int = Field(3, ge=1)
    unmix_channels: int = Field(32, ge=1)
    unmix_dim: int = Field(32, ge=1)
    kernel_size: int = Field(3, ge=1)
    asr_hidden: int = Field(64, ge=1)
    asr_layers: int = Field(2, ge=1)
    time_reduction: bool = False
    label_embed_dim: int = Field(32, ge=1)
    label_hidden: int = Field(64, ge=1)
    joint_dim: int = Field(64, ge=1)
    sid_hidden: int = Field(32, ge=1)
    sid_label_embed_dim: int = Field(16, ge=1)
    sid_joint_dim: int = Field(32, ge=1)

    @model_validator(mode="after")
    def _check_reduction(self) -> "ModelConfig":
        if self.time_reduction and self.asr_layers < 2:
            raise ValueError("time_reduction sits between encoder layers; asr_layers must be >= 2")
        return self


class TrainingConfig(_Section):
    """Optimisation settings."""

    mode: TrainingMode = TrainingMode.JOINT
    lambda_sid: float = Field(10.0, ge=0.0)
    lr: float = Field(2e-3, ge=0.0)
    epochs: int = Field(8, ge=0)
    sid_epochs: int = Field(4, ge=0)
    batch_size: int = Field(8, ge=1)
    clip_norm: float = Field(5.0, gt=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)
    penalty_in_training: bool = True


class LatencySection(_Section):
    """Latency shaping applied to the SID objective."""

    alpha: float = Field(1.0, gt=0.0, le=1.0)
    beta: float = Field(0.0, ge=0.0)
    t_buffer: int = Field(3, ge=0)
    scale_asr_blank: bool = False


class LossConfig(_Section):
    assignment: Assignment = Assignment.HEAT


class SweepConfig(_Section):
    """Latency sweep fine-tuning settings."""

    regime: SweepRegime = SweepRegime.FROZEN
    epochs: int = Field(3, ge=0)


class ExperimentConfig(_Section):
    """Complete experiment description. Unknown keys are rejected."""

    seed: int = Field(0, ge=0)
    data: DataConfig = DataConfig()
    model: ModelConfig = ModelConfig()
    training: TrainingConfig = TrainingConfig()
    latency: LatencySection = LatencySection()
    loss: LossConfig = LossConfig()
    sweep: SweepConfig = SweepConfig()

    @classmethod
    def tiny(cls, seed: int = 0) -> "ExperimentConfig":
        """Smallest accepted sizes; used by the full-model gradient oracle."""
        return cls(
            seed=seed,
            data=DataConfig(
                vocab_size=3,
                feat_dim=2,
                frames_per_token=3,
                min_tokens=1,
                max_tokens=2,
                pool_size=4,
                n_train=4,
                n_eval=2,
                k_min=2,
                k_max=3,
                k_eval=3,
                min_delay_frames=1,
                profile_dim=3,
            ),
            model=ModelConfig(
                splice_context=3,
                unmix_channels=3,
                unmix_dim=3,
                kernel_size=2,
                asr_hidden=3,
                asr_layers=2,
                label_embed_dim=2,
                label_hidden=3,
                joint_dim=3,
                sid_hidden=3,
                sid_label_embed_dim=2,
                sid_joint_dim=3,
            ),
            training=TrainingConfig(epochs=1, sid_epochs=1, batch_size=2),
        )

    def with_overrides(self, overrides: dict[str, Any]) -> "ExperimentConfig":
        """Return a copy with dotted-key overrides applied (``training.lr``)."""
        tree = self.model_dump(mode="json")
        for dotted, value in overrides.items():
            _assign(tree, dotted, value)
        return parse_config_tree(tree)


def _assign(tree: dict[str, Any], dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    if parts[0] == "experiment":
        parts = parts[1:]
    if not parts or not all(parts):
        raise InvalidConfigError(f"malformed config key: {dotted!r}")
    node = tree
    for part in parts[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            raise InvalidConfigError(f"unknown config section: {dotted!r}")
        node = child
    node[parts[-1]] = value


def parse_config_tree(tree: dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(tree)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        raise InvalidConfigError(f"invalid configuration: {problems}") from exc


def parse_overrides(pairs: list[str]) -> dict[str, str]:
    """Parse ``section.key=value`` strings from the command line."""
    overrides: dict[str, str] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise InvalidConfigError(f"override must look like section.key=value, got {pair!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def load_config(path: Path | None = None, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Read a ``[section]`` / ``key = value`` file, then apply overrides."""
    tree: dict[str, Any] = {}
    if path is not None:
        if not path.exists():
            raise MissingFileError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # keep key case
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise InvalidConfigError(f"malformed config file {path}: {exc}") from exc
        for section in parser.sections():
            values = dict(parser.items(section))
            if section == "experiment":
                tree.update(values)
            else:
                tree[section] = values
    config = parse_config_tree(tree)
    if overrides:
        config = config.with_overrides(overrides)
    return config


def dump_config(config: ExperimentConfig) -> str:
    """Render a config in the same format ``load_config`` reads."""
    tree = config.model_dump(mode="json")
    lines = ["[experiment]", f"seed = {tree.pop('seed')}"]
    for section, values in tree.items():
        lines.append("")
        lines.append(f"[{section}]")
        for key, value in values.items():
            lines.append(f"{key} = {str(value).lower() if isinstance(value, bool) else value}")
    return "\n".join(lines) + "\n"
