"""
Resolved run settings shared by the CLI and the command handlers.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Tuple

from src.constants import (
    ABLATION_MODES,
    ABLATION_PPFT,
    COMMANDS,
    DEFAULT_CLIP_NORM,
    DEFAULT_DROPOUT_P,
    DEFAULT_LEARNING_RATE,
    DEFAULT_LOG_EVERY,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_RESOLUTION,
    DEFAULT_SCENES,
    DEFAULT_SEED,
    DEFAULT_STAGE_WIDTHS,
    DEFAULT_STEPS,
    DEFAULT_THRESHOLD_BASE,
    DEGRADATION_MODES,
    EVAL_SOURCES,
)
from src.errors import ConfigError
from src.model.config import ModelConfig

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


def parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigError(f"expected a boolean, got '{text}'")


def parse_list(text: str) -> Tuple[str, ...]:
    return tuple(item.strip() for item in text.split(",") if item.strip())


def parse_widths(channels: str, stages: Optional[int]) -> Tuple[int, ...]:
    """
    Stage widths from ``--channels``.

    A single value is the first-stage width, doubled at every later stage;
    a comma list gives every width explicitly.
    """
    try:
        values = [int(v) for v in parse_list(channels)]
    except ValueError:
        raise ConfigError(f"channels must be integers, got '{channels}'")
    if not values:
        raise ConfigError("channels must not be empty")
    if len(values) == 1:
        count = len(DEFAULT_STAGE_WIDTHS) if stages is None else stages
        if count < 1:
            raise ConfigError(f"stages must be >= 1, got {count}")
        return tuple(values[0] * 2**i for i in range(count))
    if stages is not None and stages != len(values):
        raise ConfigError(f"{len(values)} channel widths given for {stages} stages")
    return tuple(values)


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one invocation."""

    command: str
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    data: Optional[str] = None
    input: Optional[str] = None
    intrinsics: Optional[str] = None
    checkpoint: Optional[str] = None
    foundation: Optional[str] = None
    ablation: str = ABLATION_PPFT
    stages: Optional[int] = None
    channels: str = str(DEFAULT_STAGE_WIDTHS[0])
    steps: int = DEFAULT_STEPS
    lr: float = DEFAULT_LEARNING_RATE
    clip_norm: float = DEFAULT_CLIP_NORM
    dropout: float = DEFAULT_DROPOUT_P
    freeze: str = ""
    log_every: int = DEFAULT_LOG_EVERY
    degradation: str = ",".join(DEGRADATION_MODES)
    scenes: int = DEFAULT_SCENES
    resolution: int = DEFAULT_RESOLUTION
    noise: float = DEFAULT_NOISE_SIGMA
    threshold_base: float = DEFAULT_THRESHOLD_BASE
    source: str = EVAL_SOURCES[0]
    error_maps: bool = False
    index: int = 0
    runs: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'")
        if self.ablation not in ABLATION_MODES:
            raise ConfigError(
                f"ablation must be one of {', '.join(ABLATION_MODES)}, "
                f"got '{self.ablation}'"
            )
        for mode in self.degradations:
            if mode not in DEGRADATION_MODES:
                raise ConfigError(f"unknown degradation mode '{mode}'")
        if self.source not in EVAL_SOURCES:
            raise ConfigError(f"source must be one of {', '.join(EVAL_SOURCES)}")
        if self.steps < 0 or self.scenes < 1 or self.resolution < 1:
            raise ConfigError("steps must be >= 0, scenes and resolution >= 1")
        if self.lr < 0 or self.clip_norm <= 0:
            raise ConfigError("lr must be >= 0 and clip_norm > 0")
        if self.threshold_base <= 1:
            raise ConfigError("threshold base must exceed 1")
        parse_widths(self.channels, self.stages)

    @property
    def widths(self) -> Tuple[int, ...]:
        return parse_widths(self.channels, self.stages)

    @property
    def degradations(self) -> Tuple[str, ...]:
        return parse_list(self.degradation)

    @property
    def freeze_prefixes(self) -> Tuple[str, ...]:
        return parse_list(self.freeze)

    def model_config(self) -> ModelConfig:
        """Network configuration for this run's ablation mode."""
        return ModelConfig.for_ablation(
            self.ablation,
            widths=self.widths,
            dropout_p=self.dropout,
            freeze_prefixes=self.freeze_prefixes,
        )

    def to_dict(self) -> Dict[str, object]:
        """Settings that a config file could set, unset ones left out.

        Written as ``effective_config.txt``, the result is a valid
        ``--config`` file reproducing the run.
        """
        values = asdict(self)
        return {k: values[k] for k in CONFIG_KEYS if values[k] is not None}


# keys a config file may set, with their parsers
CONFIG_KEYS = {
    "seed": int,
    "out": str,
    "data": str,
    "input": str,
    "intrinsics": str,
    "checkpoint": str,
    "foundation": str,
    "ablation": str,
    "stages": int,
    "channels": str,
    "steps": int,
    "lr": float,
    "clip_norm": float,
    "dropout": float,
    "freeze": str,
    "log_every": int,
    "degradation": str,
    "scenes": int,
    "resolution": int,
    "noise": float,
    "threshold_base": float,
    "source": str,
    "error_maps": parse_bool,
    "index": int,
}


