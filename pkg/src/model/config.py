from dataclasses import dataclass
from typing import Optional, Tuple

from src.constants import (
    ABLATION_EARLY,
    ABLATION_MODES,
    ABLATION_NO_PPFT,
    ABLATION_PPFT,
    ABLATION_RGB,
    ABLATION_SHALLOW,
    DEFAULT_D_MAX_MM,
    DEFAULT_D_MIN_MM,
    DEFAULT_DEPTH_SCALE_MM,
    DEFAULT_DROPOUT_P,
    DEFAULT_HEAD_BIAS,
    DEFAULT_LAMBDA_INIT,
    DEFAULT_STAGE_WIDTHS,
    GUIDANCE_CHANNELS,
    INPUT_MODE_CONCAT,
    INPUT_MODE_PROMPT,
    OUTPUT_ABSOLUTE,
    OUTPUT_RESIDUAL,
)
from src.errors import ConfigError

GUIDANCE_POLARIZATION = "polarization"
GUIDANCE_INTENSITY_ONLY = "intensity"
GUIDANCE_SOURCES = (GUIDANCE_POLARIZATION, GUIDANCE_INTENSITY_ONLY)


@dataclass(frozen=True)
class ModelConfig:
    """
    Architecture and training-policy knobs of the enhancement network.

    Attributes
    ----------
    widths : Tuple[int, ...]
        Channel width of each encoder stage, strictly increasing.
    ppfb_stages : int, optional
        How many leading stages carry a PPFB (``None`` = all of them).
    input_mode : str
        ``prompt`` (three stem encoders, guidance embedding as prompt) or
        ``concat`` (single stem over the 7-channel concatenation).
    guidance_source : str
        ``polarization`` or ``intensity`` (AoLP/DoLP replaced by intensity).
    output_mode : str
        ``residual`` (head output added to the hole-filled sensor depth) or
        ``absolute`` (head output is the depth itself).
    freeze_prefixes : Tuple[str, ...]
        Parameter name prefixes kept fixed during training.
    """

    widths: Tuple[int, ...] = DEFAULT_STAGE_WIDTHS
    ppfb_stages: Optional[int] = None
    guidance_channels: int = GUIDANCE_CHANNELS
    input_mode: str = INPUT_MODE_PROMPT
    guidance_source: str = GUIDANCE_POLARIZATION
    output_mode: str = OUTPUT_RESIDUAL
    dropout_p: float = DEFAULT_DROPOUT_P
    lambda_init: float = DEFAULT_LAMBDA_INIT
    d_min: float = DEFAULT_D_MIN_MM
    d_max: float = DEFAULT_D_MAX_MM
    depth_scale: float = DEFAULT_DEPTH_SCALE_MM
    head_bias: float = DEFAULT_HEAD_BIAS
    freeze_prefixes: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.widths) < 1:
            raise ConfigError("at least one encoder stage is required")
        if any(w < 1 for w in self.widths):
            raise ConfigError(f"stage widths must be positive: {self.widths}")
        if any(b <= a for a, b in zip(self.widths, self.widths[1:])):
            raise ConfigError(f"stage widths must strictly increase: {self.widths}")
        if self.guidance_channels != GUIDANCE_CHANNELS:
            raise ConfigError(f"guidance must have {GUIDANCE_CHANNELS} channels")
        if not 0 <= self.n_ppfb <= self.stages:
            raise ConfigError(f"ppfb_stages must be within [0, {self.stages}]")
        if self.input_mode not in (INPUT_MODE_PROMPT, INPUT_MODE_CONCAT):
            raise ConfigError(f"unknown input mode '{self.input_mode}'")
        if self.input_mode == INPUT_MODE_CONCAT and self.n_ppfb:
            raise ConfigError("concat input has no prompt; ppfb_stages must be 0")
        if self.guidance_source not in GUIDANCE_SOURCES:
            raise ConfigError(f"unknown guidance source '{self.guidance_source}'")
        if self.output_mode not in (OUTPUT_RESIDUAL, OUTPUT_ABSOLUTE):
            raise ConfigError(f"unknown output mode '{self.output_mode}'")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if not self.lambda_init > 0:
            raise ConfigError("lambda init must be positive")
        if not 0 < self.d_min < self.d_max:
            raise ConfigError("depth clamp needs 0 < d_min < d_max")
        if not self.depth_scale > 0:
            raise ConfigError("depth scale must be positive")

    @property
    def stages(self) -> int:
        return len(self.widths)

    @property
    def n_ppfb(self) -> int:
        return self.stages if self.ppfb_stages is None else self.ppfb_stages

    @property
    def downsampling(self) -> int:
        """Spatial reduction between the input and the deepest stage."""
        return 2**self.stages

    @classmethod
    def for_ablation(cls, mode: str, **overrides) -> "ModelConfig":
        """Configuration reproducing one row of the ablation study."""
        if mode not in ABLATION_MODES:
            raise ConfigError(f"unknown ablation '{mode}'")
        settings = {
            ABLATION_PPFT: {},
            ABLATION_NO_PPFT: {"input_mode": INPUT_MODE_CONCAT, "ppfb_stages": 0},
            ABLATION_EARLY: {"input_mode": INPUT_MODE_CONCAT, "ppfb_stages": 0},
            ABLATION_RGB: {"guidance_source": GUIDANCE_INTENSITY_ONLY},
            ABLATION_SHALLOW: {"ppfb_stages": 1},
        }[mode]
        settings.update(overrides)
        return cls(**settings)

    @classmethod
    def for_foundation(cls, **overrides) -> "ModelConfig":
        """Backbone without fusion blocks, trained on intensity guidance."""
        settings = {"ppfb_stages": 0, "guidance_source": GUIDANCE_INTENSITY_ONLY}
        settings.update(overrides)
        return cls(**settings)
