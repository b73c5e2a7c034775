"""
Sensor degradation models turning ground-truth depth into sensor depth.

* ``stereo-holes``: a seeded random fraction of pixels plus every pixel on
  a low-texture material is lost.
* ``dtof-transparent``: transparent surfaces are seen through; those pixels
  report the depth behind them plus an offset.
* ``itof-fov-crop``: a border band of ``crop_margin`` pixels is lost.

Every mode then adds Gaussian depth noise to the surviving pixels.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt

from src.constants import (
    DEGRADATION_MODES,
    DEGRADE_DTOF,
    DEGRADE_ITOF,
    DEGRADE_STEREO,
    MATERIAL_CODES,
    MATERIAL_SPECULAR,
    MATERIAL_TRANSPARENT,
)
from src.errors import DimensionMismatchError, DomainError
from src.model.depth_map import DepthMap

logger = logging.getLogger(__name__)

HOLE_STREAM = 2
DEPTH_NOISE_STREAM = 3


@dataclass(frozen=True)
class DegradationSpec:
    """
    Attributes
    ----------
    mode : str
        One of ``DEGRADATION_MODES``.
    hole_rate : float
        Random hole fraction in ``[0, 1]`` (stereo-holes).
    crop_margin : int
        Border width in pixels (itof-fov-crop).
    transparent_offset : float
        Added to the see-through depth in mm (dtof-transparent).
    depth_noise : float
        Std-dev of the depth noise in mm.
    low_texture_materials : tuple of str
        Materials stereo matching cannot resolve.
    seed : int
        Seed of the hole and noise streams.
    """

    mode: str
    hole_rate: float = 0.0
    crop_margin: int = 0
    transparent_offset: float = 0.0
    depth_noise: float = 0.0
    low_texture_materials: Tuple[str, ...] = (MATERIAL_SPECULAR,)
    seed: int = 0

    def __post_init__(self):
        if self.mode not in DEGRADATION_MODES:
            raise DomainError(f"unknown degradation mode '{self.mode}'")
        if not 0.0 <= self.hole_rate <= 1.0:
            raise DomainError(f"hole rate must be in [0, 1], got {self.hole_rate}")
        if self.crop_margin < 0:
            raise DomainError(f"crop margin must be >= 0, got {self.crop_margin}")
        if not self.depth_noise >= 0:
            raise DomainError(f"depth noise must be >= 0, got {self.depth_noise}")
        for material in self.low_texture_materials:
            if material not in MATERIAL_CODES:
                raise DomainError(f"unknown material '{material}'")


def degrade(
    gt: DepthMap,
    spec: DegradationSpec,
    materials: npt.NDArray[np.int64],
    see_through: Optional[DepthMap] = None,
) -> DepthMap:
    """
    Simulate one sensor reading of ``gt``; ``gt`` itself is never modified.

    Args:
        gt: Ground-truth depth.
        spec: Degradation mode and parameters.
        materials: Material code raster of the render.
        see_through: Depth with transparent primitives removed; required
            in ``dtof-transparent`` mode when transparent pixels exist.

    Returns:
        DepthMap: Sensor depth.
    """
    height, width = gt.shape
    if materials.shape != gt.shape:
        raise DimensionMismatchError(
            f"degrade: material raster {materials.shape} vs depth {gt.shape}"
        )
    depth = gt.depth.copy()
    valid = gt.valid.copy()

    if spec.mode == DEGRADE_STEREO:
        rng = np.random.default_rng([spec.seed, HOLE_STREAM])
        holes = rng.random(gt.shape) < spec.hole_rate
        codes = [MATERIAL_CODES[m] for m in spec.low_texture_materials]
        valid &= ~holes & ~np.isin(materials, codes)
    elif spec.mode == DEGRADE_DTOF:
        clear = materials == MATERIAL_CODES[MATERIAL_TRANSPARENT]
        if clear.any():
            if see_through is None or see_through.shape != gt.shape:
                raise DimensionMismatchError(
                    "degrade: dtof-transparent needs a matching see-through depth"
                )
            depth = np.where(clear, see_through.depth + spec.transparent_offset, depth)
            valid = np.where(clear, see_through.valid, valid)
    elif spec.mode == DEGRADE_ITOF:
        m = spec.crop_margin
        if 2 * m >= min(height, width):
            raise DomainError(
                f"crop margin {m} leaves nothing of a {height}x{width} image"
            )
        band = np.ones(gt.shape, dtype=bool)
        band[m : height - m, m : width - m] = False
        valid &= ~band

    if spec.depth_noise > 0:
        rng = np.random.default_rng([spec.seed, DEPTH_NOISE_STREAM])
        depth = depth + rng.normal(0.0, spec.depth_noise, gt.shape)
    valid &= depth > 0
    logger.debug(
        "degrade %s: %d of %d gt pixels survive",
        spec.mode,
        int(valid.sum()),
        gt.n_valid,
    )
    return DepthMap(depth=np.where(valid, depth, 0.0), valid=valid)


@dataclass(frozen=True)
class DegradationSampler:
    """Draws a degradation mode and its parameters per sample."""

    modes: Tuple[str, ...] = DEGRADATION_MODES
    hole_rate: Tuple[float, float] = (0.05, 0.3)
    crop_margin: Tuple[int, int] = (2, 8)
    transparent_offset: Tuple[float, float] = (0.0, 20.0)
    depth_noise: float = 2.0

    def __post_init__(self):
        if not self.modes:
            raise DomainError("at least one degradation mode is required")
        for mode in self.modes:
            if mode not in DEGRADATION_MODES:
                raise DomainError(f"unknown degradation mode '{mode}'")

    def sample(
        self, rng: np.random.Generator, shape: Optional[Tuple[int, int]] = None
    ) -> DegradationSpec:
        """
        Draw one spec.

        With ``shape`` given, the crop margin is capped at a quarter of the
        shorter image side.
        """
        mode = str(rng.choice(list(self.modes)))
        hole_rate = float(rng.uniform(*self.hole_rate))
        margin = int(rng.integers(self.crop_margin[0], self.crop_margin[1] + 1))
        if shape is not None:
            margin = min(margin, max(1, min(shape) // 4))
        return DegradationSpec(
            mode=mode,
            hole_rate=hole_rate,
            crop_margin=margin,
            transparent_offset=float(rng.uniform(*self.transparent_offset)),
            depth_noise=self.depth_noise,
            seed=int(rng.integers(2**31)),
        )
