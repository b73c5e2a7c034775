from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt

from src.errors import DimensionMismatchError, DomainError


@dataclass(frozen=True)
class DepthMap:
    """
    Metric depth in millimetres with a validity mask.

    Depth must be finite and positive wherever ``valid`` is set; values at
    invalid pixels are ignored (and stored as 0 on disk).
    """

    depth: npt.NDArray[np.float64]
    valid: npt.NDArray[np.bool_]

    def __post_init__(self):
        if self.depth.ndim != 2 or self.depth.shape != self.valid.shape:
            raise DimensionMismatchError(
                f"DepthMap: depth {self.depth.shape} vs mask {self.valid.shape}"
            )
        if self.valid.dtype != np.bool_:
            raise DomainError("DepthMap: mask must be boolean")
        picked = self.depth[self.valid]
        if not np.isfinite(picked).all() or (picked <= 0).any():
            raise DomainError("DepthMap: valid depths must be finite and > 0")

    @property
    def shape(self):
        return self.depth.shape

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())

    @classmethod
    def from_raster(cls, raster: np.ndarray) -> "DepthMap":
        """Decode the on-disk form where 0 (or non-finite) marks invalid."""
        raster = np.asarray(raster, dtype=np.float64)
        valid = np.isfinite(raster) & (raster > 0)
        return cls(depth=np.where(valid, raster, 0.0), valid=valid)

    def to_raster(self) -> np.ndarray:
        return np.where(self.valid, self.depth, 0.0)

    @classmethod
    def dense(cls, depth: np.ndarray, valid: Optional[np.ndarray] = None) -> "DepthMap":
        depth = np.asarray(depth, dtype=np.float64)
        mask = np.ones(depth.shape, dtype=bool) if valid is None else valid
        return cls(depth=depth, valid=mask)
