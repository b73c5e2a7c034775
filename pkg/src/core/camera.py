"""
Pinhole camera model and per-pixel viewing directions.

Image coordinates: ``u`` is the column index, ``w`` the row index, origin at
the top-left pixel; ``+z`` points into the scene.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import numpy.typing as npt

from src.constants import DEFAULT_FX, UNIT_NORM_TOL
from src.errors import DomainError


@dataclass(frozen=True)
class CameraIntrinsics:
    """Focal lengths and principal point, all in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise DomainError(
                f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}"
            )

    @classmethod
    def centered(
        cls, height: int, width: int, focal: Optional[float] = None
    ) -> "CameraIntrinsics":
        """Square pixels with the principal point at the image center."""
        f = DEFAULT_FX * width / 64.0 if focal is None else focal
        return cls(fx=f, fy=f, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0)

    def to_dict(self) -> Dict[str, float]:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy}

    @classmethod
    def from_dict(cls, values: Dict[str, float]) -> "CameraIntrinsics":
        return cls(
            fx=float(values["fx"]),
            fy=float(values["fy"]),
            cx=float(values["cx"]),
            cy=float(values["cy"]),
        )


@dataclass(frozen=True)
class ViewingField:
    """Unit viewing directions as a ``[3, H, W]`` raster."""

    directions: npt.NDArray[np.float64]

    def __post_init__(self):
        if self.directions.ndim != 3 or self.directions.shape[0] != 3:
            raise DomainError(
                f"ViewingField: expected [3, H, W], got {self.directions.shape}"
            )
        norms = np.linalg.norm(self.directions, axis=0)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise DomainError("ViewingField: directions are not unit vectors")

    @property
    def height(self) -> int:
        return self.directions.shape[1]

    @property
    def width(self) -> int:
        return self.directions.shape[2]

    def pixel_major(self) -> npt.NDArray[np.float64]:
        """Directions as ``[H, W, 3]``."""
        return np.moveaxis(self.directions, 0, -1)


def pixel_rays(intrinsics: CameraIntrinsics, height: int, width: int) -> np.ndarray:
    """Unnormalized rays ``[(u - cx)/fx, (w - cy)/fy, 1]`` as ``[3, H, W]``."""
    rows, cols = np.indices((height, width), dtype=np.float64)
    return np.stack(
        [
            (cols - intrinsics.cx) / intrinsics.fx,
            (rows - intrinsics.cy) / intrinsics.fy,
            np.ones((height, width)),
        ]
    )


def viewing_field(
    intrinsics: CameraIntrinsics, height: int, width: int
) -> ViewingField:
    """Unit direction from the camera center through every pixel."""
    if height < 1 or width < 1:
        raise DomainError(f"image size must be positive, got {height}x{width}")
    rays = pixel_rays(intrinsics, height, width)
    return ViewingField(directions=rays / np.linalg.norm(rays, axis=0))
