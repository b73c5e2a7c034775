"""
Polarization physics for a division-of-focal-plane camera.

Forward model, four-angle decoding into Stokes parameters and the
(intensity, AoLP, DoLP) state, and the AoLP/surface-normal relations.

Conventions: ``s0 = 2 * I_un`` so that
``I_pol = (s0 + s1 cos 2a + s2 sin 2a) / 2``; AoLP lives in ``[0, pi)``.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import numpy.typing as npt

from src.constants import (
    AOLP_DEGENERATE_EPS,
    DARK_PIXEL_EPS,
    MATERIAL_DIFFUSE,
    MATERIAL_SPECULAR,
    MATERIAL_TRANSPARENT,
    UNIT_NORM_TOL,
)
from src.errors import DegenerateGeometryError, DimensionMismatchError, DomainError

ArrayOrFloat = Union[float, npt.NDArray[np.float64]]

_Z_AXIS = np.array([0.0, 0.0, 1.0])


def wrap_angle(phi: ArrayOrFloat) -> ArrayOrFloat:
    """Map angles into the canonical AoLP range ``[0, pi)``."""
    wrapped = np.mod(phi, np.pi)
    wrapped = np.where(wrapped >= np.pi, 0.0, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class DofpCapture:
    """
    Four polarizer-angle intensity rasters stacked as ``[4, H, W]``.

    Channel order follows ``POLARIZER_ANGLES``: 0, 45, 90, 135 degrees.
    """

    intensities: npt.NDArray[np.float64]

    def __post_init__(self):
        data = self.intensities
        if data.ndim != 3 or data.shape[0] != 4:
            raise DimensionMismatchError(
                f"DofpCapture: expected [4, H, W], got {data.shape}"
            )
        if np.isnan(data).any():
            raise DomainError("DofpCapture: NaN in input")
        if not np.isfinite(data).all():
            raise DomainError("DofpCapture: non-finite intensity")
        if (data < 0).any():
            raise DomainError("DofpCapture: negative intensity")

    @classmethod
    def from_rasters(cls, i0, i45, i90, i135) -> "DofpCapture":
        rasters = [np.asarray(r, dtype=np.float64) for r in (i0, i45, i90, i135)]
        shapes = {r.shape for r in rasters}
        if len(shapes) != 1:
            raise DimensionMismatchError(f"DofpCapture: raster shapes differ {shapes}")
        return cls(np.stack(rasters))

    @property
    def height(self) -> int:
        return self.intensities.shape[1]

    @property
    def width(self) -> int:
        return self.intensities.shape[2]


@dataclass(frozen=True)
class StokesImage:
    s0: npt.NDArray[np.float64]
    s1: npt.NDArray[np.float64]
    s2: npt.NDArray[np.float64]


@dataclass(frozen=True)
class PolarizationState:
    """
    Per-pixel unpolarized intensity, AoLP (radians) and DoLP.

    Attributes
    ----------
    intensity : ndarray
        ``I_un``, non-negative.
    aolp : ndarray
        Angle of linear polarization in ``[0, pi)``.
    dolp : ndarray
        Degree of linear polarization in ``[0, 1]``.
    """

    intensity: npt.NDArray[np.float64]
    aolp: npt.NDArray[np.float64]
    dolp: npt.NDArray[np.float64]

    def __post_init__(self):
        if not (self.intensity.shape == self.aolp.shape == self.dolp.shape):
            raise DimensionMismatchError("PolarizationState: raster shapes differ")
        for name in ("intensity", "aolp", "dolp"):
            if not np.isfinite(getattr(self, name)).all():
                raise DomainError(f"PolarizationState: non-finite {name}")
        if (self.intensity < 0).any():
            raise DomainError("PolarizationState: negative intensity")
        if (self.aolp < 0).any() or (self.aolp >= np.pi).any():
            raise DomainError("PolarizationState: AoLP outside [0, pi)")
        if (self.dolp < 0).any() or (self.dolp > 1).any():
            raise DomainError("PolarizationState: DoLP outside [0, 1]")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.intensity.shape


def forward_malus(
    i_un: ArrayOrFloat, rho: ArrayOrFloat, phi: ArrayOrFloat, phi_pol: ArrayOrFloat
) -> ArrayOrFloat:
    """Intensity behind a linear polarizer at angle ``phi_pol``.

    Args:
        i_un: Unpolarized total intensity, ``>= 0``.
        rho: DoLP in ``[0, 1]``.
        phi: AoLP in radians.
        phi_pol: Polarizer angle in radians.

    Returns:
        ``i_un * (1 + rho * cos(2 phi - 2 phi_pol))``.
    """
    if np.any(np.asarray(i_un) < 0):
        raise DomainError("forward_malus: intensity must be >= 0")
    rho_arr = np.asarray(rho)
    if np.any(rho_arr < 0) or np.any(rho_arr > 1):
        raise DomainError("forward_malus: DoLP must be in [0, 1]")
    result = i_un * (1.0 + rho * np.cos(2.0 * phi - 2.0 * phi_pol))
    if np.ndim(result) == 0:
        return float(result)
    return result


def decode_dofp(capture: DofpCapture) -> Tuple[StokesImage, PolarizationState]:
    """Invert the four-angle forward model pixel by pixel.

    Dark pixels (``s0`` below the floor) decode to ``rho = phi = 0``.
    """
    i0, i45, i90, i135 = capture.intensities
    s0 = (i0 + i45 + i90 + i135) / 2.0
    s1 = i0 - i90
    s2 = i45 - i135

    dark = s0 < DARK_PIXEL_EPS
    rho = np.clip(np.hypot(s1, s2) / np.maximum(s0, DARK_PIXEL_EPS), 0.0, 1.0)
    phi = wrap_angle(0.5 * np.arctan2(s2, s1))
    rho = np.where(dark, 0.0, rho)
    phi = np.where(dark, 0.0, phi)

    stokes = StokesImage(s0=s0, s1=s1, s2=s2)
    return stokes, PolarizationState(intensity=s0 / 2.0, aolp=phi, dolp=rho)


def _polarization_direction(n: np.ndarray, v: np.ndarray, mode: str) -> np.ndarray:
    cross = np.cross(n, v)
    if mode == MATERIAL_DIFFUSE:
        return np.cross(cross, _Z_AXIS)
    if mode in (MATERIAL_SPECULAR, MATERIAL_TRANSPARENT):
        return np.cross(np.cross(cross, v), _Z_AXIS)
    raise DomainError(f"unknown reflection mode '{mode}'")


def aolp_from_normal(n: npt.ArrayLike, v: npt.ArrayLike, mode: str) -> float:
    """
    AoLP predicted by a surface normal under diffuse or specular reflection.

    Triple products are grouped left to right: ``((n x v) x z)`` for diffuse
    and ``(((n x v) x v) x z)`` for specular. Transparent surfaces reflect
    specularly.

    Raises
    ------
    DegenerateGeometryError
        If the polarization direction has no image-plane component.
    """
    n = np.asarray(n, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    for label, vec in (("n", n), ("v", v)):
        if abs(np.linalg.norm(vec) - 1.0) > UNIT_NORM_TOL:
            raise DomainError(f"aolp_from_normal: {label} is not a unit vector")
    phi_vec = _polarization_direction(n, v, mode)
    if np.hypot(phi_vec[0], phi_vec[1]) < AOLP_DEGENERATE_EPS:
        raise DegenerateGeometryError("aolp_from_normal: polarization undefined")
    return wrap_angle(float(np.arctan2(phi_vec[1], phi_vec[0])))


def aolp_from_normals(
    normals: npt.NDArray[np.float64], views: npt.NDArray[np.float64], mode: str
) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.bool_]]:
    """Vectorized ``aolp_from_normal`` over ``[..., 3]`` arrays.

    Returns the angles and a mask of degenerate entries (angle set to 0).
    """
    phi_vec = _polarization_direction(normals, views, mode)
    degenerate = np.hypot(phi_vec[..., 0], phi_vec[..., 1]) < AOLP_DEGENERATE_EPS
    phi = wrap_angle(np.arctan2(phi_vec[..., 1], phi_vec[..., 0]))
    return np.where(degenerate, 0.0, phi), degenerate
