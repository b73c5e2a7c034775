"""
Scene description for the synthetic desk-scale renderer.

The camera sits at the origin looking down ``+z``; lengths are millimetres.
Every primitive intersects a batch of unit rays ``[3, N]`` leaving the
origin and returns the hit distance (``inf`` on a miss) and the outward
geometric normal ``[3, N]``.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

from src.constants import (
    DEFAULT_DOLP,
    DEFAULT_LIGHT,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_RESOLUTION,
    MATERIAL_DIFFUSE,
    MATERIAL_MODES,
    MATERIAL_SPECULAR,
)
from src.core.camera import CameraIntrinsics
from src.errors import DomainError

Vector = npt.NDArray[np.float64]
Hits = Tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]

MIN_RESOLUTION = 16
HIT_EPS = 1e-9


def _vector(values, what: str) -> Vector:
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (3,) or not np.isfinite(v).all():
        raise DomainError(f"{what} must be a finite 3-vector, got {values}")
    return v


def _check_material(material: str) -> None:
    if material not in MATERIAL_MODES:
        raise DomainError(f"unknown material '{material}'")


@dataclass(frozen=True)
class Plane:
    point: Tuple[float, float, float]
    normal: Tuple[float, float, float]
    material: str = MATERIAL_DIFFUSE

    def __post_init__(self):
        _vector(self.point, "plane point")
        if np.linalg.norm(_vector(self.normal, "plane normal")) == 0:
            raise DomainError("plane normal must be non-zero")
        _check_material(self.material)

    def intersect(self, rays: np.ndarray) -> Hits:
        n = _vector(self.normal, "plane normal")
        n = n / np.linalg.norm(n)
        denom = n @ rays
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (n @ _vector(self.point, "plane point")) / denom
        hit = (np.abs(denom) > HIT_EPS) & (t > HIT_EPS)
        normals = np.broadcast_to(n[:, None], rays.shape).copy()
        return np.where(hit, t, np.inf), normals


@dataclass(frozen=True)
class Sphere:
    center: Tuple[float, float, float]
    radius: float
    material: str = MATERIAL_DIFFUSE

    def __post_init__(self):
        _vector(self.center, "sphere center")
        if not self.radius > 0:
            raise DomainError(f"sphere radius must be positive, got {self.radius}")
        _check_material(self.material)

    def intersect(self, rays: np.ndarray) -> Hits:
        c = _vector(self.center, "sphere center")
        b = c @ rays
        disc = b**2 - (c @ c - self.radius**2)
        root = np.sqrt(np.maximum(disc, 0.0))
        near, far = b - root, b + root
        t = np.where(near > HIT_EPS, near, far)
        hit = (disc >= 0) & (t > HIT_EPS)
        t = np.where(hit, t, np.inf)
        points = rays * np.where(hit, t, 0.0)
        normals = (points - c[:, None]) / self.radius
        return t, normals


@dataclass(frozen=True)
class Box:
    """Axis-aligned box spanning ``lower`` to ``upper``."""

    lower: Tuple[float, float, float]
    upper: Tuple[float, float, float]
    material: str = MATERIAL_DIFFUSE

    def __post_init__(self):
        lo = _vector(self.lower, "box lower corner")
        hi = _vector(self.upper, "box upper corner")
        if not (lo < hi).all():
            raise DomainError("box lower corner must be below upper corner")
        _check_material(self.material)

    def intersect(self, rays: np.ndarray) -> Hits:
        lo = _vector(self.lower, "box lower corner")[:, None]
        hi = _vector(self.upper, "box upper corner")[:, None]
        parallel = rays == 0
        safe = np.where(parallel, 1.0, rays)
        t1, t2 = lo / safe, hi / safe
        inside = (lo <= 0) & (0 <= hi)
        blocked = np.where(inside, -np.inf, np.inf)
        near = np.where(parallel, blocked, np.minimum(t1, t2))
        far = np.where(parallel, -blocked, np.maximum(t1, t2))
        t_enter, t_exit = near.max(axis=0), far.min(axis=0)
        hit = t_exit >= np.maximum(t_enter, HIT_EPS)
        entering = t_enter > HIT_EPS
        t = np.where(hit, np.where(entering, t_enter, t_exit), np.inf)

        columns = np.arange(rays.shape[1])
        axis = np.where(entering, near.argmax(axis=0), far.argmin(axis=0))
        normals = np.zeros_like(rays)
        normals[axis, columns] = -np.sign(rays[axis, columns])
        return t, normals


Primitive = Union[Plane, Sphere, Box]


@dataclass(frozen=True)
class SceneSpec:
    """
    Everything needed to render one sample deterministically.

    Attributes
    ----------
    primitives : tuple
        Planes, spheres and boxes, each with a material mode.
    dolp : dict
        Constant DoLP per material mode.
    light : float
        Light intensity ``I0``.
    noise_sigma : float
        Std-dev of Gaussian intensity noise.
    seed : int
        Seed of the render noise stream.
    """

    primitives: Tuple[Primitive, ...]
    intrinsics: CameraIntrinsics
    height: int = DEFAULT_RESOLUTION
    width: int = DEFAULT_RESOLUTION
    dolp: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_DOLP))
    light: float = DEFAULT_LIGHT
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    seed: int = 0

    def __post_init__(self):
        if self.height < MIN_RESOLUTION or self.width < MIN_RESOLUTION:
            raise DomainError(
                f"resolution must be at least {MIN_RESOLUTION}x{MIN_RESOLUTION}"
            )
        for material in MATERIAL_MODES:
            rho = self.dolp.get(material)
            if rho is None or not 0.0 <= rho <= 1.0:
                raise DomainError(f"DoLP for '{material}' must be in [0, 1]")
        if not self.light >= 0:
            raise DomainError("light intensity must be >= 0")
        if not self.noise_sigma >= 0:
            raise DomainError("noise sigma must be >= 0")


@dataclass(frozen=True)
class SceneSampler:
    """
    Random desk scenes: a back wall, a table top and one to three objects.

    Objects are spheres or boxes with a material drawn from
    ``materials``; every draw comes from the generator handed to ``sample``.
    """

    height: int = DEFAULT_RESOLUTION
    width: int = DEFAULT_RESOLUTION
    intrinsics: Optional[CameraIntrinsics] = None
    light: float = DEFAULT_LIGHT
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    materials: Tuple[str, ...] = MATERIAL_MODES
    max_objects: int = 3

    def __post_init__(self):
        for material in self.materials:
            _check_material(material)
        if self.max_objects < 1:
            raise DomainError("scenes need at least one object")

    def camera(self) -> CameraIntrinsics:
        if self.intrinsics is not None:
            return self.intrinsics
        return CameraIntrinsics.centered(self.height, self.width)

    def sample(self, rng: np.random.Generator) -> SceneSpec:
        wall_z = float(rng.uniform(1400.0, 2000.0))
        tilt = rng.uniform(-0.15, 0.15, size=2)
        wall = Plane(
            point=(0.0, 0.0, wall_z),
            normal=(float(tilt[0]), float(tilt[1]), -1.0),
            material=MATERIAL_DIFFUSE,
        )
        table = Plane(
            point=(0.0, float(rng.uniform(250.0, 400.0)), 0.0),
            normal=(0.0, -1.0, float(rng.uniform(0.05, 0.3))),
            material=str(rng.choice([MATERIAL_DIFFUSE, MATERIAL_SPECULAR])),
        )
        objects = []
        for _ in range(int(rng.integers(1, self.max_objects + 1))):
            material = str(rng.choice(list(self.materials)))
            z = float(rng.uniform(700.0, 1200.0))
            x, y = (float(v) for v in rng.uniform(-0.25, 0.25, size=2) * z)
            size = float(rng.uniform(80.0, 200.0))
            if rng.random() < 0.5:
                objects.append(Sphere(center=(x, y, z), radius=size, material=material))
            else:
                objects.append(
                    Box(
                        lower=(x - size, y - size, z - size),
                        upper=(x + size, y + size, z + size),
                        material=material,
                    )
                )
        return SceneSpec(
            primitives=(wall, table, *objects),
            intrinsics=self.camera(),
            height=self.height,
            width=self.width,
            light=self.light,
            noise_sigma=self.noise_sigma,
            seed=int(rng.integers(2**31)),
        )
