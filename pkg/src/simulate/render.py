"""
Closed-form ray caster producing a DoFP capture and its ground truth.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import numpy.typing as npt

from src.constants import (
    AMBIENT_LEVEL,
    BACKGROUND_CODE,
    BACKGROUND_LEVEL,
    MATERIAL_CODES,
    MATERIAL_MODES,
    MATERIAL_TRANSPARENT,
    POLARIZER_ANGLES,
)
from src.core.camera import viewing_field
from src.core.polarization import (
    DofpCapture,
    PolarizationState,
    aolp_from_normals,
    forward_malus,
)
from src.model.depth_map import DepthMap
from src.simulate.scene import SceneSpec

logger = logging.getLogger(__name__)

NOISE_STREAM = 1


@dataclass(frozen=True)
class RenderResult:
    """
    One rendered view.

    Attributes
    ----------
    capture : DofpCapture
        Four polarizer-angle intensities, noise included.
    gt : DepthMap
        Nearest-hit depth (z of the hit point); background is invalid.
    normals : ndarray
        ``[3, H, W]`` unit normals facing the camera, 0 on background.
    materials : ndarray
        Integer material code per pixel, ``BACKGROUND_CODE`` on background.
    see_through : DepthMap
        Depth with transparent primitives removed from the scene.
    state : PolarizationState
        Noise-free analytic polarization state.
    degenerate : ndarray
        Pixels whose AoLP is undefined (set to 0).
    metadata : dict
        ``empty`` (all background) and per-material pixel counts.
    """

    capture: DofpCapture
    gt: DepthMap
    normals: npt.NDArray[np.float64]
    materials: npt.NDArray[np.int64]
    see_through: DepthMap
    state: PolarizationState
    degenerate: npt.NDArray[np.bool_]
    metadata: Dict[str, object]


def _cast(
    scene: SceneSpec, rays: np.ndarray, skip_transparent: bool
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nearest hit per ray: distance, normal ``[3, N]`` and material code."""
    n_rays = rays.shape[1]
    best_t = np.full(n_rays, np.inf)
    best_n = np.zeros((3, n_rays))
    codes = np.full(n_rays, BACKGROUND_CODE, dtype=np.int64)
    for primitive in scene.primitives:
        if skip_transparent and primitive.material == MATERIAL_TRANSPARENT:
            continue
        t, normals = primitive.intersect(rays)
        closer = t < best_t
        best_t = np.where(closer, t, best_t)
        best_n = np.where(closer[None], normals, best_n)
        codes = np.where(closer, MATERIAL_CODES[primitive.material], codes)
    # normals face the camera
    facing = np.sum(best_n * rays, axis=0) > 0
    best_n = np.where(facing[None], -best_n, best_n)
    return best_t, best_n, codes


def _depth_map(t: np.ndarray, rays: np.ndarray, shape: Tuple[int, int]) -> DepthMap:
    hit = np.isfinite(t)
    z = np.where(hit, t * rays[2], 0.0)
    return DepthMap(depth=z.reshape(shape), valid=hit.reshape(shape))


def render(scene: SceneSpec) -> RenderResult:
    """
    Ray-cast every pixel and synthesize the four polarizer-angle images.

    Shading is ``I0 * (ambient + (1 - ambient) |n . v|)``; DoLP is the
    material constant and AoLP follows the normal in the material's
    reflection mode (transparent surfaces reflect specularly). Background
    is unpolarized at ``I0 * BACKGROUND_LEVEL`` with invalid depth.
    """
    height, width = scene.height, scene.width
    shape = (height, width)
    rays = viewing_field(scene.intrinsics, height, width).directions.reshape(3, -1)

    t, normals, codes = _cast(scene, rays, skip_transparent=False)
    t_behind, _, _ = _cast(scene, rays, skip_transparent=True)
    hit = np.isfinite(t)

    cos_view = np.abs(np.sum(normals * rays, axis=0))
    intensity = np.where(
        hit,
        scene.light * (AMBIENT_LEVEL + (1.0 - AMBIENT_LEVEL) * cos_view),
        scene.light * BACKGROUND_LEVEL,
    )
    aolp = np.zeros_like(intensity)
    dolp = np.zeros_like(intensity)
    degenerate = np.zeros(hit.shape, dtype=bool)
    for material in MATERIAL_MODES:
        on = codes == MATERIAL_CODES[material]
        if not on.any():
            continue
        phi, bad = aolp_from_normals(normals[:, on].T, rays[:, on].T, material)
        aolp[on] = phi
        degenerate[on] = bad
        dolp[on] = scene.dolp[material]

    state = PolarizationState(
        intensity=intensity.reshape(shape),
        aolp=aolp.reshape(shape),
        dolp=dolp.reshape(shape),
    )
    images = np.stack(
        [
            forward_malus(state.intensity, state.dolp, state.aolp, angle)
            for angle in POLARIZER_ANGLES
        ]
    )
    if scene.noise_sigma > 0:
        rng = np.random.default_rng([scene.seed, NOISE_STREAM])
        noise = rng.normal(0.0, scene.noise_sigma, images.shape)
        images = np.maximum(images + noise, 0.0)

    counts = {m: int((codes == MATERIAL_CODES[m]).sum()) for m in MATERIAL_MODES}
    metadata: Dict[str, object] = {"empty": not hit.any(), **counts}
    if metadata["empty"]:
        logger.info("scene %d renders as background only", scene.seed)
    return RenderResult(
        capture=DofpCapture(images),
        gt=_depth_map(t, rays, shape),
        normals=np.where(hit[None], normals, 0.0).reshape(3, height, width),
        materials=codes.reshape(shape),
        see_through=_depth_map(t_behind, rays, shape),
        state=state,
        degenerate=degenerate.reshape(shape),
        metadata=metadata,
    )
