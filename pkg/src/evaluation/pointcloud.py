"""
Geometry helpers: back-projection, projection, PLY export and normals
estimated from a depth map.
"""

import logging
from typing import Tuple

import numpy as np
import numpy.typing as npt

from src.core.camera import CameraIntrinsics, pixel_rays
from src.errors import DimensionMismatchError
from src.model.depth_map import DepthMap

logger = logging.getLogger(__name__)

Points = npt.NDArray[np.float64]


def pixel_coordinates(depth: DepthMap) -> Points:
    """``(u, w)`` of every valid pixel, row-major, as ``[N, 2]``."""
    rows, cols = np.nonzero(depth.valid)
    return np.stack([cols, rows], axis=1).astype(np.float64)


def backproject(depth: DepthMap, intrinsics: CameraIntrinsics) -> Points:
    """Camera-frame points ``[N, 3]`` (mm) of the valid pixels, row-major."""
    rays = pixel_rays(intrinsics, *depth.shape)
    points = rays * depth.depth[None]
    return points[:, depth.valid].T


def project(points: Points, intrinsics: CameraIntrinsics) -> Points:
    """Pixel coordinates ``(u, w)`` of camera-frame points with ``z > 0``."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise DimensionMismatchError(f"project: expected [N, 3], got {points.shape}")
    z = points[:, 2]
    u = intrinsics.fx * points[:, 0] / z + intrinsics.cx
    w = intrinsics.fy * points[:, 1] / z + intrinsics.cy
    return np.stack([u, w], axis=1)


def write_ply(path, points: Points) -> None:
    """ASCII PLY with float ``x y z`` vertex properties."""
    points = np.asarray(points, dtype=np.float64)
    with open(path, "w") as f:
        f.write("ply\n")
        f.write("format ascii 1.0\n")
        f.write(f"element vertex {len(points)}\n")
        f.write("property float x\n")
        f.write("property float y\n")
        f.write("property float z\n")
        f.write("end_header\n")
        for x, y, z in points:
            f.write(f"{x:.6f} {y:.6f} {z:.6f}\n")
    logger.debug("wrote %d points to %s", len(points), path)


def read_ply(path) -> Points:
    with open(path, "r") as f:
        lines = f.read().splitlines()
    end = lines.index("end_header")
    count = next(
        int(line.split()[-1]) for line in lines if line.startswith("element vertex")
    )
    body = lines[end + 1 : end + 1 + count]
    return np.array([[float(v) for v in line.split()] for line in body]).reshape(-1, 3)


def depth_to_normals(
    depth: DepthMap, intrinsics: CameraIntrinsics
) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.bool_]]:
    """
    Surface normals ``[3, H, W]`` from central differences of back-projected
    points, oriented towards the camera.

    A pixel gets a normal only if it and its four neighbours are valid; the
    returned mask marks those pixels (border pixels never qualify).
    """
    height, width = depth.shape
    points = pixel_rays(intrinsics, height, width) * depth.depth[None]
    normals = np.zeros((3, height, width))
    mask = np.zeros((height, width), dtype=bool)
    if height < 3 or width < 3:
        return normals, mask

    valid = depth.valid
    inner = (
        valid[1:-1, 1:-1]
        & valid[1:-1, 2:]
        & valid[1:-1, :-2]
        & valid[2:, 1:-1]
        & valid[:-2, 1:-1]
    )
    du = points[:, 1:-1, 2:] - points[:, 1:-1, :-2]
    dw = points[:, 2:, 1:-1] - points[:, :-2, 1:-1]
    n = np.cross(du, dw, axis=0)
    length = np.linalg.norm(n, axis=0)
    inner &= length > 0
    n = n / np.where(length > 0, length, 1.0)
    # face the camera: n . p < 0
    facing = np.sum(n * points[:, 1:-1, 1:-1], axis=0)
    n = np.where(facing > 0, -n, n)

    normals[:, 1:-1, 1:-1] = np.where(inner[None], n, 0.0)
    mask[1:-1, 1:-1] = inner
    return normals, mask


def error_map(pred: DepthMap, gt: DepthMap) -> npt.NDArray[np.float64]:
    """``|pred - gt|`` where both are valid, 0 elsewhere."""
    if pred.shape != gt.shape:
        raise DimensionMismatchError(f"error map: {pred.shape} vs {gt.shape}")
    both = pred.valid & gt.valid
    return np.where(both, np.abs(pred.depth - gt.depth), 0.0)
