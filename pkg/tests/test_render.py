import math

import numpy as np
import pytest

from src.constants import (
    BACKGROUND_CODE,
    BACKGROUND_LEVEL,
    DEFAULT_DOLP,
    MATERIAL_CODES,
    MATERIAL_DIFFUSE,
    MATERIAL_SPECULAR,
    MATERIAL_TRANSPARENT,
)
from src.core.camera import CameraIntrinsics, viewing_field
from src.core.polarization import decode_dofp
from src.simulate.render import render
from src.simulate.scene import Plane, SceneSpec, Sphere

SIZE = 16
CAMERA = CameraIntrinsics.centered(SIZE, SIZE)
WALL = Plane((0.0, 0.0, 1500.0), (0.0, 0.0, -1.0))


def scene_of(*primitives, **kwargs):
    return SceneSpec(primitives, CAMERA, height=SIZE, width=SIZE, **kwargs)


def angle_gap(a, b):
    d = np.abs(a - b) % math.pi
    return np.minimum(d, math.pi - d)


def test_flat_wall_depth():
    result = render(scene_of(WALL))
    assert result.gt.valid.all()
    np.testing.assert_allclose(result.gt.depth, 1500.0, rtol=1e-12)
    assert result.metadata["empty"] is False
    assert result.metadata[MATERIAL_DIFFUSE] == SIZE * SIZE


def test_empty_scene_is_background():
    result = render(scene_of())
    assert result.metadata["empty"] is True
    assert not result.gt.valid.any()
    assert np.all(result.materials == BACKGROUND_CODE)
    assert np.all(result.normals == 0.0)
    np.testing.assert_allclose(result.state.intensity, BACKGROUND_LEVEL)
    assert np.all(result.state.dolp == 0.0)


@pytest.mark.parametrize(
    "material", [MATERIAL_DIFFUSE, MATERIAL_SPECULAR, MATERIAL_TRANSPARENT]
)
def test_noise_free_capture_decodes_to_analytic_state(material):
    sphere = Sphere((40.0, -30.0, 800.0), 250.0, material=material)
    result = render(scene_of(WALL, sphere))
    _, decoded = decode_dofp(result.capture)
    np.testing.assert_allclose(decoded.intensity, result.state.intensity, rtol=1e-9)
    np.testing.assert_allclose(decoded.dolp, result.state.dolp, atol=1e-9)
    assert np.all(angle_gap(decoded.aolp, result.state.aolp) < 1e-9)
    on = result.materials == MATERIAL_CODES[material]
    assert on.any()
    np.testing.assert_allclose(result.state.dolp[on], DEFAULT_DOLP[material])


def test_nearest_hit_wins():
    result = render(scene_of(WALL, Sphere((0.0, 0.0, 1000.0), 200.0)))
    center = result.gt.depth[SIZE // 2, SIZE // 2]
    corner = result.gt.depth[0, 0]
    assert center < 1000.0
    assert corner == pytest.approx(1500.0)


@pytest.mark.parametrize("row, col", [(8, 8), (3, 10), (12, 1)])
def test_sphere_center_pixel_faces_the_camera(row, col):
    view = viewing_field(CAMERA, SIZE, SIZE).directions[:, row, col]
    sphere = Sphere(tuple(900.0 * view), 150.0)
    result = render(scene_of(WALL, sphere))
    assert result.gt.depth[row, col] == pytest.approx(750.0 * view[2], rel=1e-12)
    np.testing.assert_allclose(result.normals[:, row, col], -view, atol=1e-12)


def test_transparent_object_is_seen_through():
    glass = Sphere((0.0, 0.0, 1000.0), 200.0, material=MATERIAL_TRANSPARENT)
    result = render(scene_of(WALL, glass))
    clear = result.materials == MATERIAL_CODES[MATERIAL_TRANSPARENT]
    assert clear.any()
    assert np.all(result.gt.depth[clear] < 1200.0)
    np.testing.assert_allclose(result.see_through.depth[clear], 1500.0, rtol=1e-12)
    np.testing.assert_array_equal(
        result.see_through.depth[~clear], result.gt.depth[~clear]
    )


def test_normals_face_the_camera():
    result = render(scene_of(WALL, Sphere((0.0, 0.0, 900.0), 300.0)))
    rays = viewing_field(CAMERA, SIZE, SIZE).directions
    facing = np.sum(result.normals * rays, axis=0)
    assert np.all(facing[result.gt.valid] <= 0.0)
    norms = np.linalg.norm(result.normals, axis=0)[result.gt.valid]
    np.testing.assert_allclose(norms, 1.0, rtol=1e-9)


def test_noise_is_seeded():
    a = render(scene_of(WALL, noise_sigma=0.05, seed=1))
    b = render(scene_of(WALL, noise_sigma=0.05, seed=1))
    c = render(scene_of(WALL, noise_sigma=0.05, seed=2))
    assert np.array_equal(a.capture.intensities, b.capture.intensities)
    assert not np.array_equal(a.capture.intensities, c.capture.intensities)
    assert np.all(a.capture.intensities >= 0.0)
