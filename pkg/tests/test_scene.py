import numpy as np
import pytest

from src.constants import MATERIAL_DIFFUSE, MATERIAL_MODES
from src.core.camera import CameraIntrinsics
from src.errors import DomainError
from src.simulate.scene import Box, Plane, SceneSampler, SceneSpec, Sphere

FORWARD = np.array([[0.0], [0.0], [1.0]])
SIDEWAYS = np.array([[1.0], [0.0], [0.0]])


class TestPrimitives:
    def test_plane_hit(self):
        t, normals = Plane((0.0, 0.0, 1000.0), (0.0, 0.0, -2.0)).intersect(FORWARD)
        assert t[0] == pytest.approx(1000.0)
        np.testing.assert_allclose(normals[:, 0], [0.0, 0.0, -1.0])

    def test_plane_parallel_ray_misses(self):
        t, _ = Plane((0.0, 0.0, 1000.0), (0.0, 0.0, -1.0)).intersect(SIDEWAYS)
        assert t[0] == np.inf

    def test_plane_behind_camera_misses(self):
        t, _ = Plane((0.0, 0.0, -5.0), (0.0, 0.0, 1.0)).intersect(FORWARD)
        assert t[0] == np.inf

    def test_sphere_front_face(self):
        t, normals = Sphere((0.0, 0.0, 1000.0), 100.0).intersect(FORWARD)
        assert t[0] == pytest.approx(900.0)
        np.testing.assert_allclose(normals[:, 0], [0.0, 0.0, -1.0], atol=1e-12)

    def test_sphere_miss(self):
        t, _ = Sphere((0.0, 0.0, 1000.0), 100.0).intersect(SIDEWAYS)
        assert t[0] == np.inf

    def test_box_front_face(self):
        box = Box((-100.0, -100.0, 900.0), (100.0, 100.0, 1100.0))
        t, normals = box.intersect(FORWARD)
        assert t[0] == pytest.approx(900.0)
        np.testing.assert_allclose(normals[:, 0], [0.0, 0.0, -1.0])

    def test_box_miss(self):
        box = Box((-100.0, -100.0, 900.0), (100.0, 100.0, 1100.0))
        t, _ = box.intersect(SIDEWAYS)
        assert t[0] == np.inf

    def test_batch_of_rays(self):
        rays = np.concatenate([FORWARD, SIDEWAYS], axis=1)
        t, normals = Sphere((0.0, 0.0, 500.0), 50.0).intersect(rays)
        assert t.shape == (2,)
        assert normals.shape == (3, 2)
        assert np.isfinite(t).tolist() == [True, False]

    @pytest.mark.parametrize(
        "build",
        [
            lambda: Plane((0.0, 0.0, 1.0), (0.0, 0.0, 0.0)),
            lambda: Sphere((0.0, 0.0, 1.0), 0.0),
            lambda: Box((0.0, 0.0, 0.0), (1.0, 1.0, 0.0)),
            lambda: Sphere((0.0, 0.0, 1.0), 1.0, material="velvet"),
            lambda: Plane((0.0, 0.0), (0.0, 0.0, 1.0)),
        ],
    )
    def test_rejects_invalid(self, build):
        with pytest.raises(DomainError):
            build()


class TestSceneSpec:
    def test_minimum_resolution(self):
        with pytest.raises(DomainError):
            SceneSpec((), CameraIntrinsics.centered(8, 8), height=8, width=8)

    def test_dolp_table_must_be_complete(self):
        with pytest.raises(DomainError):
            SceneSpec(
                (),
                CameraIntrinsics.centered(16, 16),
                height=16,
                width=16,
                dolp={MATERIAL_DIFFUSE: 0.1},
            )

    def test_rejects_negative_noise(self):
        with pytest.raises(DomainError):
            SceneSpec((), CameraIntrinsics.centered(16, 16), 16, 16, noise_sigma=-1.0)


class TestSceneSampler:
    def test_same_generator_same_scene(self):
        sampler = SceneSampler(height=16, width=16)
        a = sampler.sample(np.random.default_rng(3))
        b = sampler.sample(np.random.default_rng(3))
        assert a == b

    def test_scene_layout(self):
        scene = SceneSampler(height=16, width=16).sample(np.random.default_rng(4))
        assert isinstance(scene.primitives[0], Plane)
        assert isinstance(scene.primitives[1], Plane)
        assert 3 <= len(scene.primitives) <= 5
        assert all(p.material in MATERIAL_MODES for p in scene.primitives)

    def test_restricted_materials(self):
        sampler = SceneSampler(height=16, width=16, materials=(MATERIAL_DIFFUSE,))
        for seed in range(5):
            scene = sampler.sample(np.random.default_rng(seed))
            assert all(p.material == MATERIAL_DIFFUSE for p in scene.primitives[2:])

    def test_explicit_intrinsics(self):
        intrinsics = CameraIntrinsics(20.0, 20.0, 8.0, 8.0)
        sampler = SceneSampler(height=16, width=16, intrinsics=intrinsics)
        assert sampler.camera() is intrinsics

    def test_rejects_unknown_material(self):
        with pytest.raises(DomainError):
            SceneSampler(materials=("velvet",))
