import numpy as np
import pytest

from src.constants import (
    BACKGROUND_CODE,
    DEGRADE_DTOF,
    DEGRADE_ITOF,
    DEGRADE_STEREO,
    MATERIAL_CODES,
    MATERIAL_SPECULAR,
    MATERIAL_TRANSPARENT,
)
from src.errors import DimensionMismatchError, DomainError
from src.model.depth_map import DepthMap
from src.simulate.degrade import DegradationSampler, DegradationSpec, degrade

DIFFUSE = MATERIAL_CODES["diffuse"]


@pytest.fixture
def gt():
    return DepthMap.dense(np.linspace(800.0, 1200.0, 64).reshape(8, 8))


@pytest.fixture
def materials():
    return np.full((8, 8), DIFFUSE, dtype=np.int64)


def test_stereo_without_holes_is_identity(gt, materials):
    sensor = degrade(gt, DegradationSpec(DEGRADE_STEREO), materials)
    assert np.array_equal(sensor.depth, gt.depth)
    assert sensor.valid.all()


def test_stereo_full_hole_rate(gt, materials):
    sensor = degrade(gt, DegradationSpec(DEGRADE_STEREO, hole_rate=1.0), materials)
    assert sensor.n_valid == 0
    assert np.all(sensor.depth == 0.0)


def test_stereo_loses_low_texture_material(gt, materials):
    materials[2:4, 2:4] = MATERIAL_CODES[MATERIAL_SPECULAR]
    sensor = degrade(gt, DegradationSpec(DEGRADE_STEREO), materials)
    assert not sensor.valid[2:4, 2:4].any()
    assert sensor.n_valid == 60


def test_stereo_holes_follow_seed(gt, materials):
    spec = DegradationSpec(DEGRADE_STEREO, hole_rate=0.3, seed=4)
    a = degrade(gt, spec, materials)
    b = degrade(gt, spec, materials)
    assert np.array_equal(a.valid, b.valid)
    assert 0 < a.n_valid < 64


@pytest.mark.parametrize("hole_rate", [0.05, 0.2, 0.5])
@pytest.mark.parametrize("seed", [0, 7])
def test_stereo_invalid_fraction_tracks_hole_rate(hole_rate, seed):
    gt = DepthMap.dense(np.full((50, 50), 1000.0))
    materials = np.full((50, 50), DIFFUSE, dtype=np.int64)
    spec = DegradationSpec(DEGRADE_STEREO, hole_rate=hole_rate, seed=seed)
    invalid = 1.0 - degrade(gt, spec, materials).n_valid / gt.n_valid
    assert abs(invalid - hole_rate) <= 0.05


@pytest.mark.parametrize(
    "mode, expected_invalid", [(DEGRADE_DTOF, 0), (DEGRADE_ITOF, 2500 - 46 * 46)]
)
def test_hole_rate_only_drives_stereo(mode, expected_invalid):
    gt = DepthMap.dense(np.full((50, 50), 1000.0))
    materials = np.full((50, 50), DIFFUSE, dtype=np.int64)
    spec = DegradationSpec(mode, hole_rate=0.5, crop_margin=2, seed=3)
    assert 2500 - degrade(gt, spec, materials).n_valid == expected_invalid


def test_itof_crops_border(gt, materials):
    sensor = degrade(gt, DegradationSpec(DEGRADE_ITOF, crop_margin=2), materials)
    assert sensor.valid[2:6, 2:6].all()
    assert sensor.n_valid == 16
    assert np.array_equal(sensor.depth[2:6, 2:6], gt.depth[2:6, 2:6])


def test_itof_margin_too_large(gt, materials):
    with pytest.raises(DomainError):
        degrade(gt, DegradationSpec(DEGRADE_ITOF, crop_margin=4), materials)


def test_dtof_sees_through_transparent(gt, materials):
    materials[0, :] = MATERIAL_CODES[MATERIAL_TRANSPARENT]
    behind = DepthMap.dense(np.full((8, 8), 1500.0))
    spec = DegradationSpec(DEGRADE_DTOF, transparent_offset=10.0)
    sensor = degrade(gt, spec, materials, behind)
    np.testing.assert_allclose(sensor.depth[0], 1510.0)
    assert np.array_equal(sensor.depth[1:], gt.depth[1:])


def test_dtof_background_behind_glass_is_lost(gt, materials):
    materials[0, 0] = MATERIAL_CODES[MATERIAL_TRANSPARENT]
    behind = DepthMap(np.zeros((8, 8)), np.zeros((8, 8), dtype=bool))
    sensor = degrade(gt, DegradationSpec(DEGRADE_DTOF), materials, behind)
    assert not sensor.valid[0, 0]
    assert sensor.n_valid == 63


def test_dtof_needs_see_through(gt, materials):
    materials[0, 0] = MATERIAL_CODES[MATERIAL_TRANSPARENT]
    with pytest.raises(DimensionMismatchError):
        degrade(gt, DegradationSpec(DEGRADE_DTOF), materials)


def test_dtof_without_glass_is_identity(gt, materials):
    sensor = degrade(gt, DegradationSpec(DEGRADE_DTOF), materials)
    assert np.array_equal(sensor.depth, gt.depth)


def test_noise_is_seeded_and_gt_untouched(gt, materials):
    before = gt.depth.copy()
    spec = DegradationSpec(DEGRADE_STEREO, depth_noise=5.0, seed=1)
    a = degrade(gt, spec, materials)
    b = degrade(gt, spec, materials)
    assert np.array_equal(a.depth, b.depth)
    assert not np.array_equal(a.depth, gt.depth)
    assert np.array_equal(gt.depth, before)


def test_invalid_gt_stays_invalid(materials):
    raster = np.full((8, 8), 1000.0)
    raster[3, 3] = 0.0
    materials[3, 3] = BACKGROUND_CODE
    sensor = degrade(
        DepthMap.from_raster(raster), DegradationSpec(DEGRADE_STEREO), materials
    )
    assert not sensor.valid[3, 3]


def test_material_shape_mismatch(gt):
    with pytest.raises(DimensionMismatchError):
        degrade(gt, DegradationSpec(DEGRADE_STEREO), np.zeros((4, 4), dtype=np.int64))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mode": "lidar"},
        {"mode": DEGRADE_STEREO, "hole_rate": 1.5},
        {"mode": DEGRADE_ITOF, "crop_margin": -1},
        {"mode": DEGRADE_STEREO, "depth_noise": -1.0},
        {"mode": DEGRADE_STEREO, "low_texture_materials": ("velvet",)},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(DomainError):
        DegradationSpec(**kwargs)


class TestSampler:
    def test_restricted_modes(self):
        sampler = DegradationSampler(modes=(DEGRADE_ITOF,))
        rng = np.random.default_rng(0)
        for _ in range(5):
            spec = sampler.sample(rng)
            assert spec.mode == DEGRADE_ITOF
            assert 2 <= spec.crop_margin <= 8

    def test_crop_margin_fits_small_images(self):
        sampler = DegradationSampler(modes=(DEGRADE_ITOF,), crop_margin=(8, 8))
        spec = sampler.sample(np.random.default_rng(1), (16, 24))
        assert spec.crop_margin == 4
        gt = DepthMap.from_raster(np.full((16, 24), 1000.0))
        materials = np.full((16, 24), DIFFUSE)
        assert degrade(gt, spec, materials).n_valid > 0

    def test_same_generator_same_spec(self):
        sampler = DegradationSampler()
        a = sampler.sample(np.random.default_rng(3))
        b = sampler.sample(np.random.default_rng(3))
        assert a == b

    def test_rejects_empty_modes(self):
        with pytest.raises(DomainError):
            DegradationSampler(modes=())
