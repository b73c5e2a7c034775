"""
Unit tests for the enhancement network.
"""

import math

import numpy as np
import pytest

from src.constants import GUIDANCE_AOLP, GUIDANCE_DOLP, OUTPUT_ABSOLUTE
from src.core.camera import CameraIntrinsics, viewing_field
from src.core.guidance import GuidanceTensor, build_guidance
from src.core.polarization import PolarizationState
from src.errors import ConfigError, DimensionMismatchError, IncompleteParamsError
from src.model.config import GUIDANCE_INTENSITY_ONLY, ModelConfig
from src.model.depth_map import DepthMap
from src.model.network import (
    EnhancementNetwork,
    enhance,
    init_params,
    required_names,
    residual_base,
)
from src.numerics.gradcheck import fd_gradcheck
from src.numerics.params import ParamStore

TINY = ModelConfig(widths=(2, 4), dropout_p=0.0)


def random_guidance(rng, h, w):
    state = PolarizationState(
        intensity=rng.uniform(0.0, 2.0, (h, w)),
        aolp=rng.uniform(0.0, math.pi, (h, w)),
        dolp=rng.uniform(0.0, 1.0, (h, w)),
    )
    return build_guidance(state, viewing_field(CameraIntrinsics.centered(h, w), h, w))


def random_sensor(rng, h, w):
    raster = rng.uniform(500.0, 1500.0, (h, w))
    raster[0, 0] = 0.0
    return DepthMap.from_raster(raster)


def with_live_head(params, rng):
    params["head.weight"] = rng.normal(scale=0.1, size=params["head.weight"].shape)
    return params


class TestParams:
    def test_init_matches_required_names(self):
        assert init_params(TINY).names() == required_names(TINY)

    def test_same_layer_name_same_init(self):
        full = init_params(TINY, seed=3)
        shallow = init_params(ModelConfig(widths=(2, 4), ppfb_stages=1), seed=3)
        assert np.array_equal(full["enc.joint.weight"], shallow["enc.joint.weight"])
        assert np.array_equal(full["ppfb.0.fc_d.weight"], shallow["ppfb.0.fc_d.weight"])
        assert "ppfb.1.lambda" not in shallow

    def test_seed_changes_init(self):
        a = init_params(TINY, seed=0)["enc.depth.weight"]
        b = init_params(TINY, seed=1)["enc.depth.weight"]
        assert not np.array_equal(a, b)

    def test_concat_mode_has_no_fusion_blocks(self):
        config = ModelConfig.for_ablation("no-ppft", widths=(2, 4))
        assert not any(name.startswith("ppfb.") for name in init_params(config))

    def test_missing_tensor(self):
        params = init_params(TINY)
        partial = ParamStore({n: t for n, t in params.items() if n != "head.bias"})
        with pytest.raises(IncompleteParamsError):
            EnhancementNetwork(partial, TINY)


class TestConfig:
    @pytest.mark.parametrize("widths", [(), (4, 4), (8, 4), (0, 2)])
    def test_rejects_bad_widths(self, widths):
        with pytest.raises(ConfigError):
            ModelConfig(widths=widths)

    def test_concat_cannot_carry_blocks(self):
        with pytest.raises(ConfigError):
            ModelConfig(input_mode="concat", ppfb_stages=1)

    def test_unknown_output_mode(self):
        with pytest.raises(ConfigError):
            ModelConfig(output_mode="log")

    def test_foundation_has_no_blocks(self):
        config = ModelConfig.for_foundation(widths=(2, 4))
        assert config.n_ppfb == 0
        assert config.guidance_source == GUIDANCE_INTENSITY_ONLY

    def test_unknown_ablation(self):
        with pytest.raises(ConfigError):
            ModelConfig.for_ablation("late-fusion")

    def test_ablation_overrides(self):
        config = ModelConfig.for_ablation("shallow-ppfb", widths=(2, 4, 8))
        assert config.n_ppfb == 1
        assert config.stages == 3
        assert config.downsampling == 8


class TestForward:
    def test_dead_network_predicts_head_bias(self):
        rng = np.random.default_rng(0)
        config = ModelConfig(widths=(2, 4), head_bias=1.5, output_mode=OUTPUT_ABSOLUTE)
        depth = enhance(
            random_guidance(rng, 8, 8),
            random_sensor(rng, 8, 8),
            init_params(config),
            config,
        )
        assert np.all(depth.depth == 1.5 * config.depth_scale)
        assert depth.valid.all()

    def test_dead_residual_network_fills_sensor_holes(self):
        rng = np.random.default_rng(12)
        sensor = random_sensor(rng, 8, 8)
        depth = enhance(random_guidance(rng, 8, 8), sensor, init_params(TINY), TINY)
        valid = sensor.valid
        assert np.array_equal(depth.depth[valid], sensor.depth[valid])
        assert depth.depth[0, 0] == pytest.approx(sensor.depth[valid].mean())

    def test_residual_base_without_sensor_reading(self):
        empty = DepthMap(np.zeros((4, 4)), np.zeros((4, 4), dtype=bool))
        np.testing.assert_array_equal(residual_base(empty, TINY), TINY.depth_scale)
        absolute = ModelConfig(widths=(2, 4), output_mode=OUTPUT_ABSOLUTE)
        sensor = random_sensor(np.random.default_rng(0), 4, 4)
        assert np.all(residual_base(sensor, absolute) == 0.0)

    def test_fresh_blocks_keep_backbone_output(self):
        rng = np.random.default_rng(13)
        backbone = ModelConfig(widths=(2, 4), ppfb_stages=0, dropout_p=0.0)
        trained = with_live_head(init_params(backbone, seed=5), rng)
        fused = init_params(TINY, seed=5)
        for name in trained.names():
            fused[name] = trained[name]
        guidance, sensor = random_guidance(rng, 8, 8), random_sensor(rng, 8, 8)
        a = enhance(guidance, sensor, trained, backbone)
        b = enhance(guidance, sensor, fused, TINY)
        np.testing.assert_allclose(b.depth, a.depth, rtol=1e-12)

    @pytest.mark.parametrize("size", [(4, 4), (8, 12), (16, 8)])
    def test_output_matches_input_size(self, size):
        rng = np.random.default_rng(1)
        params = with_live_head(init_params(TINY), rng)
        guidance, sensor = random_guidance(rng, *size), random_sensor(rng, *size)
        depth = enhance(guidance, sensor, params, TINY)
        assert depth.shape == size

    def test_output_is_clamped(self):
        rng = np.random.default_rng(2)
        config = ModelConfig(widths=(2, 4), head_bias=-1.0, output_mode=OUTPUT_ABSOLUTE)
        depth = enhance(
            random_guidance(rng, 4, 4),
            random_sensor(rng, 4, 4),
            init_params(config),
            config,
        )
        assert np.all(depth.depth == config.d_min)

    def test_rejects_indivisible_size(self):
        rng = np.random.default_rng(3)
        with pytest.raises(DimensionMismatchError):
            enhance(
                random_guidance(rng, 6, 6),
                random_sensor(rng, 6, 6),
                init_params(TINY),
                TINY,
            )

    def test_rejects_mismatched_inputs(self):
        rng = np.random.default_rng(4)
        with pytest.raises(DimensionMismatchError):
            enhance(
                random_guidance(rng, 4, 4),
                random_sensor(rng, 8, 8),
                init_params(TINY),
                TINY,
            )

    def test_inference_is_deterministic(self):
        rng = np.random.default_rng(5)
        config = ModelConfig(widths=(2, 4), dropout_p=0.5)
        params = with_live_head(init_params(config), rng)
        guidance, sensor = random_guidance(rng, 8, 8), random_sensor(rng, 8, 8)
        a = enhance(guidance, sensor, params, config, seed=1)
        b = enhance(guidance, sensor, params, config, seed=2)
        assert np.array_equal(a.depth, b.depth)

    def test_training_dropout_follows_seed(self):
        rng = np.random.default_rng(6)
        config = ModelConfig(widths=(2, 4), dropout_p=0.5)
        params = with_live_head(init_params(config), rng)
        guidance, sensor = random_guidance(rng, 8, 8), random_sensor(rng, 8, 8)
        a = enhance(guidance, sensor, params, config, training=True, seed=9)
        b = enhance(guidance, sensor, params, config, training=True, seed=9)
        assert np.array_equal(a.depth, b.depth)

    def test_intensity_guidance_ignores_polarization(self):
        rng = np.random.default_rng(7)
        config = ModelConfig(widths=(2, 4), guidance_source=GUIDANCE_INTENSITY_ONLY)
        params = with_live_head(init_params(config), rng)
        guidance = random_guidance(rng, 8, 8)
        altered = guidance.data.copy()
        altered[GUIDANCE_AOLP] = rng.uniform(0.0, math.pi, (8, 8))
        altered[GUIDANCE_DOLP] = rng.uniform(0.0, 1.0, (8, 8))
        sensor = random_sensor(rng, 8, 8)
        a = enhance(guidance, sensor, params, config)
        b = enhance(GuidanceTensor(altered), sensor, params, config)
        assert np.array_equal(a.depth, b.depth)

    def test_polarization_reaches_output(self):
        rng = np.random.default_rng(8)
        params = with_live_head(init_params(TINY), rng)
        guidance = random_guidance(rng, 8, 8)
        altered = guidance.data.copy()
        altered[GUIDANCE_AOLP] = rng.uniform(0.0, math.pi, (8, 8))
        sensor = random_sensor(rng, 8, 8)
        a = enhance(guidance, sensor, params, TINY)
        b = enhance(GuidanceTensor(altered), sensor, params, TINY)
        assert not np.array_equal(a.depth, b.depth)

    def test_zeroed_guidance_paths_ignore_polarization(self):
        rng = np.random.default_rng(9)
        params = with_live_head(init_params(TINY), rng)
        for name in params.names():
            zeroed = name.startswith(("ppfb.", "enc.guidance", "enc.joint"))
            if zeroed and not name.endswith(".lambda"):
                params[name] = np.zeros_like(params[name])
        guidance = random_guidance(rng, 4, 4)
        altered = guidance.data.copy()
        altered[GUIDANCE_AOLP] = 0.0
        altered[GUIDANCE_DOLP] = 1.0
        sensor = random_sensor(rng, 4, 4)
        a = enhance(guidance, sensor, params, TINY)
        b = enhance(GuidanceTensor(altered), sensor, params, TINY)
        assert np.array_equal(a.depth, b.depth)


class TestBackward:
    @pytest.mark.parametrize(
        "config",
        [
            TINY,
            ModelConfig.for_ablation("no-ppft", widths=(2, 4)),
            ModelConfig.for_ablation("shallow-ppfb", widths=(2, 4)),
        ],
        ids=["ppft", "no-ppft", "shallow"],
    )
    def test_gradcheck(self, config):
        rng = np.random.default_rng(10)
        params = with_live_head(init_params(config, seed=4), rng)
        guidance, sensor = random_guidance(rng, 4, 4), random_sensor(rng, 4, 4)
        weights = rng.normal(size=(4, 4)) / config.depth_scale

        def f(store):
            depth = enhance(guidance, sensor, store, config)
            return float(np.sum(weights * depth.depth))

        network = EnhancementNetwork(params, config)
        _, cache = network.forward(guidance, sensor)
        grads = network.backward(cache, weights)
        assert sorted(grads) == params.names()
        assert fd_gradcheck(f, params, grads) < 1e-4

    def test_clamped_pixels_pass_no_gradient(self):
        rng = np.random.default_rng(11)
        config = ModelConfig(widths=(2, 4), head_bias=-1.0, output_mode=OUTPUT_ABSOLUTE)
        network = EnhancementNetwork(init_params(config), config)
        _, cache = network.forward(random_guidance(rng, 4, 4), random_sensor(rng, 4, 4))
        grads = network.backward(cache, np.ones((4, 4)))
        assert all(np.all(g == 0.0) for g in grads.values())
