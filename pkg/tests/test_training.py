"""
Unit tests for gradient-descent training.
"""

import math

import numpy as np
import pytest

from src.constants import LOSS_LOG_COLUMNS
from src.core.camera import CameraIntrinsics, viewing_field
from src.core.guidance import build_guidance
from src.core.polarization import PolarizationState
from src.errors import DomainError, NumericFailureError
from src.managers.archive_manager import WeightArchive
from src.managers.run_log_manager import RunLogManager
from src.model.config import ModelConfig
from src.model.depth_map import DepthMap
from src.model.loss import depth_loss
from src.model.network import enhance, init_params
from src.model.pretrained import FreezePolicy, load_pretrained
from src.model.training import OptimizerState, Trainer, gradient_step, train_step

CONFIG = ModelConfig(widths=(2, 4), dropout_p=0.0)


def make_sample(seed, size=8, target=1100.0, bias=0.0):
    rng = np.random.default_rng(seed)
    state = PolarizationState(
        intensity=rng.uniform(0.0, 2.0, (size, size)),
        aolp=rng.uniform(0.0, math.pi, (size, size)),
        dolp=rng.uniform(0.0, 1.0, (size, size)),
    )
    view = viewing_field(CameraIntrinsics.centered(size, size), size, size)
    gt = DepthMap.dense(target + rng.uniform(-50.0, 50.0, (size, size)))
    sensor_raster = gt.depth + bias + rng.normal(scale=10.0, size=(size, size))
    sensor_raster[: size // 4] = 0.0
    return build_guidance(state, view), DepthMap.from_raster(sensor_raster), gt


def assert_same(a, b):
    assert a.names() == b.names()
    for name in a.names():
        assert np.array_equal(a[name], b[name]), name


class TestOptimizerState:
    def test_rejects_negative_learning_rate(self):
        with pytest.raises(DomainError):
            OptimizerState(learning_rate=-0.1)

    def test_rejects_non_positive_clip(self):
        with pytest.raises(DomainError):
            OptimizerState(clip_norm=0.0)


class TestTrainStep:
    def test_zero_learning_rate_keeps_params(self):
        params = init_params(CONFIG)
        optimizer = OptimizerState(learning_rate=0.0)
        updated, loss = train_step(params, make_sample(0), optimizer, CONFIG)
        assert_same(updated, params)
        assert loss > 0.0
        assert optimizer.step == 1

    def test_reported_loss_is_before_the_update(self):
        params = init_params(CONFIG)
        guidance, sensor, gt = make_sample(1)
        _, loss = train_step(params, (guidance, sensor, gt), OptimizerState(), CONFIG)
        expected = depth_loss(enhance(guidance, sensor, params, CONFIG), gt)
        assert loss == pytest.approx(expected, rel=1e-12)

    def test_input_store_is_not_modified(self):
        params = init_params(CONFIG)
        before = params.copy()
        train_step(params, make_sample(2), OptimizerState(learning_rate=0.5), CONFIG)
        assert_same(params, before)

    def test_fully_frozen_policy_keeps_params(self):
        params = init_params(CONFIG)
        load_pretrained(params, WeightArchive({}), FreezePolicy(("",)))
        updated = params
        for t in range(3):
            updated, _ = train_step(
                updated, make_sample(t), OptimizerState(learning_rate=1.0), CONFIG
            )
        assert_same(updated, params)

    def test_frozen_prefix_is_bit_identical(self):
        params = init_params(CONFIG)
        load_pretrained(params, WeightArchive({}), FreezePolicy(("enc.",)))
        updated, _ = train_step(
            params, make_sample(3), OptimizerState(learning_rate=0.1), CONFIG
        )
        for name in params.names():
            if name.startswith("enc."):
                assert np.array_equal(updated[name], params[name])
        assert not np.array_equal(updated["head.bias"], params["head.bias"])

    def test_clipped_update_norm(self):
        params = init_params(CONFIG)
        sample = make_sample(4, bias=80.0)
        optimizer = OptimizerState(learning_rate=0.01)
        result = gradient_step(params, sample, optimizer, CONFIG)
        moved = math.sqrt(
            sum(
                float(np.sum((result.params[n] - params[n]) ** 2))
                for n in params.names()
            )
        )
        assert result.grad_norm > 1.0
        assert moved == pytest.approx(0.01, rel=1e-9)

    def test_unclipped_update(self):
        params = init_params(CONFIG)
        result = gradient_step(
            params,
            make_sample(5),
            OptimizerState(learning_rate=1e-3, clip_norm=None),
            CONFIG,
        )
        delta = result.params["head.bias"] - params["head.bias"]
        assert delta[0] < 0.0 or delta[0] > 0.0

    def test_same_seed_same_step(self):
        config = ModelConfig(widths=(2, 4), dropout_p=0.3)
        params = init_params(config)
        sample = make_sample(6)
        a, _ = train_step(params, sample, OptimizerState(), config, seed=[1, 2])
        b, _ = train_step(params, sample, OptimizerState(), config, seed=[1, 2])
        assert_same(a, b)

    def test_non_finite_parameters_abort_the_step(self):
        params = init_params(CONFIG)
        params["head.bias"] = np.array([np.nan])
        optimizer = OptimizerState()
        with pytest.raises(NumericFailureError):
            train_step(params, make_sample(7), optimizer, CONFIG)
        assert optimizer.step == 0


class TestTrainer:
    def test_schedule_visits_every_sample_each_epoch(self):
        trainer = Trainer(CONFIG, OptimizerState())
        order = trainer.schedule(4, 10, seed=3)
        assert len(order) == 10
        assert sorted(order[:4]) == [0, 1, 2, 3]
        assert sorted(order[4:8]) == [0, 1, 2, 3]
        assert order == trainer.schedule(4, 10, seed=3)

    def test_needs_samples(self):
        with pytest.raises(DomainError):
            Trainer(CONFIG, OptimizerState()).fit(init_params(CONFIG), [], 5)

    def test_zero_steps(self):
        params = init_params(CONFIG)
        trainer = Trainer(CONFIG, OptimizerState())
        out, history = trainer.fit(params, [make_sample(0)], 0)
        assert history == []
        assert_same(out, params)

    def test_log_rows(self, tmp_path):
        log = RunLogManager(tmp_path / "loss.csv", LOSS_LOG_COLUMNS)
        trainer = Trainer(CONFIG, OptimizerState(), log, log_every=2)
        _, history = trainer.fit(init_params(CONFIG), [make_sample(0)], 5)
        assert len(history) == 5
        assert [row["step"] for row in log.rows] == [0, 2, 4]
        assert log.rows[0]["loss"] == history[0]

    @pytest.mark.slow
    def test_overfits_one_sample(self):
        sample = make_sample(8, size=32, bias=80.0)
        trainer = Trainer(CONFIG, OptimizerState(learning_rate=0.01))
        _, history = trainer.fit(init_params(CONFIG), [sample], 200, seed=0)
        assert np.mean(history[-20:]) < np.mean(history[:20])
        assert history[-1] < history[0]
