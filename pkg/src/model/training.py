"""
Gradient-descent training of the enhancement network.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.constants import (
    DEFAULT_CLIP_NORM,
    DEFAULT_LEARNING_RATE,
    DEFAULT_LOG_EVERY,
    LAMBDA_FLOOR,
)
from src.core.guidance import GuidanceTensor
from src.errors import DomainError, NumericFailureError
from src.evaluation.metrics import depth_metrics
from src.managers.run_log_manager import RunLogManager
from src.model.config import ModelConfig
from src.model.depth_map import DepthMap
from src.model.loss import depth_loss, depth_loss_grad
from src.model.network import EnhancementNetwork
from src.numerics.layers import Seed
from src.numerics.params import ParamStore

logger = logging.getLogger(__name__)

Sample = Tuple[GuidanceTensor, DepthMap, DepthMap]


@dataclass
class OptimizerState:
    """
    Plain gradient descent with optional global-norm clipping.

    Attributes
    ----------
    learning_rate : float
        Fixed step size, ``>= 0``.
    clip_norm : float, optional
        Gradients are rescaled so their global norm is at most this value;
        ``None`` disables clipping.
    step : int
        Number of completed steps.
    """

    learning_rate: float = DEFAULT_LEARNING_RATE
    clip_norm: Optional[float] = DEFAULT_CLIP_NORM
    step: int = 0

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise DomainError(f"learning rate must be >= 0, got {self.learning_rate}")
        if self.clip_norm is not None and not self.clip_norm > 0:
            raise DomainError(f"clip norm must be positive, got {self.clip_norm}")


@dataclass
class StepResult:
    params: ParamStore
    loss: float
    prediction: DepthMap
    grad_norm: float


def gradient_step(
    params: ParamStore,
    batch: Sample,
    optimizer: OptimizerState,
    config: ModelConfig,
    seed: Seed = 0,
) -> StepResult:
    """One descent step; the input store is never modified."""
    guidance, sensor, gt = batch
    network = EnhancementNetwork(params, config)
    prediction, cache = network.forward(guidance, sensor, training=True, seed=seed)
    value = depth_loss(prediction, gt)
    if not math.isfinite(value):
        raise NumericFailureError("train_step", f"loss is {value}")

    grads = network.backward(cache, depth_loss_grad(prediction, gt))
    trainable = params.trainable_names()
    grad_norm = math.sqrt(sum(float(np.sum(grads[n] ** 2)) for n in trainable))
    if not math.isfinite(grad_norm):
        raise NumericFailureError("train_step", "non-finite gradient")

    scale = optimizer.learning_rate
    if optimizer.clip_norm is not None and grad_norm > optimizer.clip_norm:
        scale *= optimizer.clip_norm / grad_norm

    updated = params.copy()
    if scale > 0:
        for name in trainable:
            value_after = params[name] - scale * grads[name]
            if name.endswith(".lambda"):
                value_after = np.maximum(value_after, LAMBDA_FLOOR)
            updated[name] = value_after
    optimizer.step += 1
    return StepResult(updated, value, prediction, grad_norm)


def train_step(
    params: ParamStore,
    batch: Sample,
    optimizer: OptimizerState,
    config: ModelConfig,
    seed: Seed = 0,
) -> Tuple[ParamStore, float]:
    """Returns the updated parameters and the loss before the update.

    Raises NumericFailureError (and leaves ``optimizer`` untouched) if the
    loss or any gradient is not finite.
    """
    result = gradient_step(params, batch, optimizer, config, seed)
    return result.params, result.loss


class Trainer:
    """Runs a fixed number of steps over a sample list and logs progress."""

    def __init__(
        self,
        config: ModelConfig,
        optimizer: OptimizerState,
        log: Optional[RunLogManager] = None,
        log_every: int = DEFAULT_LOG_EVERY,
    ):
        """
        Args:
            config (ModelConfig): Network configuration.
            optimizer (OptimizerState): Step size and clipping.
            log (RunLogManager, optional): Receives (step, loss, rmse, mae).
            log_every (int): Logging period in steps.
        """
        self._config = config
        self._optimizer = optimizer
        self._log = log
        self._log_every = max(1, log_every)

    @property
    def optimizer(self) -> OptimizerState:
        return self._optimizer

    def schedule(self, n_samples: int, steps: int, seed: int) -> List[int]:
        """Sample index per step: a fresh seeded permutation every epoch."""
        rng = np.random.default_rng([seed, n_samples])
        order: List[int] = []
        while len(order) < steps:
            order.extend(int(i) for i in rng.permutation(n_samples))
        return order[:steps]

    def fit(
        self, params: ParamStore, samples: Sequence[Sample], steps: int, seed: int = 0
    ) -> Tuple[ParamStore, List[float]]:
        """Train for ``steps`` steps; returns final params and per-step loss."""
        if not samples:
            raise DomainError("training needs at least one sample")
        if steps < 0:
            raise DomainError(f"step count must be >= 0, got {steps}")
        history: List[float] = []
        for t, index in enumerate(self.schedule(len(samples), steps, seed)):
            result = gradient_step(
                params, samples[index], self._optimizer, self._config, seed=[seed, t]
            )
            params = result.params
            history.append(result.loss)
            if t % self._log_every == 0 or t == steps - 1:
                metrics = depth_metrics(result.prediction, samples[index][2])
                logger.info(
                    "step %d loss %.4f rmse %.3f mae %.3f",
                    t,
                    result.loss,
                    metrics.rmse,
                    metrics.mae,
                )
                if self._log is not None:
                    self._log.append(
                        {
                            "step": t,
                            "loss": result.loss,
                            "rmse": metrics.rmse,
                            "mae": metrics.mae,
                        }
                    )
        return params, history
