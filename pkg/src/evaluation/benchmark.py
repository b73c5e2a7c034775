"""
Seeded ablation benchmark on synthetic data.

Per seed: render a training split and a held-out split from one sample
stream, pretrain the backbone on intensity guidance, fine-tune every
ablation mode for the same step budget and score the held-out split.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from src.constants import (
    ABLATION_MODES,
    ABLATION_NO_PPFT,
    AGGREGATE_ROW,
    DEFAULT_DROPOUT_P,
    DEFAULT_LEARNING_RATE,
    DEFAULT_STAGE_WIDTHS,
    DEFAULT_STEPS,
    DEGRADATION_MODES,
)
from src.errors import DomainError
from src.evaluation.metrics import DepthMetrics, pooled_depth_table
from src.managers.archive_manager import WeightArchive
from src.managers.dataset_manager import TrainingSample
from src.model.config import ModelConfig
from src.model.network import enhance, init_params
from src.model.pretrained import FreezePolicy, load_pretrained
from src.model.training import OptimizerState, Trainer
from src.numerics.params import ParamStore
from src.simulate.dataset import generate_sample
from src.simulate.degrade import DegradationSampler
from src.simulate.scene import SceneSampler

logger = logging.getLogger(__name__)

Table = List[Tuple[str, DepthMetrics]]


@dataclass(frozen=True)
class BenchmarkSettings:
    """Split sizes, image size, architecture and step budgets of one run."""

    train_samples: int = 200
    test_samples: int = 50
    resolution: int = 64
    widths: Tuple[int, ...] = DEFAULT_STAGE_WIDTHS
    pretrain_steps: int = DEFAULT_STEPS
    steps: int = DEFAULT_STEPS
    learning_rate: float = DEFAULT_LEARNING_RATE
    dropout_p: float = DEFAULT_DROPOUT_P
    ablations: Tuple[str, ...] = ABLATION_MODES
    degradations: Tuple[str, ...] = DEGRADATION_MODES

    def __post_init__(self):
        if self.train_samples < 1 or self.test_samples < 1:
            raise DomainError("both splits need at least one sample")
        if self.pretrain_steps < 0 or self.steps < 0:
            raise DomainError("step budgets must be >= 0")
        for mode in self.ablations:
            if mode not in ABLATION_MODES:
                raise DomainError(f"unknown ablation '{mode}'")

    def model_config(self, ablation: str) -> ModelConfig:
        return ModelConfig.for_ablation(
            ablation, widths=self.widths, dropout_p=self.dropout_p
        )

    def foundation_config(self) -> ModelConfig:
        return ModelConfig.for_foundation(widths=self.widths, dropout_p=self.dropout_p)


@dataclass
class SeedResult:
    """Held-out metric tables of every ablation mode for one seed."""

    seed: int
    tables: Dict[str, Table] = field(default_factory=dict)

    def rmse(self, ablation: str, degradation: str = AGGREGATE_ROW) -> float:
        for mode, metrics in self.tables[ablation]:
            if mode == degradation:
                return metrics.rmse
        raise DomainError(f"seed {self.seed}: no '{degradation}' row for {ablation}")


def splits(
    seed: int, settings: BenchmarkSettings
) -> Tuple[List[TrainingSample], List[TrainingSample]]:
    """Training and held-out samples: indices ``[0, n)`` and ``[n, n + m)``."""
    scenes = SceneSampler(height=settings.resolution, width=settings.resolution)
    degradations = DegradationSampler(modes=settings.degradations)
    total = settings.train_samples + settings.test_samples
    samples = [generate_sample(i, seed, scenes, degradations)[0] for i in range(total)]
    return samples[: settings.train_samples], samples[settings.train_samples :]


def fit(
    model: ModelConfig,
    params: ParamStore,
    train: Sequence[TrainingSample],
    steps: int,
    seed: int,
    settings: BenchmarkSettings,
) -> ParamStore:
    trainer = Trainer(model, OptimizerState(learning_rate=settings.learning_rate))
    params, _ = trainer.fit(params, [s.batch() for s in train], steps, seed=seed)
    return params


def evaluate(
    model: ModelConfig, params: ParamStore, test: Sequence[TrainingSample]
) -> Table:
    rows = [(s.mode, enhance(s.guidance, s.sensor, params, model), s.gt) for s in test]
    return pooled_depth_table(rows)


def run_seed(seed: int, settings: BenchmarkSettings) -> SeedResult:
    """Pretrain once, then fine-tune and score every configured ablation."""
    train, test = splits(seed, settings)
    backbone = settings.foundation_config()
    params = init_params(backbone, seed)
    params = fit(backbone, params, train, settings.pretrain_steps, seed, settings)
    foundation = WeightArchive.from_params(params)

    result = SeedResult(seed)
    for ablation in settings.ablations:
        model = settings.model_config(ablation)
        params = init_params(model, seed)
        if ablation != ABLATION_NO_PPFT:
            load_pretrained(params, foundation, FreezePolicy.from_config(model))
        params = fit(model, params, train, settings.steps, seed, settings)
        result.tables[ablation] = evaluate(model, params, test)
        logger.info(
            "seed %d %s: held-out rmse %.3f", seed, ablation, result.rmse(ablation)
        )
    return result


def run_benchmark(
    seeds: Sequence[int], settings: BenchmarkSettings = BenchmarkSettings()
) -> List[SeedResult]:
    return [run_seed(seed, settings) for seed in seeds]


def wins(
    results: Sequence[SeedResult],
    better: str,
    worse: str,
    degradation: str = AGGREGATE_ROW,
    strict: bool = True,
) -> int:
    """Seeds on which ``better`` has lower (or, non-strict, equal) RMSE."""
    count = 0
    for result in results:
        a, b = result.rmse(better, degradation), result.rmse(worse, degradation)
        count += int(a < b if strict else a <= b)
    return count
