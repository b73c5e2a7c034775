"""
Deterministic synthetic dataset generation.

Sample ``i`` of a dataset with seed ``s`` draws everything from
``default_rng([s, i])``, so serial and threaded generation agree bit for bit.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from src.constants import THREADS_ENV_VAR
from src.core.camera import viewing_field
from src.core.guidance import build_guidance
from src.core.polarization import decode_dofp
from src.errors import ConfigError, DomainError
from src.managers.dataset_manager import DatasetManager, TrainingSample
from src.simulate.degrade import DegradationSampler, degrade
from src.simulate.render import RenderResult, render
from src.simulate.scene import SceneSampler

logger = logging.getLogger(__name__)


def worker_count() -> int:
    """Thread cap from ``POLARFUSE_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 1
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got '{raw}'")
    if count < 1:
        raise ConfigError(f"{THREADS_ENV_VAR} must be >= 1, got {count}")
    return count


def generate_sample(
    index: int,
    seed: int,
    scene_sampler: SceneSampler,
    degradation_sampler: DegradationSampler,
) -> Tuple[TrainingSample, RenderResult]:
    """Render, decode and degrade sample ``index``."""
    rng = np.random.default_rng([seed, index])
    scene = scene_sampler.sample(rng)
    spec = degradation_sampler.sample(rng, (scene.height, scene.width))
    result = render(scene)
    _, state = decode_dofp(result.capture)
    view = viewing_field(scene.intrinsics, scene.height, scene.width)
    sensor = degrade(result.gt, spec, result.materials, result.see_through)
    sample = TrainingSample(
        index=index,
        guidance=build_guidance(state, view),
        sensor=sensor,
        gt=result.gt,
        normals=result.normals,
        mode=spec.mode,
        seed=scene.seed,
    )
    logger.debug(
        "sample %d: mode=%s gt=%d sensor=%d valid pixels",
        index,
        spec.mode,
        result.gt.n_valid,
        sensor.n_valid,
    )
    return sample, result


def dataset(
    n: int,
    scene_sampler: SceneSampler,
    degradation_sampler: DegradationSampler,
    seed: int,
    out_dir: Optional[str] = None,
    threads: Optional[int] = None,
) -> List[TrainingSample]:
    """
    Generate ``n`` samples, optionally writing them with a manifest.

    Args:
        n: Number of samples, ``>= 1``.
        scene_sampler: Scene distribution.
        degradation_sampler: Degradation distribution.
        seed: Dataset seed.
        out_dir: If given, PFT1 rasters, DoFP captures, ``manifest.csv``
            and ``intrinsics.txt`` are written there.
        threads: Worker cap; defaults to ``POLARFUSE_THREADS``.

    Returns:
        List[TrainingSample]: Samples in index order.
    """
    if n < 1:
        raise DomainError(f"dataset size must be >= 1, got {n}")
    workers = worker_count() if threads is None else threads
    if workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {workers}")

    manager = DatasetManager(out_dir, create=True) if out_dir is not None else None

    def build(index: int) -> Tuple[TrainingSample, dict]:
        sample, result = generate_sample(
            index, seed, scene_sampler, degradation_sampler
        )
        row = manager.write_sample(sample, result.capture) if manager else {}
        return sample, row

    if workers == 1:
        built = [build(i) for i in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            built = list(pool.map(build, range(n)))

    samples = [sample for sample, _ in built]
    if manager is not None:
        manager.write_manifest([row for _, row in built])
        manager.write_intrinsics(scene_sampler.camera())
    logger.info("generated %d samples (seed %d, %d workers)", n, seed, workers)
    return samples
