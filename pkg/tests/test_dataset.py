import os

import numpy as np
import pytest

from src.constants import DEGRADATION_MODES, MANIFEST_FILE, THREADS_ENV_VAR
from src.errors import ConfigError, DomainError
from src.managers.dataset_manager import DatasetManager
from src.simulate.dataset import dataset, generate_sample, worker_count
from src.simulate.degrade import DegradationSampler
from src.simulate.scene import SceneSampler

SCENES = SceneSampler(height=16, width=16)
DEGRADATIONS = DegradationSampler()


def assert_same_samples(a, b):
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert x.index == y.index
        assert x.mode == y.mode
        assert x.seed == y.seed
        assert np.array_equal(x.guidance.data, y.guidance.data)
        assert np.array_equal(x.sensor.depth, y.sensor.depth)
        assert np.array_equal(x.sensor.valid, y.sensor.valid)
        assert np.array_equal(x.gt.depth, y.gt.depth)
        assert np.array_equal(x.normals, y.normals)


class TestWorkerCount:
    def test_default(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        assert worker_count() == 1

    def test_from_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "3")
        assert worker_count() == 3

    @pytest.mark.parametrize("raw", ["many", "0", "-2"])
    def test_rejects_bad_values(self, monkeypatch, raw):
        monkeypatch.setenv(THREADS_ENV_VAR, raw)
        with pytest.raises(ConfigError):
            worker_count()


def test_sample_is_deterministic():
    a, _ = generate_sample(2, 11, SCENES, DEGRADATIONS)
    b, _ = generate_sample(2, 11, SCENES, DEGRADATIONS)
    assert_same_samples([a], [b])
    assert a.mode in DEGRADATION_MODES


def test_sensor_never_exceeds_gt_support():
    for index in range(4):
        sample, _ = generate_sample(index, 0, SCENES, DEGRADATIONS)
        dtof = sample.mode == "dtof-transparent"
        if not dtof:
            assert not (sample.sensor.valid & ~sample.gt.valid).any()


def test_serial_and_threaded_agree():
    serial = dataset(4, SCENES, DEGRADATIONS, seed=5, threads=1)
    threaded = dataset(4, SCENES, DEGRADATIONS, seed=5, threads=3)
    assert_same_samples(serial, threaded)


def test_environment_threads(monkeypatch):
    monkeypatch.setenv(THREADS_ENV_VAR, "2")
    assert_same_samples(
        dataset(3, SCENES, DEGRADATIONS, seed=6),
        dataset(3, SCENES, DEGRADATIONS, seed=6, threads=1),
    )


def test_seed_changes_dataset():
    a = dataset(1, SCENES, DEGRADATIONS, seed=1, threads=1)
    b = dataset(1, SCENES, DEGRADATIONS, seed=2, threads=1)
    assert not np.array_equal(a[0].gt.depth, b[0].gt.depth)


def test_rejects_empty_dataset():
    with pytest.raises(DomainError):
        dataset(0, SCENES, DEGRADATIONS, seed=0)


def test_rejects_zero_threads():
    with pytest.raises(ConfigError):
        dataset(1, SCENES, DEGRADATIONS, seed=0, threads=0)


def test_written_dataset_reads_back(tmp_path):
    out = str(tmp_path / "data")
    samples = dataset(3, SCENES, DEGRADATIONS, seed=7, out_dir=out, threads=1)
    assert os.path.exists(os.path.join(out, MANIFEST_FILE))
    manager = DatasetManager(out)
    assert_same_samples(manager.load_all(), samples)
    assert manager.read_intrinsics() == SCENES.camera()
    assert os.path.exists(manager.capture_path(0))
