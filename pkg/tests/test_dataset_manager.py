import numpy as np
import pytest

from src.constants import MANIFEST_COLUMNS
from src.core.camera import CameraIntrinsics, viewing_field
from src.core.guidance import build_guidance
from src.core.polarization import DofpCapture, decode_dofp
from src.errors import ConfigError, CorruptFileError
from src.managers.dataset_manager import (
    DatasetManager,
    TrainingSample,
    read_intrinsics,
)
from src.model.depth_map import DepthMap


def make_sample(index, mode="stereo-holes"):
    rng = np.random.default_rng(index)
    capture = DofpCapture(rng.uniform(0.0, 2.0, (4, 4, 4)))
    _, state = decode_dofp(capture)
    intrinsics = CameraIntrinsics.centered(4, 4)
    gt_raster = rng.uniform(500.0, 900.0, (4, 4))
    sensor_raster = gt_raster.copy()
    sensor_raster[0] = 0.0
    sample = TrainingSample(
        index=index,
        guidance=build_guidance(state, viewing_field(intrinsics, 4, 4)),
        sensor=DepthMap.from_raster(sensor_raster),
        gt=DepthMap.from_raster(gt_raster),
        normals=np.zeros((3, 4, 4)),
        mode=mode,
        seed=100 + index,
    )
    return sample, capture


def test_file_names():
    names = DatasetManager.file_names(12)
    assert names["sensor_path"] == "00012_sensor.pft"
    assert set(names) == {"guidance_path", "sensor_path", "gt_path", "normals_path"}


def test_write_and_load(tmp_path):
    manager = DatasetManager(str(tmp_path / "set"), create=True)
    rows = []
    for index in (1, 0):
        sample, capture = make_sample(index)
        rows.append(manager.write_sample(sample, capture))
    manager.write_manifest(rows)

    loaded = manager.load_all()
    assert [s.index for s in loaded] == [0, 1]
    original, _ = make_sample(1)
    assert np.array_equal(loaded[1].sensor.valid, original.sensor.valid)
    assert np.array_equal(loaded[1].gt.depth, original.gt.depth)
    assert loaded[1].seed == 101
    assert loaded[1].batch()[0].data.shape == (6, 4, 4)


def test_manifest_columns(tmp_path):
    manager = DatasetManager(str(tmp_path), create=True)
    sample, _ = make_sample(0, mode="itof-fov-crop")
    manager.write_manifest([manager.write_sample(sample)])
    rows = manager.read_manifest()
    assert tuple(rows[0]) == MANIFEST_COLUMNS
    assert rows[0]["degradation_mode"] == "itof-fov-crop"


def test_missing_manifest(tmp_path):
    with pytest.raises(FileNotFoundError):
        DatasetManager(str(tmp_path)).read_manifest()


def test_manifest_without_column(tmp_path):
    (tmp_path / "manifest.csv").write_text("index,guidance_path\n0,a.pft\n")
    with pytest.raises(CorruptFileError):
        DatasetManager(str(tmp_path)).read_manifest()


def test_intrinsics_round_trip(tmp_path):
    manager = DatasetManager(str(tmp_path))
    intrinsics = CameraIntrinsics(fx=50.5, fy=49.0, cx=31.5, cy=23.5)
    manager.write_intrinsics(intrinsics)
    assert manager.read_intrinsics() == intrinsics


@pytest.mark.parametrize("text", ["fx=1\nfy=1\ncx=0\n", "fx=a\nfy=1\ncx=0\ncy=0\n"])
def test_bad_intrinsics(tmp_path, text):
    path = tmp_path / "intrinsics.txt"
    path.write_text(text)
    with pytest.raises(ConfigError):
        read_intrinsics(path)
