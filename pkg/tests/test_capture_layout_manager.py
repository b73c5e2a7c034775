import pytest

from src.constants import (
    CAPTURE_GT_DIR,
    CAPTURE_POLARIZATION_DIR,
    CAPTURE_SENSOR_DIRS,
    DEGRADE_DTOF,
    DEGRADE_ITOF,
    DEGRADE_STEREO,
    INTRINSICS_FILE,
)
from src.errors import CorruptFileError
from src.managers.capture_layout_manager import CaptureFrame, CaptureLayoutManager


def touch(root, *parts):
    path = root.joinpath(*parts)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"")


@pytest.fixture
def capture_root(tmp_path):
    touch(tmp_path, INTRINSICS_FILE)
    for frame in ("000", "001", "002"):
        touch(tmp_path, "desk", CAPTURE_POLARIZATION_DIR, f"{frame}.pft")
    for frame in ("000", "001"):
        touch(tmp_path, "desk", CAPTURE_GT_DIR, f"{frame}.pft")
    touch(tmp_path, "desk", CAPTURE_SENSOR_DIRS[DEGRADE_STEREO], "000.pft")
    touch(tmp_path, "desk", CAPTURE_SENSOR_DIRS[DEGRADE_STEREO], "001.pft")
    touch(tmp_path, "desk", CAPTURE_SENSOR_DIRS[DEGRADE_DTOF], "001.pft")
    touch(tmp_path, "desk", CAPTURE_SENSOR_DIRS[DEGRADE_DTOF], "notes.txt")
    return tmp_path


def test_complete_frames(capture_root):
    layout = CaptureLayoutManager(str(capture_root)).scan()
    assert layout.frames == [
        CaptureFrame("desk", "000", (DEGRADE_STEREO,)),
        CaptureFrame("desk", "001", (DEGRADE_STEREO, DEGRADE_DTOF)),
    ]
    assert layout.summary() == "2 usable frames, 1 incomplete"


def test_incomplete_frames_name_what_is_missing(capture_root):
    layout = CaptureLayoutManager(str(capture_root)).scan()
    assert layout.incomplete == {"desk/002": [CAPTURE_GT_DIR, "sensor depth"]}


def test_frames_per_sensor(capture_root):
    layout = CaptureLayoutManager(str(capture_root)).scan()
    assert [f.frame for f in layout.frames_for(DEGRADE_DTOF)] == ["001"]
    assert layout.frames_for(DEGRADE_ITOF) == []


def test_scene_without_ground_truth_folder(capture_root):
    touch(capture_root, "shelf", CAPTURE_POLARIZATION_DIR, "000.pft")
    with pytest.raises(CorruptFileError):
        CaptureLayoutManager(str(capture_root)).scan()


def test_missing_intrinsics(capture_root):
    (capture_root / INTRINSICS_FILE).unlink()
    with pytest.raises(FileNotFoundError):
        CaptureLayoutManager(str(capture_root)).scan()


def test_missing_root(tmp_path):
    with pytest.raises(FileNotFoundError):
        CaptureLayoutManager(str(tmp_path / "absent")).scan()
