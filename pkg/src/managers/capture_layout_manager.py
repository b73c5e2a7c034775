"""
Layout check for directories of recorded (non-synthetic) captures.

Expected structure::

    <root>/
        intrinsics.txt
        <scene>/
            polarization/<frame>.pft   [4, H, W] DoFP intensities
            gt/<frame>.pft             [H, W] depth in mm, 0 = unknown
            depth_stereo/<frame>.pft   one folder per sensor, all optional
            depth_dtof/<frame>.pft
            depth_itof/<frame>.pft

Only the layout is checked; frame contents are not read.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from src.constants import (
    CAPTURE_FRAME_SUFFIX,
    CAPTURE_GT_DIR,
    CAPTURE_POLARIZATION_DIR,
    CAPTURE_SENSOR_DIRS,
    INTRINSICS_FILE,
)
from src.errors import CorruptFileError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CaptureFrame:
    """One frame with guidance, ground truth and at least one sensor depth."""

    scene: str
    frame: str
    sensors: Tuple[str, ...]


@dataclass
class CaptureLayout:
    """Result of ``CaptureLayoutManager.scan``."""

    frames: List[CaptureFrame] = field(default_factory=list)
    incomplete: Dict[str, List[str]] = field(default_factory=dict)

    def frames_for(self, mode: str) -> List[CaptureFrame]:
        return [f for f in self.frames if mode in f.sensors]

    def summary(self) -> str:
        return f"{len(self.frames)} usable frames, {len(self.incomplete)} incomplete"


class CaptureLayoutManager:
    """Checks that a capture directory follows the expected layout."""

    def __init__(self, root: str):
        self._root = root

    @property
    def root(self) -> str:
        return self._root

    @staticmethod
    def _frames(folder: str) -> List[str]:
        if not os.path.isdir(folder):
            return []
        return sorted(
            name[: -len(CAPTURE_FRAME_SUFFIX)]
            for name in os.listdir(folder)
            if name.endswith(CAPTURE_FRAME_SUFFIX)
        )

    def scenes(self) -> List[str]:
        if not os.path.isdir(self._root):
            raise FileNotFoundError(f"no capture directory '{self._root}'")
        return sorted(
            name
            for name in os.listdir(self._root)
            if os.path.isdir(os.path.join(self._root, name))
        )

    def scan(self) -> CaptureLayout:
        """
        List the usable frames of every scene.

        Raises:
            FileNotFoundError: The root or its intrinsics file is missing.
            CorruptFileError: A scene has no polarization or gt folder.
        """
        scenes = self.scenes()
        intrinsics = os.path.join(self._root, INTRINSICS_FILE)
        if not os.path.isfile(intrinsics):
            raise FileNotFoundError(f"intrinsics file not found: {intrinsics}")

        layout = CaptureLayout()
        for scene in scenes:
            base = os.path.join(self._root, scene)
            for required in (CAPTURE_POLARIZATION_DIR, CAPTURE_GT_DIR):
                if not os.path.isdir(os.path.join(base, required)):
                    raise CorruptFileError(base, required, "missing folder")
            guidance = set(self._frames(os.path.join(base, CAPTURE_POLARIZATION_DIR)))
            gt = set(self._frames(os.path.join(base, CAPTURE_GT_DIR)))
            sensors = {
                mode: set(self._frames(os.path.join(base, folder)))
                for mode, folder in CAPTURE_SENSOR_DIRS.items()
            }
            for frame in sorted(guidance | gt):
                available = tuple(m for m, frames in sensors.items() if frame in frames)
                missing = [
                    name
                    for name, present in (
                        (CAPTURE_POLARIZATION_DIR, frame in guidance),
                        (CAPTURE_GT_DIR, frame in gt),
                        ("sensor depth", bool(available)),
                    )
                    if not present
                ]
                key = f"{scene}/{frame}"
                if missing:
                    layout.incomplete[key] = missing
                    logger.debug("%s lacks %s", key, ", ".join(missing))
                else:
                    layout.frames.append(CaptureFrame(scene, frame, available))
        logger.info("%s: %s", self._root, layout.summary())
        return layout
