import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from src.constants import INTRINSICS_FILE, MANIFEST_COLUMNS, MANIFEST_FILE
from src.core.camera import CameraIntrinsics
from src.core.guidance import GuidanceTensor
from src.core.polarization import DofpCapture
from src.errors import ConfigError, CorruptFileError
from src.managers.config_manager import read_key_values, write_key_values
from src.managers.run_log_manager import RunLogManager
from src.managers.tensor_file_manager import read_tensor, write_tensor
from src.model.depth_map import DepthMap

logger = logging.getLogger(__name__)


def read_intrinsics(path) -> CameraIntrinsics:
    """Camera intrinsics from a key=value file with fx, fy, cx and cy."""
    values = read_key_values(path)
    try:
        return CameraIntrinsics.from_dict({k: float(v) for k, v in values.items()})
    except (KeyError, ValueError) as e:
        raise ConfigError(f"bad intrinsics in '{path}': {e}")


@dataclass(frozen=True)
class TrainingSample:
    """One dataset entry as used by training and evaluation."""

    index: int
    guidance: GuidanceTensor
    sensor: DepthMap
    gt: DepthMap
    normals: npt.NDArray[np.float64]
    mode: str
    seed: int

    def batch(self) -> Tuple[GuidanceTensor, DepthMap, DepthMap]:
        return self.guidance, self.sensor, self.gt


class DatasetManager:
    """Reads and writes a dataset directory: PFT1 rasters plus a manifest."""

    def __init__(self, data_dir: str, create: bool = False):
        """
        Args:
            data_dir (str): Dataset directory.
            create (bool): Create the directory if it does not exist.
        """
        self._data_dir = data_dir
        if create:
            os.makedirs(self._data_dir, exist_ok=True)

    @property
    def data_dir(self) -> str:
        return self._data_dir

    @property
    def manifest_path(self) -> str:
        return os.path.join(self._data_dir, MANIFEST_FILE)

    @property
    def intrinsics_path(self) -> str:
        return os.path.join(self._data_dir, INTRINSICS_FILE)

    @staticmethod
    def file_names(index: int) -> Dict[str, str]:
        stem = f"{index:05d}"
        return {
            "guidance_path": f"{stem}_guidance.pft",
            "sensor_path": f"{stem}_sensor.pft",
            "gt_path": f"{stem}_gt.pft",
            "normals_path": f"{stem}_normals.pft",
        }

    def capture_path(self, index: int) -> str:
        return os.path.join(self._data_dir, f"{index:05d}_capture.pft")

    def _path(self, name: str) -> str:
        return os.path.join(self._data_dir, name)

    def write_sample(
        self, sample: TrainingSample, capture: Optional[DofpCapture] = None
    ) -> Dict[str, object]:
        """Write one sample's rasters; returns its manifest row."""
        names = self.file_names(sample.index)
        write_tensor(self._path(names["guidance_path"]), sample.guidance.data)
        write_tensor(self._path(names["sensor_path"]), sample.sensor.to_raster())
        write_tensor(self._path(names["gt_path"]), sample.gt.to_raster())
        write_tensor(self._path(names["normals_path"]), sample.normals)
        if capture is not None:
            write_tensor(self.capture_path(sample.index), capture.intensities)
        return {
            "index": sample.index,
            **names,
            "degradation_mode": sample.mode,
            "seed": sample.seed,
        }

    def write_manifest(self, rows: List[Dict[str, object]]) -> None:
        log = RunLogManager(self.manifest_path, MANIFEST_COLUMNS)
        for row in sorted(rows, key=lambda r: int(r["index"])):
            log.append(row)
        log.save()

    def read_manifest(self) -> List[Dict[str, str]]:
        if not os.path.exists(self.manifest_path):
            raise FileNotFoundError(f"no manifest in '{self._data_dir}'")
        rows = RunLogManager.load(self.manifest_path)
        for row in rows:
            missing = [c for c in MANIFEST_COLUMNS if c not in row]
            if missing:
                raise CorruptFileError(self.manifest_path, missing[0], "missing column")
        return rows

    def write_intrinsics(self, intrinsics: CameraIntrinsics) -> None:
        write_key_values(self.intrinsics_path, intrinsics.to_dict())

    def read_intrinsics(self) -> CameraIntrinsics:
        return read_intrinsics(self.intrinsics_path)

    def load_sample(self, row: Dict[str, str]) -> TrainingSample:
        return TrainingSample(
            index=int(row["index"]),
            guidance=GuidanceTensor(read_tensor(self._path(row["guidance_path"]))),
            sensor=DepthMap.from_raster(read_tensor(self._path(row["sensor_path"]))),
            gt=DepthMap.from_raster(read_tensor(self._path(row["gt_path"]))),
            normals=read_tensor(self._path(row["normals_path"])),
            mode=row["degradation_mode"],
            seed=int(row["seed"]),
        )

    def load_all(self) -> List[TrainingSample]:
        samples = [self.load_sample(row) for row in self.read_manifest()]
        logger.info("loaded %d samples from %s", len(samples), self._data_dir)
        return samples
