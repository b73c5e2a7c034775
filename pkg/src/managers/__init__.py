from .archive_manager import WeightArchive, load_archive, save_archive
from .config_manager import read_key_values, write_key_values
from .dataset_manager import DatasetManager, TrainingSample
from .run_log_manager import RunLogManager
from .tensor_file_manager import read_tensor, write_tensor

__all__ = [
    "DatasetManager",
    "RunLogManager",
    "TrainingSample",
    "WeightArchive",
    "load_archive",
    "read_key_values",
    "read_tensor",
    "save_archive",
    "write_key_values",
    "write_tensor",
]
