"""
Transfer of foundation weights into a fresh parameter store.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

from src.constants import PPFB_PREFIX
from src.errors import IncompleteParamsError
from src.managers.archive_manager import WeightArchive
from src.model.config import ModelConfig
from src.model.network import init_params
from src.numerics.params import ParamStore

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FreezePolicy:
    """
    Name prefixes whose tensors stay fixed during training.

    The empty policy fine-tunes everything; the prefix ``""`` freezes the
    whole store.
    """

    frozen_prefixes: Tuple[str, ...] = ()

    @classmethod
    def from_config(cls, config: ModelConfig) -> "FreezePolicy":
        return cls(tuple(config.freeze_prefixes))

    def is_frozen(self, name: str) -> bool:
        return any(name.startswith(prefix) for prefix in self.frozen_prefixes)


@dataclass
class LoadReport:
    loaded: List[str] = field(default_factory=list)
    skipped_missing: List[str] = field(default_factory=list)
    skipped_shape_mismatch: List[str] = field(default_factory=list)
    frozen: List[str] = field(default_factory=list)
    unused: List[str] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"loaded={len(self.loaded)} missing={len(self.skipped_missing)} "
            f"shape_mismatch={len(self.skipped_shape_mismatch)} "
            f"frozen={len(self.frozen)} unused={len(self.unused)}"
        )


def load_pretrained(
    params: ParamStore, archive: WeightArchive, policy: FreezePolicy
) -> LoadReport:
    """
    Copy name- and shape-matched archive tensors into ``params`` in place.

    Fusion-block tensors (``ppfb.`` prefix) always keep their fresh values
    and are reported as missing. Archive entries with no counterpart in
    ``params`` are listed as unused. Every tensor under a frozen prefix is
    marked non-trainable whether or not it was loaded.

    Args:
        params (ParamStore): Target store, modified in place.
        archive (WeightArchive): Foundation weights.
        policy (FreezePolicy): Which prefixes to freeze.

    Returns:
        LoadReport: Names per outcome, each list sorted.
    """
    report = LoadReport()
    for name in params.names():
        if name.startswith(PPFB_PREFIX) or name not in archive:
            report.skipped_missing.append(name)
        elif archive[name].shape != params[name].shape:
            report.skipped_shape_mismatch.append(name)
        else:
            params[name] = archive[name].copy()
            report.loaded.append(name)
        if policy.is_frozen(name):
            params.set_trainable(name, False)
            report.frozen.append(name)
    report.unused = [name for name in archive.names() if name not in params]
    logger.info("load_pretrained: %s", report.summary())
    for name in report.skipped_shape_mismatch:
        logger.warning(
            "shape mismatch for '%s': archive %s, model %s",
            name,
            archive[name].shape,
            params[name].shape,
        )
    return report


def restore_params(archive: WeightArchive, config: ModelConfig) -> ParamStore:
    """
    Parameters for ``config`` read back from a checkpoint.

    Raises IncompleteParamsError if the archive lacks a tensor the
    configuration needs and DimensionMismatchError if one has the wrong
    shape. Extra archive entries are ignored.
    """
    params = init_params(config)
    missing = [name for name in params.names() if name not in archive]
    if missing:
        raise IncompleteParamsError(
            f"checkpoint lacks {len(missing)} tensors, e.g. {missing[:3]}"
        )
    for name in params.names():
        params[name] = archive[name]
    return params
