"""
Depth and surface-normal error metrics.

``delta_i`` is the fraction of pixels whose ratio ``max(pred/gt, gt/pred)``
is strictly below ``threshold_base ** i`` (default base 1.25).
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from src.constants import (
    AGGREGATE_ROW,
    ANGLE_THRESHOLDS_DEG,
    DEFAULT_THRESHOLD_BASE,
    DEGRADATION_MODES,
)
from src.errors import DimensionMismatchError, DomainError
from src.model.depth_map import DepthMap

NORMAL_UNIT_TOL = 1e-3


@dataclass(frozen=True)
class DepthMetrics:
    rmse: float
    mae: float
    delta1: float
    delta2: float
    delta3: float
    n_pixels: int

    def as_row(self, mode: str) -> Dict[str, object]:
        return {
            "mode": mode,
            "n_pixels": self.n_pixels,
            "rmse": self.rmse,
            "mae": self.mae,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta3": self.delta3,
        }


@dataclass(frozen=True)
class NormalMetrics:
    """Angular errors in degrees and the fraction below each threshold."""

    mean: float
    median: float
    rmse: float
    pct_11_5: float
    pct_22_5: float
    pct_30: float

    def as_row(self, mode: str) -> Dict[str, object]:
        return {
            "mode": mode,
            "mean": self.mean,
            "median": self.median,
            "rmse": self.rmse,
            "pct_11_5": self.pct_11_5,
            "pct_22_5": self.pct_22_5,
            "pct_30": self.pct_30,
        }


def depth_pairs(pred: DepthMap, gt: DepthMap) -> Tuple[np.ndarray, np.ndarray]:
    """Predicted and true depths at pixels valid in both maps, row-major."""
    if pred.shape != gt.shape:
        raise DimensionMismatchError(f"metrics: pred {pred.shape} vs gt {gt.shape}")
    mask = pred.valid & gt.valid
    return pred.depth[mask], gt.depth[mask]


def metrics_from_pairs(
    pred: np.ndarray, gt: np.ndarray, threshold_base: float = DEFAULT_THRESHOLD_BASE
) -> DepthMetrics:
    if pred.size == 0:
        raise DomainError("depth metrics need at least one valid pixel")
    if not threshold_base > 1:
        raise DomainError(f"threshold base must exceed 1, got {threshold_base}")
    error = pred - gt
    ratio = np.maximum(pred / gt, gt / pred)
    deltas = [float(np.mean(ratio < threshold_base**i)) for i in (1, 2, 3)]
    return DepthMetrics(
        rmse=float(np.sqrt(np.mean(error**2))),
        mae=float(np.mean(np.abs(error))),
        delta1=deltas[0],
        delta2=deltas[1],
        delta3=deltas[2],
        n_pixels=int(pred.size),
    )


def depth_metrics(
    pred: DepthMap, gt: DepthMap, threshold_base: float = DEFAULT_THRESHOLD_BASE
) -> DepthMetrics:
    """
    RMSE and MAE (mm) and delta accuracies over the shared valid mask.

    A dense prediction scores every valid ground-truth pixel; a sparse one
    (e.g. raw sensor depth) scores only where it has a value.
    """
    return metrics_from_pairs(*depth_pairs(pred, gt), threshold_base)


def _check_normals(normals: np.ndarray, what: str) -> None:
    if normals.ndim != 3 or normals.shape[0] != 3:
        raise DimensionMismatchError(f"{what}: expected [3, H, W], got {normals.shape}")


def normal_angles(
    pred: npt.NDArray[np.float64],
    gt: npt.NDArray[np.float64],
    mask: npt.NDArray[np.bool_],
) -> np.ndarray:
    """Per-pixel angle in degrees between ``[3, H, W]`` normal rasters."""
    _check_normals(pred, "pred normals")
    _check_normals(gt, "gt normals")
    if pred.shape != gt.shape or mask.shape != pred.shape[1:]:
        raise DimensionMismatchError(
            f"normal metrics: pred {pred.shape}, gt {gt.shape}, mask {mask.shape}"
        )
    p = pred[:, mask]
    g = gt[:, mask]
    for label, vectors in (("pred", p), ("gt", g)):
        if np.any(np.abs(np.linalg.norm(vectors, axis=0) - 1.0) > NORMAL_UNIT_TOL):
            raise DomainError(f"{label} normals are not unit vectors")
    cosine = np.clip(np.sum(p * g, axis=0), -1.0, 1.0)
    return np.degrees(np.arccos(cosine))


def metrics_from_angles(
    angles: np.ndarray, thresholds: Sequence[float] = ANGLE_THRESHOLDS_DEG
) -> NormalMetrics:
    if angles.size == 0:
        raise DomainError("normal metrics need at least one masked pixel")
    if len(thresholds) != 3:
        raise DomainError(f"expected three angle thresholds, got {thresholds}")
    ordered = np.sort(angles)
    fractions = [float(np.mean(angles < t)) for t in thresholds]
    return NormalMetrics(
        mean=float(np.mean(angles)),
        median=float(ordered[(ordered.size - 1) // 2]),
        rmse=float(np.sqrt(np.mean(angles**2))),
        pct_11_5=fractions[0],
        pct_22_5=fractions[1],
        pct_30=fractions[2],
    )


def normal_metrics(
    pred: npt.NDArray[np.float64],
    gt: npt.NDArray[np.float64],
    mask: npt.NDArray[np.bool_],
    thresholds: Sequence[float] = ANGLE_THRESHOLDS_DEG,
) -> NormalMetrics:
    """Angular error statistics; the median is the lower median."""
    return metrics_from_angles(normal_angles(pred, gt, mask), thresholds)


def _mode_order(modes: Iterable[str]) -> List[str]:
    present = set(modes)
    known = [m for m in DEGRADATION_MODES if m in present]
    return known + sorted(present - set(DEGRADATION_MODES))


def pooled_depth_table(
    samples: Iterable[Tuple[str, DepthMap, DepthMap]],
    threshold_base: float = DEFAULT_THRESHOLD_BASE,
) -> List[Tuple[str, DepthMetrics]]:
    """
    One row per degradation mode plus the aggregate row.

    Pixels are pooled within a mode (not averaged per sample). Modes with no
    scorable pixel are left out; the aggregate row is always present.
    """
    pooled: Dict[str, List[Tuple[np.ndarray, np.ndarray]]] = {}
    for mode, pred, gt in samples:
        pooled.setdefault(mode, []).append(depth_pairs(pred, gt))
    rows: List[Tuple[str, DepthMetrics]] = []
    every: List[Tuple[np.ndarray, np.ndarray]] = []
    for mode in _mode_order(pooled):
        pairs = pooled[mode]
        every.extend(pairs)
        p = np.concatenate([a for a, _ in pairs])
        g = np.concatenate([b for _, b in pairs])
        if p.size:
            rows.append((mode, metrics_from_pairs(p, g, threshold_base)))
    if not every:
        raise DomainError("no samples to evaluate")
    p = np.concatenate([a for a, _ in every])
    g = np.concatenate([b for _, b in every])
    rows.append((AGGREGATE_ROW, metrics_from_pairs(p, g, threshold_base)))
    return rows


def pooled_normal_table(
    samples: Iterable[Tuple[str, np.ndarray]],
    thresholds: Sequence[float] = ANGLE_THRESHOLDS_DEG,
) -> List[Tuple[str, NormalMetrics]]:
    """Like ``pooled_depth_table`` over per-sample angle arrays."""
    pooled: Dict[str, List[np.ndarray]] = {}
    for mode, angles in samples:
        pooled.setdefault(mode, []).append(angles)
    rows: List[Tuple[str, NormalMetrics]] = []
    for mode in _mode_order(pooled):
        angles = np.concatenate(pooled[mode])
        if angles.size:
            rows.append((mode, metrics_from_angles(angles, thresholds)))
    everything: Optional[np.ndarray] = None
    if pooled:
        everything = np.concatenate([a for group in pooled.values() for a in group])
    if everything is None or everything.size == 0:
        raise DomainError("no normals to evaluate")
    rows.append((AGGREGATE_ROW, metrics_from_angles(everything, thresholds)))
    return rows
