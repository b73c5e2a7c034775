"""
Depth supervision: mean of ``|e| + e**2`` over pixels with valid ground
truth, ``e = pred - gt`` in millimetres.
"""

from typing import Tuple

import numpy as np

from src.errors import DimensionMismatchError, DomainError
from src.model.depth_map import DepthMap
from src.numerics.tensor import Tensor


def _residual(pred: DepthMap, gt: DepthMap) -> Tuple[Tensor, np.ndarray, int]:
    if pred.shape != gt.shape:
        raise DimensionMismatchError(f"loss: pred {pred.shape} vs gt {gt.shape}")
    mask = gt.valid & pred.valid
    count = int(mask.sum())
    if count == 0:
        raise DomainError("loss: ground truth has no valid pixel")
    residual = np.where(mask, pred.depth - gt.depth, 0.0)
    return residual, mask, count


def depth_loss(pred: DepthMap, gt: DepthMap) -> float:
    residual, _, count = _residual(pred, gt)
    return float((np.abs(residual) + residual**2).sum() / count)


def depth_loss_grad(pred: DepthMap, gt: DepthMap) -> Tensor:
    """``d depth_loss / d pred.depth``; zero outside the shared mask."""
    residual, mask, count = _residual(pred, gt)
    grad = np.sign(residual) + 2.0 * residual
    return np.where(mask, grad, 0.0) / count
