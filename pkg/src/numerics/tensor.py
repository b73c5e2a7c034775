"""
Dense tensor helpers.

A tensor is a float64 ``numpy.ndarray``; this module only adds the checks
the rest of the package relies on.
"""

from typing import Sequence

import numpy as np
import numpy.typing as npt

from src.errors import DimensionMismatchError, NumericFailureError

Tensor = npt.NDArray[np.float64]


def as_tensor(data: npt.ArrayLike, stage: str = "tensor") -> Tensor:
    """Copy ``data`` into a finite float64 array or raise NumericFailureError."""
    array = np.array(data, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise NumericFailureError(stage)
    return array


def check_finite(x: np.ndarray, stage: str) -> None:
    """Raise NumericFailureError tagged with ``stage`` if ``x`` has NaN/inf."""
    if not np.all(np.isfinite(x)):
        raise NumericFailureError(stage)


def check_shape(x: np.ndarray, expected: Sequence[int], what: str) -> None:
    if tuple(x.shape) != tuple(expected):
        raise DimensionMismatchError(
            f"{what}: expected shape {tuple(expected)}, got {tuple(x.shape)}"
        )


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"{what}: {a.shape} != {b.shape}")
