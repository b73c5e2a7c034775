"""
Finite-difference certification of analytic gradients.
"""

import logging
import math
from typing import Callable, Mapping

import numpy as np

from src.errors import DomainError, NumericFailureError
from src.numerics.params import ParamStore
from src.numerics.tensor import Tensor

logger = logging.getLogger(__name__)


def fd_gradcheck(
    f: Callable[[ParamStore], float],
    params: ParamStore,
    analytic_grads: Mapping[str, Tensor],
    h: float = 1e-5,
) -> float:
    """
    Compare analytic gradients against central differences.

    Args:
        f: Scalar function of the parameter store.
        params: Point of evaluation (left untouched).
        analytic_grads: Gradient per parameter name; only these names are
            checked.
        h: Finite-difference step.

    Returns:
        float: ``max |fd - analytic| / max(|fd|, |analytic|, 1e-8)`` over
        every checked coordinate.
    """
    if h <= 0:
        raise DomainError(f"step must be positive, got {h}")

    probe = params.copy()
    worst = 0.0
    worst_name = ""
    for name in sorted(analytic_grads):
        base = params[name]
        analytic = np.asarray(analytic_grads[name], dtype=np.float64).reshape(-1)
        flat = base.reshape(-1)
        for i in range(flat.size):
            bumped = flat.copy()
            bumped[i] = flat[i] + h
            probe[name] = bumped.reshape(base.shape)
            f_plus = f(probe)
            bumped[i] = flat[i] - h
            probe[name] = bumped.reshape(base.shape)
            f_minus = f(probe)
            if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
                raise NumericFailureError("gradcheck", f"non-finite f at {name}[{i}]")
            fd = (f_plus - f_minus) / (2.0 * h)
            err = abs(fd - analytic[i]) / max(abs(fd), abs(analytic[i]), 1e-8)
            if err > worst:
                worst, worst_name = err, f"{name}[{i}]"
        probe[name] = base
    logger.debug("gradcheck worst relative error %.3e at %s", worst, worst_name)
    return worst
