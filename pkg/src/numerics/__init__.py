from .gradcheck import fd_gradcheck
from .layers import (
    LinearLayer,
    dropout,
    global_avg_pool,
    linear,
    softmax,
)
from .params import ParamStore
from .tensor import Tensor, as_tensor

__all__ = [
    "LinearLayer",
    "ParamStore",
    "Tensor",
    "as_tensor",
    "dropout",
    "fd_gradcheck",
    "global_avg_pool",
    "linear",
    "softmax",
]
