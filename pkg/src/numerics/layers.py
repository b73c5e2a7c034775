"""
Layer kernels with hand-written backward passes.

Every forward function has a ``*_backward`` partner that takes the forward
inputs plus the upstream gradient and returns input and parameter gradients.
Raster tensors are channels-first ``[C, H, W]``.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.errors import DimensionMismatchError, DomainError
from src.numerics.tensor import Tensor

Seed = Union[int, Sequence[int]]


@dataclass
class LinearLayer:
    """
    Fully-connected layer ``y = x W^T + b`` over the trailing axis.

    Attributes
    ----------
    weight : Tensor
        ``[out_features, in_features]`` matrix.
    bias : Tensor
        ``[out_features]`` vector.
    trainable : bool
        Whether optimizers may update the layer.
    """

    weight: Tensor
    bias: Tensor
    trainable: bool = True

    def __post_init__(self):
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise DimensionMismatchError(
                f"LinearLayer: weight {self.weight.shape} and bias "
                f"{self.bias.shape} are inconsistent"
            )

    @property
    def in_features(self) -> int:
        return self.weight.shape[1]

    @property
    def out_features(self) -> int:
        return self.weight.shape[0]

    @classmethod
    def initialize(
        cls, in_features: int, out_features: int, rng: np.random.Generator
    ) -> "LinearLayer":
        """Kaiming-uniform (fan-in) weights and a zero bias."""
        bound = math.sqrt(6.0 / in_features)
        weight = rng.uniform(-bound, bound, size=(out_features, in_features))
        return cls(weight=weight, bias=np.zeros(out_features))

    @classmethod
    def zeros(cls, in_features: int, out_features: int) -> "LinearLayer":
        return cls(np.zeros((out_features, in_features)), np.zeros(out_features))


def linear(layer: LinearLayer, x: Tensor) -> Tensor:
    if x.shape[-1] != layer.in_features:
        raise DimensionMismatchError(
            f"linear: trailing dim {x.shape[-1]} != in_features {layer.in_features}"
        )
    return x @ layer.weight.T + layer.bias


def linear_backward(
    layer: LinearLayer, x: Tensor, grad_y: Tensor
) -> Tuple[Tensor, Tensor, Tensor]:
    """Returns ``(grad_x, grad_weight, grad_bias)``."""
    flat_g = grad_y.reshape(-1, layer.out_features)
    flat_x = x.reshape(-1, layer.in_features)
    grad_x = grad_y @ layer.weight
    return grad_x, flat_g.T @ flat_x, flat_g.sum(axis=0)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable softmax (max-subtracted) along ``axis``."""
    shifted = x - np.max(x, axis=axis, keepdims=True)
    exps = np.exp(shifted)
    return exps / np.sum(exps, axis=axis, keepdims=True)


def softmax_backward(y: Tensor, grad_y: Tensor, axis: int = -1) -> Tensor:
    """Gradient through softmax given its output ``y``."""
    return y * (grad_y - np.sum(grad_y * y, axis=axis, keepdims=True))


def global_avg_pool(x: Tensor) -> Tensor:
    """Mean over the spatial axes of a ``[C, H, W]`` tensor."""
    if x.ndim != 3:
        raise DimensionMismatchError(f"global_avg_pool: expected rank 3, got {x.ndim}")
    return x.mean(axis=(1, 2))


def global_avg_pool_backward(grad_y: Tensor, height: int, width: int) -> Tensor:
    scale = 1.0 / (height * width)
    return np.broadcast_to(
        grad_y[:, None, None] * scale, (grad_y.shape[0], height, width)
    ).copy()


def dropout_mask(shape: Tuple[int, ...], p: float, seed: Seed) -> Tensor:
    """Inverted-dropout mask: zeros with probability ``p``, else ``1/(1-p)``."""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"dropout probability must be in [0, 1), got {p}")
    rng = np.random.default_rng(seed)
    keep = rng.random(shape) >= p
    return keep / (1.0 - p)


def dropout(x: Tensor, p: float, training: bool, seed: Seed) -> Tensor:
    """Seeded dropout; identity at inference or when ``p == 0``."""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    return x * dropout_mask(x.shape, p, seed)


def relu(x: Tensor) -> Tensor:
    return np.maximum(x, 0.0)


def relu_backward(x: Tensor, grad_y: Tensor) -> Tensor:
    return grad_y * (x > 0.0)


def pointwise_linear(layer: LinearLayer, x: Tensor) -> Tensor:
    """1x1 convolution: ``linear`` applied to every pixel of ``[C, H, W]``."""
    channels, height, width = x.shape
    tokens = x.reshape(channels, -1).T
    out = linear(layer, tokens)
    return out.T.reshape(layer.out_features, height, width)


def pointwise_linear_backward(
    layer: LinearLayer, x: Tensor, grad_y: Tensor
) -> Tuple[Tensor, Tensor, Tensor]:
    channels, height, width = x.shape
    tokens = x.reshape(channels, -1).T
    grad_tokens = grad_y.reshape(layer.out_features, -1).T
    grad_x, grad_w, grad_b = linear_backward(layer, tokens, grad_tokens)
    return grad_x.T.reshape(channels, height, width), grad_w, grad_b


def _check_even(x: Tensor, what: str) -> None:
    if x.ndim != 3 or x.shape[1] % 2 or x.shape[2] % 2:
        raise DimensionMismatchError(
            f"{what}: expected [C, H, W] with even H and W, got {x.shape}"
        )


def _im2col(x: Tensor) -> Tensor:
    channels, height, width = x.shape
    out_h, out_w = height // 2, width // 2
    padded = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    cols = np.empty((channels, 3, 3, out_h, out_w))
    for ki in range(3):
        for kj in range(3):
            rows = slice(ki, ki + 2 * out_h, 2)
            columns = slice(kj, kj + 2 * out_w, 2)
            cols[:, ki, kj] = padded[:, rows, columns]
    return cols.reshape(channels * 9, out_h * out_w)


def conv3x3_stride2(layer: LinearLayer, x: Tensor) -> Tensor:
    """
    3x3 convolution, stride 2, zero padding 1.

    The kernel is stored as a linear layer over im2col patches, so
    ``layer.in_features`` must equal ``9 * C`` (feature order: channel,
    kernel row, kernel column).
    """
    _check_even(x, "conv3x3_stride2")
    if layer.in_features != 9 * x.shape[0]:
        raise DimensionMismatchError(
            f"conv3x3_stride2: layer expects {layer.in_features // 9} channels, "
            f"got {x.shape[0]}"
        )
    cols = _im2col(x)
    out = layer.weight @ cols + layer.bias[:, None]
    return out.reshape(layer.out_features, x.shape[1] // 2, x.shape[2] // 2)


def conv3x3_stride2_backward(
    layer: LinearLayer, x: Tensor, grad_y: Tensor
) -> Tuple[Tensor, Tensor, Tensor]:
    channels, height, width = x.shape
    out_h, out_w = height // 2, width // 2
    cols = _im2col(x)
    flat_g = grad_y.reshape(layer.out_features, -1)
    grad_w = flat_g @ cols.T
    grad_b = flat_g.sum(axis=1)
    grad_cols = (layer.weight.T @ flat_g).reshape(channels, 3, 3, out_h, out_w)
    grad_padded = np.zeros((channels, height + 2, width + 2))
    for ki in range(3):
        for kj in range(3):
            grad_padded[
                :, ki : ki + 2 * out_h : 2, kj : kj + 2 * out_w : 2
            ] += grad_cols[:, ki, kj]
    return grad_padded[:, 1:-1, 1:-1], grad_w, grad_b


def avg_pool2(x: Tensor) -> Tensor:
    """2x2 average pooling with stride 2."""
    _check_even(x, "avg_pool2")
    channels, height, width = x.shape
    return x.reshape(channels, height // 2, 2, width // 2, 2).mean(axis=(2, 4))


def avg_pool2_backward(grad_y: Tensor) -> Tensor:
    return np.repeat(np.repeat(grad_y, 2, axis=1), 2, axis=2) * 0.25


def upsample_nearest2(x: Tensor) -> Tensor:
    return np.repeat(np.repeat(x, 2, axis=1), 2, axis=2)


def upsample_nearest2_backward(grad_y: Tensor) -> Tensor:
    channels, height, width = grad_y.shape
    return grad_y.reshape(channels, height // 2, 2, width // 2, 2).sum(axis=(2, 4))
