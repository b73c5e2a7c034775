"""
Differentiable stage transforms used by the encoder, the prompt path and the
decoder. Each one reads its layer from a ParamStore by name and reports
parameter gradients under the same name.
"""

from typing import Dict, Tuple

from src.numerics.layers import (
    LinearLayer,
    avg_pool2,
    avg_pool2_backward,
    conv3x3_stride2,
    conv3x3_stride2_backward,
    pointwise_linear,
    pointwise_linear_backward,
    relu,
    relu_backward,
)
from src.numerics.params import ParamStore
from src.numerics.tensor import Tensor

Grads = Dict[str, Tensor]


class _NamedStage:
    def __init__(self, name: str, layer: LinearLayer):
        self._name = name
        self._layer = layer

    @classmethod
    def from_store(cls, store: ParamStore, name: str):
        return cls(name, store.layer(name))

    @property
    def name(self) -> str:
        return self._name

    @property
    def layer(self) -> LinearLayer:
        return self._layer

    def _grads(self, grad_w: Tensor, grad_b: Tensor) -> Grads:
        return {f"{self._name}.weight": grad_w, f"{self._name}.bias": grad_b}


class ConvStage(_NamedStage):
    """``relu(conv3x3_stride2(x))``: halves the resolution."""

    def forward(self, x: Tensor) -> Tuple[Tensor, Tuple[Tensor, Tensor]]:
        pre = conv3x3_stride2(self._layer, x)
        return relu(pre), (x, pre)

    def backward(self, cache, grad_y: Tensor) -> Tuple[Tensor, Grads]:
        x, pre = cache
        grad_x, grad_w, grad_b = conv3x3_stride2_backward(
            self._layer, x, relu_backward(pre, grad_y)
        )
        return grad_x, self._grads(grad_w, grad_b)


class PointwiseStage(_NamedStage):
    """``relu(1x1 conv(x))``: keeps the resolution."""

    def forward(self, x: Tensor) -> Tuple[Tensor, Tuple[Tensor, Tensor]]:
        pre = pointwise_linear(self._layer, x)
        return relu(pre), (x, pre)

    def backward(self, cache, grad_y: Tensor) -> Tuple[Tensor, Grads]:
        x, pre = cache
        grad_x, grad_w, grad_b = pointwise_linear_backward(
            self._layer, x, relu_backward(pre, grad_y)
        )
        return grad_x, self._grads(grad_w, grad_b)


class PromptResampler(_NamedStage):
    """2x average pooling followed by a linear channel projection."""

    def forward(self, x: Tensor) -> Tuple[Tensor, Tensor]:
        pooled = avg_pool2(x)
        return pointwise_linear(self._layer, pooled), pooled

    def backward(self, cache, grad_y: Tensor) -> Tuple[Tensor, Grads]:
        grad_pooled, grad_w, grad_b = pointwise_linear_backward(
            self._layer, cache, grad_y
        )
        return avg_pool2_backward(grad_pooled), self._grads(grad_w, grad_b)
