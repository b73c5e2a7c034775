from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from src.errors import DimensionMismatchError, IncompleteParamsError
from src.numerics.layers import LinearLayer
from src.numerics.tensor import Tensor


class ParamStore:
    """
    Named tensors with a per-entry trainable flag.

    Iteration is always in lexicographic name order so that serialization,
    gradient checks and optimizer updates are deterministic.
    """

    def __init__(self, entries: Optional[Mapping[str, Tensor]] = None):
        self._tensors: Dict[str, Tensor] = {}
        self._trainable: Dict[str, bool] = {}
        for name, tensor in (entries or {}).items():
            self.add(name, tensor)

    def add(self, name: str, tensor: Tensor, trainable: bool = True) -> None:
        """Register a new tensor; names must be unique."""
        if name in self._tensors:
            raise ValueError(f"duplicate parameter name '{name}'")
        self._tensors[name] = np.asarray(tensor, dtype=np.float64)
        self._trainable[name] = trainable

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._tensors[name]
        except KeyError:
            raise IncompleteParamsError(f"missing parameter '{name}'") from None

    def __setitem__(self, name: str, tensor: Tensor) -> None:
        """Replace an existing tensor, keeping its shape and trainable flag."""
        current = self[name]
        tensor = np.asarray(tensor, dtype=np.float64)
        if tensor.shape != current.shape:
            raise DimensionMismatchError(
                f"parameter '{name}': {tensor.shape} != {current.shape}"
            )
        self._tensors[name] = tensor

    def __contains__(self, name: object) -> bool:
        return name in self._tensors

    def __len__(self) -> int:
        return len(self._tensors)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names())

    def names(self) -> List[str]:
        return sorted(self._tensors)

    def items(self) -> List[Tuple[str, Tensor]]:
        return [(name, self._tensors[name]) for name in self.names()]

    def is_trainable(self, name: str) -> bool:
        self[name]
        return self._trainable[name]

    def set_trainable(self, name: str, trainable: bool) -> None:
        self[name]
        self._trainable[name] = trainable

    def trainable_names(self) -> List[str]:
        return [name for name in self.names() if self._trainable[name]]

    def layer(self, prefix: str) -> LinearLayer:
        """View ``<prefix>.weight`` / ``<prefix>.bias`` as a LinearLayer."""
        weight_name, bias_name = f"{prefix}.weight", f"{prefix}.bias"
        return LinearLayer(
            weight=self[weight_name],
            bias=self[bias_name],
            trainable=self._trainable[weight_name] and self._trainable[bias_name],
        )

    def add_layer(self, prefix: str, layer: LinearLayer) -> None:
        self.add(f"{prefix}.weight", layer.weight, layer.trainable)
        self.add(f"{prefix}.bias", layer.bias, layer.trainable)

    def copy(self) -> "ParamStore":
        """Deep copy, trainable flags included."""
        clone = ParamStore()
        for name, tensor in self.items():
            clone.add(name, tensor.copy(), self._trainable[name])
        return clone

    def zeros_like(self) -> "ParamStore":
        clone = ParamStore()
        for name, tensor in self.items():
            clone.add(name, np.zeros_like(tensor), self._trainable[name])
        return clone

    def __repr__(self) -> str:
        return f"ParamStore({len(self)} tensors)"
