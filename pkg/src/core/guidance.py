"""
Polarization guidance tensor: ``[I; AoLP; DoLP; V]`` as six channels.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from src.constants import (
    GUIDANCE_AOLP,
    GUIDANCE_CHANNELS,
    GUIDANCE_DOLP,
    GUIDANCE_INTENSITY,
    GUIDANCE_VIEW,
)
from src.core.camera import ViewingField
from src.core.polarization import PolarizationState
from src.errors import DimensionMismatchError


@dataclass(frozen=True)
class GuidanceTensor:
    """Channels-first ``[6, H, W]`` guidance with a fixed channel layout."""

    data: npt.NDArray[np.float64]

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[0] != GUIDANCE_CHANNELS:
            raise DimensionMismatchError(
                f"GuidanceTensor: expected [{GUIDANCE_CHANNELS}, H, W], "
                f"got {self.data.shape}"
            )
        # slices re-validate through their own types
        self.state()
        ViewingField(self.data[GUIDANCE_VIEW])

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def state(self) -> PolarizationState:
        return PolarizationState(
            intensity=self.data[GUIDANCE_INTENSITY],
            aolp=self.data[GUIDANCE_AOLP],
            dolp=self.data[GUIDANCE_DOLP],
        )

    def view(self) -> ViewingField:
        return ViewingField(self.data[GUIDANCE_VIEW])


def build_guidance(state: PolarizationState, view: ViewingField) -> GuidanceTensor:
    if state.shape != (view.height, view.width):
        raise DimensionMismatchError(
            f"build_guidance: state {state.shape} vs view "
            f"{(view.height, view.width)}"
        )
    data = np.concatenate(
        [
            state.intensity[None],
            state.aolp[None],
            state.dolp[None],
            view.directions,
        ]
    )
    return GuidanceTensor(data=data)
