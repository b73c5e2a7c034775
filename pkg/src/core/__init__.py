from .camera import CameraIntrinsics, ViewingField, viewing_field
from .guidance import GuidanceTensor, build_guidance
from .polarization import (
    DofpCapture,
    PolarizationState,
    aolp_from_normal,
    decode_dofp,
    forward_malus,
)

__all__ = [
    "CameraIntrinsics",
    "DofpCapture",
    "GuidanceTensor",
    "PolarizationState",
    "ViewingField",
    "aolp_from_normal",
    "build_guidance",
    "decode_dofp",
    "forward_malus",
    "viewing_field",
]
