from .chain import chain_backward, chain_forward
from .ppfb import FusionState, PpfbParams, ppfb_backward, ppfb_forward

__all__ = [
    "FusionState",
    "PpfbParams",
    "chain_backward",
    "chain_forward",
    "ppfb_backward",
    "ppfb_forward",
]
