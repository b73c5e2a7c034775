from .dataset import dataset
from .degrade import DegradationSpec, degrade
from .render import RenderResult, render
from .scene import Box, Plane, SceneSpec, Sphere

__all__ = [
    "Box",
    "DegradationSpec",
    "Plane",
    "RenderResult",
    "SceneSpec",
    "Sphere",
    "dataset",
    "degrade",
    "render",
]
