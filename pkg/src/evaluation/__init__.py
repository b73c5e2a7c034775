from .metrics import DepthMetrics, NormalMetrics, depth_metrics, normal_metrics
from .pointcloud import backproject, project, write_ply

__all__ = [
    "DepthMetrics",
    "NormalMetrics",
    "backproject",
    "depth_metrics",
    "normal_metrics",
    "project",
    "write_ply",
]
