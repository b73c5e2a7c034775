"""
Display utilities for the polarfuse CLI.

Every function returns the text to print, so tables can be checked without
capturing stdout.
"""

from typing import List, Sequence, Tuple

from src.constants import COMPARE_HEADER, METRICS_HEADER, NORMALS_HEADER
from src.evaluation.metrics import DepthMetrics, NormalMetrics

DEPTH_ROW_FORMAT = "{:<18} {:>9} {:>10} {:>10} {:>7} {:>7} {:>7}"
NORMAL_ROW_FORMAT = "{:<18} {:>8} {:>8} {:>8} {:>7} {:>7} {:>7}"
COMPARE_ROW_FORMAT = "{:<28} {:>10} {:>10} {:>10} {:>10}"


def format_depth_table(rows: Sequence[Tuple[str, DepthMetrics]]) -> str:
    """Depth metrics per degradation mode, RMSE and MAE in mm."""
    lines = [
        METRICS_HEADER,
        DEPTH_ROW_FORMAT.format("mode", "pixels", "RMSE", "MAE", "d1", "d2", "d3"),
    ]
    for mode, m in rows:
        lines.append(
            DEPTH_ROW_FORMAT.format(
                mode,
                m.n_pixels,
                f"{m.rmse:.2f}",
                f"{m.mae:.2f}",
                f"{m.delta1:.3f}",
                f"{m.delta2:.3f}",
                f"{m.delta3:.3f}",
            )
        )
    return "\n".join(lines)


def format_normal_table(rows: Sequence[Tuple[str, NormalMetrics]]) -> str:
    lines = [
        NORMALS_HEADER,
        NORMAL_ROW_FORMAT.format(
            "mode", "mean", "median", "RMSE", "11.5", "22.5", "30"
        ),
    ]
    for mode, m in rows:
        lines.append(
            NORMAL_ROW_FORMAT.format(
                mode,
                f"{m.mean:.2f}",
                f"{m.median:.2f}",
                f"{m.rmse:.2f}",
                f"{m.pct_11_5:.3f}",
                f"{m.pct_22_5:.3f}",
                f"{m.pct_30:.3f}",
            )
        )
    return "\n".join(lines)


def format_compare_table(runs: Sequence[Tuple[str, float, float]]) -> str:
    """
    Aggregate RMSE/MAE of several runs and their change against the first.

    Args:
        runs: ``(label, rmse, mae)`` per run, baseline first.
    """
    lines: List[str] = [
        COMPARE_HEADER,
        COMPARE_ROW_FORMAT.format("run", "RMSE", "MAE", "dRMSE", "dMAE"),
    ]
    if not runs:
        return "\n".join(lines)
    _, base_rmse, base_mae = runs[0]
    for label, rmse, mae in runs:
        lines.append(
            COMPARE_ROW_FORMAT.format(
                label,
                f"{rmse:.2f}",
                f"{mae:.2f}",
                f"{rmse - base_rmse:+.2f}",
                f"{mae - base_mae:+.2f}",
            )
        )
    return "\n".join(lines)
