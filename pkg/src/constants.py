"""
Constants for polarfuse.

This file contains the defaults and user-facing strings used throughout the
package so that numbers and messages live in one place.
"""

import math

# Polarizer angles of a DoFP sensor, in capture order
POLARIZER_ANGLES = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)

# Dark-pixel floor for DoLP division
DARK_PIXEL_EPS = 1e-12

# Threshold on |Phi_xy| below which AoLP is undefined
AOLP_DEGENERATE_EPS = 1e-12

# Tolerance for unit vectors
UNIT_NORM_TOL = 1e-6

# Guidance tensor layout
GUIDANCE_CHANNELS = 6
GUIDANCE_INTENSITY = 0
GUIDANCE_AOLP = 1
GUIDANCE_DOLP = 2
GUIDANCE_VIEW = slice(3, 6)

# Material modes
MATERIAL_DIFFUSE = "diffuse"
MATERIAL_SPECULAR = "specular"
MATERIAL_TRANSPARENT = "transparent"
MATERIAL_MODES = (MATERIAL_DIFFUSE, MATERIAL_SPECULAR, MATERIAL_TRANSPARENT)
MATERIAL_CODES = {MATERIAL_DIFFUSE: 0, MATERIAL_SPECULAR: 1, MATERIAL_TRANSPARENT: 2}
BACKGROUND_CODE = -1

# Degradation modes
DEGRADE_STEREO = "stereo-holes"
DEGRADE_DTOF = "dtof-transparent"
DEGRADE_ITOF = "itof-fov-crop"
DEGRADATION_MODES = (DEGRADE_STEREO, DEGRADE_DTOF, DEGRADE_ITOF)

# Model defaults
DEFAULT_STAGE_WIDTHS = (8, 16, 32, 64)
DEFAULT_DROPOUT_P = 0.1
DEFAULT_LAMBDA_INIT = 1.0
DEFAULT_D_MAX_MM = 10_000.0
DEFAULT_D_MIN_MM = 1e-3
DEFAULT_DEPTH_SCALE_MM = 1000.0
DEFAULT_HEAD_BIAS = 0.0
INPUT_MODE_PROMPT = "prompt"
INPUT_MODE_CONCAT = "concat"
OUTPUT_RESIDUAL = "residual"
OUTPUT_ABSOLUTE = "absolute"

# Parameter name prefixes
PPFB_PREFIX = "ppfb."

# Training defaults
DEFAULT_LEARNING_RATE = 0.01
DEFAULT_CLIP_NORM = 1.0
DEFAULT_STEPS = 200
DEFAULT_SEED = 0
DEFAULT_LOG_EVERY = 10
LAMBDA_FLOOR = 1e-6

# Ablation modes
ABLATION_PPFT = "ppft"
ABLATION_NO_PPFT = "no-ppft"
ABLATION_RGB = "rgb-guidance"
ABLATION_EARLY = "early-fusion"
ABLATION_SHALLOW = "shallow-ppfb"
ABLATION_MODES = (
    ABLATION_PPFT,
    ABLATION_NO_PPFT,
    ABLATION_RGB,
    ABLATION_EARLY,
    ABLATION_SHALLOW,
)

# Evaluation
DEFAULT_THRESHOLD_BASE = 1.25
ANGLE_THRESHOLDS_DEG = (11.5, 22.5, 30.0)
AGGREGATE_ROW = "All"

# Simulation defaults
DEFAULT_RESOLUTION = 64
DEFAULT_SCENES = 16
DEFAULT_FX = 60.0
DEFAULT_LIGHT = 1.0
DEFAULT_NOISE_SIGMA = 0.0
DEFAULT_DOLP = {
    MATERIAL_DIFFUSE: 0.1,
    MATERIAL_SPECULAR: 0.5,
    MATERIAL_TRANSPARENT: 0.8,
}
BACKGROUND_LEVEL = 0.5
AMBIENT_LEVEL = 0.2

# Environment
THREADS_ENV_VAR = "POLARFUSE_THREADS"

# Exit codes
EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NUMERIC_ERROR = 3
EXIT_CONFIG_ERROR = 4
EXIT_INTERRUPTED = 130

# File names
MANIFEST_FILE = "manifest.csv"
INTRINSICS_FILE = "intrinsics.txt"
EFFECTIVE_CONFIG_FILE = "effective_config.txt"
CHECKPOINT_FILE = "checkpoint.pwa"
FOUNDATION_FILE = "foundation.pwa"
LOSS_LOG_FILE = "loss.csv"
METRICS_FILE = "metrics.csv"
NORMAL_METRICS_FILE = "normal_metrics.csv"
COMPARE_FILE = "comparison.csv"

# Recorded capture directory layout
CAPTURE_POLARIZATION_DIR = "polarization"
CAPTURE_GT_DIR = "gt"
CAPTURE_SENSOR_DIRS = {
    DEGRADE_STEREO: "depth_stereo",
    DEGRADE_DTOF: "depth_dtof",
    DEGRADE_ITOF: "depth_itof",
}
CAPTURE_FRAME_SUFFIX = ".pft"

# Manifest columns
MANIFEST_COLUMNS = (
    "index",
    "guidance_path",
    "sensor_path",
    "gt_path",
    "normals_path",
    "degradation_mode",
    "seed",
)
LOSS_LOG_COLUMNS = ("step", "loss", "rmse", "mae")
METRICS_COLUMNS = ("mode", "n_pixels", "rmse", "mae", "delta1", "delta2", "delta3")
NORMAL_METRICS_COLUMNS = (
    "mode",
    "mean",
    "median",
    "rmse",
    "pct_11_5",
    "pct_22_5",
    "pct_30",
)
COMPARE_COLUMNS = ("run", "rmse", "mae", "d_rmse", "d_mae")

# CLI
CLI_PROG = "polarfuse"
CLI_DESCRIPTION = "Polarization-guided depth enhancement at desk scale."
COMMANDS = (
    "decode",
    "simulate",
    "pretrain",
    "train",
    "eval",
    "pointcloud",
    "compare",
)
EVAL_SOURCES = ("model", "sensor", "gt")
ERROR_MAP_DIR = "error_maps"

# Messages
DECODE_DONE = "Decoded capture written to '{}_*.pft'"
SIMULATE_DONE = "Dataset of {} samples written to '{}'"
TRAIN_DONE = "Checkpoint saved to '{}' (final loss {:.4f})"
PRETRAIN_DONE = "Foundation weights saved to '{}'"
EVAL_DONE = "Metrics written to '{}'"
FOUNDATION_MISSING = "No foundation archive given; {} starts from random weights."
POINTCLOUD_DONE = "Point clouds written: {}"
INPUT_ERROR = "Input error: {}"
NUMERIC_ERROR = "Numeric failure: {}"
CONFIG_ERROR = "Config error: {}"
INTERRUPTED = "\n\nRun interrupted."

METRICS_HEADER = """
┌─────────────────────────────────────┐
│         DEPTH ENHANCEMENT           │
└─────────────────────────────────────┘
"""
COMPARE_HEADER = """
┌─────────────────────────────────────┐
│         ABLATION COMPARISON         │
└─────────────────────────────────────┘
"""
NORMALS_HEADER = """
┌─────────────────────────────────────┐
│         NORMAL ANGULAR ERROR        │
└─────────────────────────────────────┘
"""

# Default output locations per command
DEFAULT_OUT = {
    "simulate": "data",
    "pretrain": "runs/foundation",
    "train": "runs/train",
    "eval": "runs/eval",
    "pointcloud": "runs/pointcloud",
}
