"""
Flat ``key=value`` text files used for run configs, intrinsics and the
effective-config echo.
"""

import logging
from typing import Dict, Mapping

from src.errors import ConfigError

logger = logging.getLogger(__name__)


def parse_key_values(text: str, source: str = "<text>") -> Dict[str, str]:
    """
    Parse ``key=value`` lines.

    Args:
        text (str): File contents. Blank lines and ``#`` comments are skipped.
        source (str): Name used in error messages.

    Returns:
        Dict[str, str]: Keys (stripped, dashes normalized to underscores)
        mapped to stripped values.
    """
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got '{raw}'")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        values[key] = value.strip()
    return values


def read_key_values(path) -> Dict[str, str]:
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config '{path}': {e}") from None
    return parse_key_values(text, str(path))


def format_key_values(values: Mapping[str, object]) -> str:
    return "".join(f"{key}={values[key]}\n" for key in sorted(values))


def write_key_values(path, values: Mapping[str, object]) -> None:
    with open(path, "w") as f:
        f.write(format_key_values(values))
    logger.debug("wrote %d keys to %s", len(values), path)
