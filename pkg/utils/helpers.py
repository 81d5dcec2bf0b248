"""
Utility helper functions shared by the services.
"""

from typing import Dict, List, Tuple

import numpy as np

from utils.exceptions import ConfigError

# Ties that floating-point trigonometry leaves a hair below .5 still round up.
ROUNDING_SLACK = 1e-9


def round_half_up(values: np.ndarray) -> np.ndarray:
    """
    Round to the nearest integer, exact halves going up.

    Used for every nearest-neighbor pixel lookup so the rasterizer and the
    Radon sampler agree on which pixel a point falls in.

    Args:
        values: Real coordinates

    Returns:
        Integer array of the same shape
    """
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5 + ROUNDING_SLACK).astype(np.int64)


def trig_degrees(theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cosine and sine of angles in degrees with round-off residue zeroed.

    cos(90°) evaluates to 6e-17 in floating point, which is enough to push a
    half-integer coordinate across a rounding boundary.
    """
    rad = np.deg2rad(np.asarray(theta, dtype=np.float64))
    cos_t = np.cos(rad)
    sin_t = np.sin(rad)
    cos_t[np.abs(cos_t) < 1e-12] = 0.0
    sin_t[np.abs(sin_t) < 1e-12] = 0.0
    return cos_t, sin_t


def normalize_line(rho: float, theta: float) -> Tuple[float, float]:
    """
    Reduce a (rho, theta) line to theta in [0, 180).

    Shifting theta by 180 degrees flips the sign of rho.

    Args:
        rho: Signed offset from the image center (pixels)
        theta: Normal angle (degrees), any real value

    Returns:
        Equivalent (rho, theta) with 0 <= theta < 180
    """
    turns = int(np.floor(theta / 180.0))
    theta = theta - 180.0 * turns
    if turns % 2:
        rho = -rho
    if theta >= 180.0:
        theta -= 180.0
        rho = -rho
    return rho, theta


def image_center(size: int) -> float:
    """Center-origin offset for a square side length."""
    return (size - 1) / 2.0


def parse_key_value(text: str) -> Dict[str, str]:
    """
    Parse a key=value configuration block.

    One assignment per line; '#' starts a comment; blank lines are skipped.
    Keys are lower-cased and stripped.

    Args:
        text: Configuration file contents

    Returns:
        Mapping of key to raw string value
    """
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"Line {lineno}: expected key = value, got {raw!r}")
        key, value = line.split('=', 1)
        key = key.strip().lower()
        if not key:
            raise ConfigError(f"Line {lineno}: empty key")
        entries[key] = value.strip()
    return entries


def parse_float_list(value: str) -> List[float]:
    """Parse a comma-separated list of numbers."""
    try:
        return [float(item) for item in value.split(',') if item.strip()]
    except ValueError as e:
        raise ConfigError(f"Invalid number list {value!r}: {e}") from e


def parse_name_list(value: str) -> List[str]:
    """Parse a comma-separated list of identifiers."""
    return [item.strip().lower() for item in value.split(',') if item.strip()]


def derive_seed(base_seed: int, *keys: int) -> int:
    """
    Derive an independent 64-bit seed for one cell of an experiment grid.

    Args:
        base_seed: Run-level seed
        keys: Non-negative integers identifying the cell

    Returns:
        Deterministic seed for numpy.random.default_rng
    """
    sequence = np.random.SeedSequence(entropy=base_seed, spawn_key=tuple(keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
