"""
Synthesis Service Module
========================
Parametric synthetic wake scenes with exact ground truth.

Scene model: the vessel sits at the point of its track nearest the image
center. The turbulent wake is rasterized along the whole track line and
the two Kelvin arms trail behind the vessel at +/- arm_half_angle to the
track. The centerline carries the full line contrast and the arms the
fraction arm_contrast of it; the turbulent wake dominates the faint
Kelvin arms. Lines are one pixel wide, sampled exactly the way the
Radon transform samples them, so each line's (rho, theta) is exact.
"""

import logging
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Tuple

import numpy as np

from app.config import Config
from services.image_service import Image
from utils.exceptions import ConfigError, InvalidScene
from utils.helpers import image_center, normalize_line, round_half_up, trig_degrees

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WakeScene:
    """Geometry and radiometry of a synthetic wake scene."""

    size: int = Config.SCENE_SIZE
    track_theta: float = Config.SCENE_THETA
    track_rho: float = Config.SCENE_RHO
    arm_half_angle: float = Config.ARM_HALF_ANGLE
    background: float = Config.BACKGROUND
    line_delta: float = Config.LINE_DELTA
    arm_contrast: float = Config.ARM_CONTRAST
    texture_std: float = Config.TEXTURE_STD
    seed: int = Config.SEED

    def validate(self) -> 'WakeScene':
        if int(self.size) != self.size or self.size < 16:
            raise InvalidScene(f"size must be an integer >= 16, got {self.size}")
        if not 0.0 <= self.track_theta < 180.0:
            raise InvalidScene(f"track_theta must lie in [0, 180), got {self.track_theta}")
        if abs(self.track_rho) >= self.size / np.sqrt(2.0):
            raise InvalidScene(f"|track_rho| must be < size/sqrt(2), got {self.track_rho}")
        if not 0.0 <= self.arm_half_angle < 90.0:
            raise InvalidScene(f"arm_half_angle must lie in [0, 90), got {self.arm_half_angle}")
        if not 0.0 < self.arm_contrast <= 1.0:
            raise InvalidScene(f"arm_contrast must lie in (0, 1], got {self.arm_contrast}")
        if not 0.0 <= self.texture_std <= 2.0:
            raise InvalidScene(f"texture_std must lie in [0, 2], got {self.texture_std}")
        if self.seed < 0:
            raise InvalidScene(f"seed must be >= 0, got {self.seed}")
        return self


@dataclass(frozen=True)
class WakeLine:
    """One rasterized line of a scene."""

    name: str
    rho: float
    theta: float
    sign: int


@dataclass(frozen=True)
class GroundTruth:
    """Exact (rho, theta) of the centerline and both arms."""

    lines: Tuple[WakeLine, ...]

    @property
    def centerline(self) -> WakeLine:
        return self.lines[0]

    def to_rows(self) -> List[Dict]:
        return [{'line': ln.name, 'rho': ln.rho, 'theta': ln.theta, 'sign': ln.sign} for ln in self.lines]


# Scene keys accepted in key=value files and their field names
SCENE_KEYS = {
    'size': 'size',
    'theta': 'track_theta',
    'track_theta': 'track_theta',
    'rho': 'track_rho',
    'track_rho': 'track_rho',
    'arm_half_angle': 'arm_half_angle',
    'background': 'background',
    'delta': 'line_delta',
    'line_delta': 'line_delta',
    'arm_contrast': 'arm_contrast',
    'texture_std': 'texture_std',
    'scene_seed': 'seed',
}


def scene_from_mapping(values: Dict[str, object], base: WakeScene = None) -> WakeScene:
    """
    Build a scene from loosely typed key/value pairs.

    Unknown keys raise ConfigError; unspecified fields keep the base scene's values.
    """
    params = asdict(base or WakeScene())
    types = {f.name: f.type for f in fields(WakeScene)}
    for key, raw in values.items():
        name = SCENE_KEYS.get(key)
        if name is None:
            raise ConfigError(f"Unknown scene key {key!r}")
        try:
            params[name] = int(float(raw)) if types[name] in (int, 'int') else float(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid value for {key}: {raw!r}") from e
    return WakeScene(**params)


def line_samples(rho: float, theta: float, size: int, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nearest-neighbor pixel (row, col) of the points at offsets s along a line.

    Center-origin coordinates: x = col - c, y = row - c, y pointing down,
    c = (size - 1) / 2. The point at offset s is
    (rho cos(theta) - s sin(theta), rho sin(theta) + s cos(theta)).
    """
    cos_t, sin_t = trig_degrees(np.array([theta]))
    c = image_center(size)
    x = rho * cos_t[0] - s * sin_t[0]
    y = rho * sin_t[0] + s * cos_t[0]
    return round_half_up(y + c), round_half_up(x + c)


def rasterize_line(rho: float, theta: float, size: int, s: np.ndarray) -> np.ndarray:
    """Boolean mask of the in-bounds pixels a line touches at offsets s."""
    rows, cols = line_samples(rho, theta, size, s)
    inside = (rows >= 0) & (rows < size) & (cols >= 0) & (cols < size)
    mask = np.zeros((size, size), dtype=bool)
    mask[rows[inside], cols[inside]] = True
    return mask


def sample_range(size: int) -> np.ndarray:
    reach = int(np.ceil(size * np.sqrt(2.0) / 2.0))
    return np.arange(-reach, reach + 1, dtype=np.float64)


def synth_wake(scene: WakeScene) -> Tuple[Image, GroundTruth]:
    """
    Generate a wake scene and its ground truth.

    Args:
        scene: Scene parameters

    Returns:
        Tuple of (image, ground truth lines: centerline, port arm, starboard arm)

    Raises:
        InvalidScene: Scene parameters out of range
    """
    scene.validate()
    size = int(scene.size)
    s = sample_range(size)
    theta = float(scene.track_theta)
    rho = float(scene.track_rho)

    # vessel position: foot of the perpendicular from the center to the track
    cos_t, sin_t = trig_degrees(np.array([theta]))
    apex_x, apex_y = rho * cos_t[0], rho * sin_t[0]

    centerline = rasterize_line(rho, theta, size, s)
    arms = np.zeros_like(centerline)
    sign = 1 if scene.line_delta >= 0 else -1
    lines = [WakeLine('centerline', rho, theta, sign)]

    for name, offset in (('arm_port', scene.arm_half_angle), ('arm_starboard', -scene.arm_half_angle)):
        arm_theta = theta + offset
        a_cos, a_sin = trig_degrees(np.array([arm_theta]))
        arm_rho = apex_x * a_cos[0] + apex_y * a_sin[0]
        # offset of the apex along the arm; the arm trails on the s <= apex side
        apex_s = -apex_x * a_sin[0] + apex_y * a_cos[0]
        trailing = s[s <= apex_s]
        arms |= rasterize_line(arm_rho, arm_theta, size, trailing)
        arm_rho, arm_theta = normalize_line(arm_rho, arm_theta)
        lines.append(WakeLine(name, float(arm_rho), float(arm_theta), sign))

    rng = np.random.default_rng(scene.seed)
    pixels = np.full((size, size), float(scene.background))
    if scene.texture_std > 0:
        pixels += rng.normal(0.0, scene.texture_std, size=pixels.shape)
    pixels[centerline] += scene.line_delta
    pixels[arms & ~centerline] += scene.arm_contrast * scene.line_delta

    touched = int((centerline | arms).sum())
    logger.debug(f"Synthesized {size}x{size} scene: track ({rho}, {theta}), {touched} line pixels")
    return Image(pixels), GroundTruth(tuple(lines))
