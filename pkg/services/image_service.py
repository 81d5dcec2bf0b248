"""
Image Service Module
====================
Grey-level image representation, 8-bit PGM interchange and seeded
Gaussian noise injection.

Pixels are float64, row-major, indexed (row, col). Rounding and clamping
only happen on 8-bit export.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from utils.exceptions import (
    InvalidImage,
    MalformedHeader,
    NegativeSigma,
    TruncatedPayload,
    UnsupportedMaxval,
)
from utils.helpers import round_half_up

logger = logging.getLogger(__name__)

_WHITESPACE = b' \t\r\n\x0b\x0c'


@dataclass(frozen=True, eq=False)
class Image:
    """Immutable grey-level image; values nominally 0-255 but unbounded."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidImage(f"Expected a non-empty 2-D pixel grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidImage("Pixel values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, 'pixels', arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.pixels.shape

    @property
    def is_square(self) -> bool:
        return self.width == self.height

    @classmethod
    def constant(cls, size: int, value: float) -> 'Image':
        return cls(np.full((size, size), float(value)))

    def copy(self) -> 'Image':
        return Image(self.pixels)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise of a given std-dev, seeded."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise NegativeSigma(f"Noise sigma must be >= 0, got {self.sigma}")


class _HeaderReader:
    """Whitespace/comment-aware token reader over a netpbm header."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip_whitespace_and_comments(self):
        data = self.data
        while self.pos < len(data):
            if data[self.pos] == ord('#'):
                end = data.find(b'\n', self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif data[self.pos] in _WHITESPACE:
                self.pos += 1
            else:
                break

    def token(self) -> bytes:
        self._skip_whitespace_and_comments()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos] not in _WHITESPACE:
            self.pos += 1
        if start == self.pos:
            raise MalformedHeader("Unexpected end of header")
        return self.data[start:self.pos]

    def integer(self, field: str) -> int:
        raw = self.token()
        try:
            return int(raw)
        except ValueError:
            raise MalformedHeader(f"Invalid {field}: {raw!r}")


def read_pgm(data: bytes) -> Image:
    """
    Decode a binary (P5) or ASCII (P2) PGM.

    Sample values are kept as read; with maxval <= 255 they already lie
    on the 0-255 grey scale.

    Args:
        data: Raw file contents

    Returns:
        Decoded Image

    Raises:
        MalformedHeader: Bad magic, dimensions or maxval
        UnsupportedMaxval: maxval above 255 (16-bit samples)
        TruncatedPayload: Fewer samples than the header declares
    """
    reader = _HeaderReader(bytes(data))
    magic = reader.token()
    if magic not in (b'P5', b'P2'):
        raise MalformedHeader(f"Unsupported magic number {magic!r}")

    width = reader.integer('width')
    height = reader.integer('height')
    maxval = reader.integer('maxval')
    if width < 1 or height < 1:
        raise MalformedHeader(f"Invalid dimensions {width}x{height}")
    if maxval < 1:
        raise MalformedHeader(f"Invalid maxval {maxval}")
    if maxval > 255:
        raise UnsupportedMaxval(f"maxval {maxval} exceeds 255")

    count = width * height
    if magic == b'P5':
        # exactly one whitespace byte separates maxval from the raster
        start = reader.pos + 1
        payload = reader.data[start:start + count]
        if len(payload) < count:
            raise TruncatedPayload(f"Expected {count} bytes, got {len(payload)}")
        samples = np.frombuffer(payload, dtype=np.uint8)
    else:
        tokens = reader.data[reader.pos:].split()
        if len(tokens) < count:
            raise TruncatedPayload(f"Expected {count} samples, got {len(tokens)}")
        try:
            samples = np.array([int(tok) for tok in tokens[:count]], dtype=np.int64)
        except ValueError as e:
            raise InvalidImage(f"Non-numeric sample in ASCII raster: {e}") from e

    if samples.min() < 0 or samples.max() > maxval:
        raise InvalidImage(f"Sample values must lie in [0, {maxval}]")

    return Image(samples.reshape(height, width).astype(np.float64))


def to_bytes_8bit(pixels: np.ndarray) -> np.ndarray:
    """Round half-up and clamp to [0, 255] as uint8."""
    return np.clip(round_half_up(pixels), 0, 255).astype(np.uint8)


def write_pgm(image: Image) -> bytes:
    """
    Encode an image as binary P5 with maxval 255.

    Args:
        image: Image to export

    Returns:
        PGM file contents
    """
    header = f"P5\n{image.width} {image.height}\n255\n".encode('ascii')
    return header + to_bytes_8bit(image.pixels).tobytes()


def load_pgm(path: Union[str, Path]) -> Image:
    """Read a PGM file from disk."""
    image = read_pgm(Path(path).read_bytes())
    logger.info(f"Loaded {image.width}x{image.height} image from {path}")
    return image


def save_pgm(image: Image, path: Union[str, Path]) -> Path:
    """Write an image to disk as P5, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(write_pgm(image))
    logger.info(f"Wrote {image.width}x{image.height} image to {path}")
    return path


def add_gaussian_noise(image: Image, spec: NoiseSpec) -> Image:
    """
    Add i.i.d. Normal(0, sigma^2) noise without clamping.

    Variates come from numpy's PCG64 generator seeded with spec.seed and
    its ziggurat normal sampler, so the output is a pure function of
    (image, sigma, seed).

    Args:
        image: Clean image
        spec: Noise level and seed

    Returns:
        Noisy image (float domain preserved)
    """
    if spec.sigma < 0:
        raise NegativeSigma(f"Noise sigma must be >= 0, got {spec.sigma}")
    if spec.sigma == 0:
        return image.copy()

    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, spec.sigma, size=image.shape)
    return Image(image.pixels + noise)


def rescale_to_8bit(values: np.ndarray) -> Image:
    """
    Affine-rescale an arbitrary real array onto 0-255 for viewing.

    A constant array maps to all zeros.
    """
    arr = np.asarray(values, dtype=np.float64)
    low, high = float(arr.min()), float(arr.max())
    if high == low:
        return Image(np.zeros_like(arr))
    return Image((arr - low) * (255.0 / (high - low)))
