"""
Wavelet Service Module
======================
Orthonormal 2-D discrete wavelet transform with periodic extension.

Filter banks and the multilevel transform come from PyWavelets in
'periodization' mode, which keeps the transform orthonormal: energy is
conserved and white noise stays white with the same variance in every
subband.

Pyramid layout: one LL band plus, for each level 1..L (1 = finest), the
three detail bands (LH, HL, HH). LH holds horizontal edges, HL vertical
edges and HH diagonals.
"""

import logging
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterator, List, Tuple, Union

import numpy as np
import pywt

from app.config import Config
from services.image_service import Image, rescale_to_8bit, save_pgm
from utils.exceptions import BadDimensions, MalformedPyramid, UnknownWavelet

logger = logging.getLogger(__name__)

ORIENTATIONS = ('LH', 'HL', 'HH')

DetailLevel = Tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True, eq=False)
class FilterPair:
    """Analysis lowpass/highpass taps of an orthonormal wavelet."""

    name: str
    lowpass: np.ndarray
    highpass: np.ndarray

    @property
    def length(self) -> int:
        return len(self.lowpass)


@dataclass(frozen=True, eq=False)
class Subband:
    """One detail subband of a pyramid, addressed by level and orientation."""

    level: int
    orientation: str
    coefficients: np.ndarray

    @property
    def name(self) -> str:
        return f"{self.orientation}{self.level}"


@dataclass(frozen=True, eq=False)
class WaveletPyramid:
    """Multilevel decomposition: coarsest LL band plus per-level details."""

    ll: np.ndarray
    details: Tuple[DetailLevel, ...]
    wavelet: str = field(default=Config.WAVELET)

    @property
    def levels(self) -> int:
        return len(self.details)

    def subbands(self) -> Iterator[Subband]:
        """Iterate detail subbands finest level first, LH/HL/HH within a level."""
        for level, bands in enumerate(self.details, start=1):
            for orientation, coeffs in zip(ORIENTATIONS, bands):
                yield Subband(level, orientation, coeffs)

    def detail(self, level: int, orientation: str) -> np.ndarray:
        return self.details[level - 1][ORIENTATIONS.index(orientation)]

    def with_details(self, details: List[DetailLevel]) -> 'WaveletPyramid':
        """Same LL band and wavelet with replaced detail bands."""
        return WaveletPyramid(self.ll, tuple(tuple(level) for level in details), self.wavelet)

    def coefficient_count(self) -> int:
        return self.ll.size + sum(band.coefficients.size for band in self.subbands())

    def energy(self) -> float:
        return float(np.sum(self.ll ** 2) + sum(np.sum(b.coefficients ** 2) for b in self.subbands()))

    def to_pywt(self) -> list:
        """Coefficient list in PyWavelets order (coarsest level first)."""
        return [self.ll] + [tuple(level) for level in reversed(self.details)]


@lru_cache(maxsize=None)
def wavelet_filters(name: str) -> FilterPair:
    """
    Look up the filter bank of a supported orthonormal wavelet.

    The highpass is the quadrature mirror of the lowpass:
    highpass[k] = (-1)^k * lowpass[L-1-k]. PyWavelets' tables leave a
    residue of order 1e-12 in sum(highpass); the lowpass is nudged along
    the alternating-sign vector so the highpass sums to zero and constant
    images have zero detail at every level.

    Args:
        name: 'sym8', 'db8' or 'haar'

    Returns:
        FilterPair with float64 taps
    """
    name = str(name).lower()
    if name not in Config.WAVELETS:
        raise UnknownWavelet(f"Unsupported wavelet {name!r}; choose from {', '.join(Config.WAVELETS)}")

    lowpass = np.asarray(pywt.Wavelet(name).rec_lo, dtype=np.float64)
    signs = np.where(np.arange(lowpass.size) % 2 == 0, 1.0, -1.0)
    lowpass = lowpass - signs * (np.dot(signs, lowpass) / lowpass.size)
    highpass = signs * lowpass[::-1]
    lowpass.setflags(write=False)
    highpass.setflags(write=False)
    return FilterPair(name, lowpass, highpass)


@lru_cache(maxsize=None)
def _pywt_wavelet(name: str) -> pywt.Wavelet:
    """PyWavelets object built from the corrected filter bank."""
    bank = wavelet_filters(name)
    rec_lo, rec_hi = bank.lowpass, bank.highpass
    wavelet = pywt.Wavelet(
        name, filter_bank=[rec_lo[::-1].tolist(), rec_hi[::-1].tolist(), rec_lo.tolist(), rec_hi.tolist()]
    )
    wavelet.orthogonal = True
    return wavelet


def _check_wavelet(name: str) -> str:
    return wavelet_filters(name).name


def dwt2(image: Image, levels: int = Config.LEVELS, wavelet: str = Config.WAVELET) -> WaveletPyramid:
    """
    Forward multilevel 2-D DWT.

    Args:
        image: Square image whose side is divisible by 2**levels
        levels: Number of decomposition levels (>= 1)
        wavelet: Wavelet identifier

    Returns:
        WaveletPyramid

    Raises:
        BadDimensions: Non-square image, side not divisible, or levels < 1
    """
    wavelet = _check_wavelet(wavelet)
    if levels < 1:
        raise BadDimensions(f"levels must be >= 1, got {levels}")
    if not image.is_square:
        raise BadDimensions(f"Image must be square, got {image.height}x{image.width}")
    if image.width % (2 ** levels):
        raise BadDimensions(
            f"Side {image.width} is not divisible by 2**{levels}; pad the image first"
        )

    with warnings.catch_warnings():
        # PyWavelets warns when levels exceed its boundary-free maximum;
        # periodization is exact at any depth.
        warnings.simplefilter('ignore', UserWarning)
        coeffs = pywt.wavedec2(image.pixels, _pywt_wavelet(wavelet), mode='periodization', level=levels)
    ll = coeffs[0]
    details = tuple(tuple(np.asarray(band) for band in level) for level in reversed(coeffs[1:]))
    return WaveletPyramid(np.asarray(ll), details, wavelet)


def _validate_pyramid(pyramid: WaveletPyramid) -> None:
    ll = np.asarray(pyramid.ll)
    if ll.ndim != 2 or ll.shape[0] != ll.shape[1] or ll.size == 0:
        raise MalformedPyramid(f"LL band must be a non-empty square matrix, got {ll.shape}")
    if pyramid.levels < 1:
        raise MalformedPyramid("Pyramid has no detail levels")

    coarse = ll.shape[0]
    for level, bands in enumerate(pyramid.details, start=1):
        if len(bands) != 3:
            raise MalformedPyramid(f"Level {level} has {len(bands)} subbands, expected 3")
        side = coarse * 2 ** (pyramid.levels - level)
        for orientation, band in zip(ORIENTATIONS, bands):
            if np.shape(band) != (side, side):
                raise MalformedPyramid(
                    f"Subband {orientation}{level} has shape {np.shape(band)}, expected {(side, side)}"
                )


def idwt2(pyramid: WaveletPyramid) -> Image:
    """
    Inverse of dwt2 up to floating-point error.

    Raises:
        MalformedPyramid: Subband shapes inconsistent with the LL band
    """
    _check_wavelet(pyramid.wavelet)
    _validate_pyramid(pyramid)
    pixels = pywt.waverec2(pyramid.to_pywt(), _pywt_wavelet(pyramid.wavelet), mode='periodization')
    return Image(pixels)


def padded_side(height: int, width: int, levels: int) -> int:
    """Smallest square side >= both dimensions and divisible by 2**levels."""
    block = 2 ** levels
    return int(np.ceil(max(height, width) / block)) * block


def pad_for_levels(image: Image, levels: int, mode: str = Config.PAD_MODE) -> Tuple[Image, Tuple[int, int]]:
    """
    Replicate-pad an image to a square side divisible by 2**levels.

    120x120 with 4 levels becomes 128x128; the original shape is returned
    so the caller can crop back after reconstruction.
    """
    side = padded_side(image.height, image.width, levels)
    pad = ((0, side - image.height), (0, side - image.width))
    if side == image.height == image.width:
        return image, image.shape
    logger.debug(f"Padding {image.height}x{image.width} to {side}x{side} ({mode})")
    return Image(np.pad(image.pixels, pad, mode=mode)), image.shape


def crop(image: Image, shape: Tuple[int, int]) -> Image:
    """Undo pad_for_levels."""
    if image.shape == tuple(shape):
        return image
    return Image(image.pixels[:shape[0], :shape[1]])


def dump_subbands(pyramid: WaveletPyramid, directory: Union[str, Path]) -> List[Path]:
    """
    Write every band of a pyramid as an affine-rescaled PGM.

    Files are named LL.pgm, LH1.pgm, HL1.pgm, HH1.pgm, ...

    Returns:
        Paths written
    """
    directory = Path(directory)
    written = [save_pgm(rescale_to_8bit(pyramid.ll), directory / 'LL.pgm')]
    for band in pyramid.subbands():
        written.append(save_pgm(rescale_to_8bit(band.coefficients), directory / f"{band.name}.pgm"))
    logger.info(f"Dumped {len(written)} subbands to {directory}")
    return written
