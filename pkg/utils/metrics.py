"""
Image quality metrics: empirical standard deviation, SNR, MSE and PSNR.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from app.config import Config
from services.image_service import Image
from utils.exceptions import DimensionMismatch, EmptyImage, ZeroNoise

INFINITE = math.inf


@dataclass(frozen=True)
class QualityReport:
    """Fidelity of a test image against a clean reference."""

    mse: float
    psnr: float  # dB, INFINITE when mse == 0
    snr: float
    signal_std: float
    noise_std: float
    peak: float = Config.PEAK_VALUE

    def to_dict(self) -> Dict[str, float]:
        return {
            'mse': self.mse,
            'psnr': self.psnr,
            'snr': self.snr,
            'signal_std': self.signal_std,
            'noise_std': self.noise_std,
            'peak': self.peak
        }


def _values(image) -> np.ndarray:
    arr = image.pixels if isinstance(image, Image) else np.asarray(image, dtype=np.float64)
    if arr.size == 0:
        raise EmptyImage("Image has no pixels")
    return arr


def empirical_std(image) -> float:
    """
    Population standard deviation of the grey levels.

    sqrt(1/|I| * sum((u(i) - mean)^2)), no Bessel correction.

    Args:
        image: Image or array of grey levels

    Returns:
        Standard deviation in grey levels
    """
    arr = _values(image)
    return float(np.sqrt(np.mean((arr - arr.mean()) ** 2)))


def snr(signal_std: float, noise_std: float) -> float:
    """
    Signal-to-noise ratio sigma(signal) / sigma(noise).

    Raises:
        ZeroNoise: noise_std is not positive
    """
    if noise_std <= 0:
        raise ZeroNoise(f"Noise std-dev must be > 0, got {noise_std}")
    return float(signal_std / noise_std)


def calculate_mse(reference: Image, test: Image) -> float:
    """
    Mean squared pixel difference.

    Raises:
        DimensionMismatch: Images differ in shape
    """
    ref, tst = _values(reference), _values(test)
    if ref.shape != tst.shape:
        raise DimensionMismatch(f"Shapes differ: {ref.shape} vs {tst.shape}")
    return float(np.mean((ref - tst) ** 2))


def psnr_from_mse(mse: float, peak: float = Config.PEAK_VALUE) -> float:
    if mse == 0:
        return INFINITE
    return float(10.0 * np.log10(peak ** 2 / mse))


def psnr(reference: Image, test: Image, peak: float = Config.PEAK_VALUE) -> float:
    """
    Peak signal-to-noise ratio 10 log10(peak^2 / mse) in dB.

    Args:
        reference: Clean image
        test: Image under evaluation
        peak: Peak grey level (255 for 8-bit scaled imagery)

    Returns:
        PSNR in dB, INFINITE for identical images
    """
    return psnr_from_mse(calculate_mse(reference, test), peak)


def quality_report(
    reference: Image,
    test: Image,
    noise_std: Optional[float] = None,
    peak: float = Config.PEAK_VALUE
) -> QualityReport:
    """
    Compute all quality metrics of a test image against its reference.

    Args:
        reference: Clean image
        test: Noisy or denoised image
        noise_std: Known noise std-dev; measured from (test - reference) when None
        peak: Peak grey level

    Returns:
        QualityReport
    """
    mse = calculate_mse(reference, test)
    signal_std = empirical_std(reference)
    if noise_std is None:
        noise_std = empirical_std(test.pixels - reference.pixels)
    ratio = snr(signal_std, noise_std) if noise_std > 0 else INFINITE

    return QualityReport(
        mse=mse,
        psnr=psnr_from_mse(mse, peak),
        snr=ratio,
        signal_std=signal_std,
        noise_std=float(noise_std),
        peak=peak
    )
