"""
Radon Service Module
====================
Discrete Radon transform, peak extraction and wake geometry.

Coordinates are center-origin with y pointing down:
x = col - (M-1)/2, y = row - (M-1)/2, and a line is
rho = x cos(theta) + y sin(theta). For each (rho, theta) the transform
sums the nearest pixel at every integer step s along the line, over
s in [-R, R], R = ceil(M * sqrt(2) / 2).

Peaks are scored as |accum - count * mean| / sqrt(count), a zero-mean
matched filter that finds bright and dark lines alike without favoring
long chords.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from app.config import Config
from services.image_service import Image, rescale_to_8bit
from services.shrinkage_service import DenoisingService, ThresholdReport
from services.synthesis_service import rasterize_line, sample_range
from utils.exceptions import (
    BadThetaStep,
    ConfigError,
    InvalidInput,
    NonSquareImage,
    NoValidCells,
    OutOfRangeTheta,
)
from utils.helpers import image_center, round_half_up, trig_degrees
from utils.metrics import QualityReport, quality_report

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Radon accumulator indexed [rho_index, theta_index]."""

    thetas: np.ndarray
    rhos: np.ndarray
    accum: np.ndarray
    counts: np.ndarray
    image_mean: float
    size: int

    def cell(self, rho: float, theta: float) -> Tuple[int, int]:
        """Indices of the grid cell nearest to (rho, theta)."""
        i = int(np.argmin(np.abs(self.rhos - rho)))
        j = int(np.argmin(np.abs(self.thetas - theta)))
        return i, j

    def scores(self) -> np.ndarray:
        """Zero-mean matched-filter score per cell (0 where count is 0)."""
        deviation = self.accum - self.counts * self.image_mean
        root = np.sqrt(self.counts)
        return np.divide(np.abs(deviation), root, out=np.zeros_like(self.accum), where=self.counts > 0)


@dataclass(frozen=True)
class Peak:
    """One line hypothesis."""

    rho: float
    theta: float
    score: float
    polarity: str  # 'bright' or 'dark'
    arm_angle: float
    rho_corner: float

    @property
    def line_coefficients(self) -> Tuple[float, float, float]:
        """(a, b, c) of a*x + b*y = c in center-origin coordinates."""
        cos_t, sin_t = trig_degrees(np.array([self.theta]))
        return float(cos_t[0]), float(sin_t[0]), float(self.rho)


@dataclass(frozen=True)
class WakeDetection:
    """Ranked line hypotheses plus the wake-arm angle of the top one."""

    peaks: Tuple[Peak, ...]
    arm_angle: float
    low_confidence: bool
    size: int
    denoiser: str = 'none'
    sigma: Optional[float] = None
    thresholds: Optional[ThresholdReport] = field(default=None, compare=False)

    @property
    def top(self) -> Peak:
        return self.peaks[0]


def _validate_image(image: Image) -> None:
    if not image.is_square:
        raise NonSquareImage(f"Radon transform needs a square image, got {image.height}x{image.width}")


def theta_grid(theta_step: float) -> np.ndarray:
    """Angles in [0, 180) at a fixed step."""
    if not 0 < theta_step <= 90:
        raise BadThetaStep(f"theta_step must lie in (0, 90], got {theta_step}")
    count = int(np.ceil(180.0 / theta_step - 1e-9))
    return np.arange(count, dtype=np.float64) * theta_step


def _sample_nearest(pixels: np.ndarray, x: np.ndarray, y: np.ndarray, c: float):
    size = pixels.shape[0]
    rows = round_half_up(y + c)
    cols = round_half_up(x + c)
    inside = (rows >= 0) & (rows < size) & (cols >= 0) & (cols < size)
    values = np.where(inside, pixels[np.clip(rows, 0, size - 1), np.clip(cols, 0, size - 1)], 0.0)
    return values.sum(axis=1), inside.sum(axis=1)


def _sample_linear(pixels: np.ndarray, x: np.ndarray, y: np.ndarray, c: float):
    size = pixels.shape[0]
    fx, fy = x + c, y + c
    inside = (fx >= 0) & (fx <= size - 1) & (fy >= 0) & (fy <= size - 1)
    x0 = np.clip(np.floor(fx).astype(np.int64), 0, size - 2)
    y0 = np.clip(np.floor(fy).astype(np.int64), 0, size - 2)
    wx, wy = fx - x0, fy - y0
    values = (
        pixels[y0, x0] * (1 - wx) * (1 - wy)
        + pixels[y0, x0 + 1] * wx * (1 - wy)
        + pixels[y0 + 1, x0] * (1 - wx) * wy
        + pixels[y0 + 1, x0 + 1] * wx * wy
    )
    return np.where(inside, values, 0.0).sum(axis=1), inside.sum(axis=1)


def radon_transform(
    image: Image,
    theta_step: float = Config.THETA_STEP,
    interpolation: str = Config.INTERPOLATION
) -> Sinogram:
    """
    Discrete Radon transform of a square image.

    Args:
        image: Square image
        theta_step: Angular step in degrees, 0 < step <= 90
        interpolation: 'nearest' (default) or 'linear'

    Returns:
        Sinogram over rho in [-R, R] and theta in [0, 180)

    Raises:
        NonSquareImage: Image is not square
        BadThetaStep: Step out of range
    """
    _validate_image(image)
    thetas = theta_grid(theta_step)
    if interpolation not in ('nearest', 'linear'):
        raise ConfigError(f"Unknown interpolation {interpolation!r}")

    size = image.width
    # bilinear sampling needs at least a 2x2 neighborhood
    sampler = _sample_linear if interpolation == 'linear' and size > 1 else _sample_nearest
    c = image_center(size)
    s = sample_range(size)
    rhos = s.astype(np.int64)
    pixels = image.pixels

    accum = np.zeros((rhos.size, thetas.size))
    counts = np.zeros((rhos.size, thetas.size), dtype=np.int64)
    cos_t, sin_t = trig_degrees(thetas)

    # one independent projection per angle
    for j in range(thetas.size):
        x = rhos[:, None] * cos_t[j] - s[None, :] * sin_t[j]
        y = rhos[:, None] * sin_t[j] + s[None, :] * cos_t[j]
        accum[:, j], counts[:, j] = sampler(pixels, x, y, c)

    return Sinogram(thetas, rhos, accum, counts, float(pixels.mean()), size)


def _theta_distance(thetas: np.ndarray, theta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Angular distance on the 180-degree circle and whether it wraps."""
    diff = thetas - theta
    wrapped = np.abs(diff) > 90.0
    diff = np.where(diff > 90.0, diff - 180.0, np.where(diff < -90.0, diff + 180.0, diff))
    return np.abs(diff), wrapped


def find_peaks(
    sino: Sinogram,
    k: int = Config.TOP_K,
    nms_rho: float = Config.NMS_RHO,
    nms_theta: float = Config.NMS_THETA,
    min_count: Optional[int] = None
) -> List[Peak]:
    """
    Greedy top-k peak picking with non-maximum suppression.

    A cell is eligible when at least min_count samples fell inside the
    image. Each pick suppresses cells within +/- nms_rho and +/- nms_theta;
    across the 0/180 seam the suppressed rho window is mirrored because
    (rho, theta) and (-rho, theta - 180) are the same line.

    Args:
        sino: Sinogram
        k: Number of peaks wanted (>= 1)
        nms_rho: Suppression half-width in pixels
        nms_theta: Suppression half-width in degrees
        min_count: Minimum in-bounds samples (defaults to M/4)

    Returns:
        Peaks sorted by descending score (fewer than k if suppression exhausts the grid)

    Raises:
        NoValidCells: No cell has enough samples
    """
    if k < 1:
        raise InvalidInput(f"k must be >= 1, got {k}")
    if min_count is None:
        min_count = max(1, sino.size // 4)
    if min_count < 1:
        raise InvalidInput(f"min_count must be >= 1, got {min_count}")

    valid = sino.counts >= min_count
    if not valid.any():
        raise NoValidCells(f"No sinogram cell has >= {min_count} samples")

    scores = sino.scores()
    deviation = sino.accum - sino.counts * sino.image_mean
    available = valid.copy()
    rho_grid = sino.rhos[:, None].astype(np.float64)
    peaks = []

    while len(peaks) < k and available.any():
        masked = np.where(available, scores, -np.inf)
        i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
        rho, theta = float(sino.rhos[i]), float(sino.thetas[j])

        peaks.append(Peak(
            rho=rho,
            theta=theta,
            score=float(scores[i, j]),
            polarity='bright' if deviation[i, j] >= 0 else 'dark',
            arm_angle=wake_arm_angle(theta),
            rho_corner=to_corner_rho(rho, theta, sino.size)
        ))

        dtheta, wrapped = _theta_distance(sino.thetas, theta)
        target = np.where(wrapped, -rho, rho)[None, :]
        near = (np.abs(rho_grid - target) <= nms_rho) & (dtheta[None, :] <= nms_theta)
        available &= ~near

    return peaks


def wake_arm_angle(theta_peak: float) -> float:
    """
    Wake-arm angle from a detected line angle: (theta + 90) mod 180.

    Raises:
        OutOfRangeTheta: theta_peak outside [0, 180)
    """
    if not 0.0 <= theta_peak < 180.0:
        raise OutOfRangeTheta(f"theta must lie in [0, 180), got {theta_peak}")
    return float((theta_peak + 90.0) % 180.0)


def to_corner_rho(rho: float, theta: float, size: int) -> float:
    """Convert a center-origin rho to the top-left-corner-origin convention."""
    cos_t, sin_t = trig_degrees(np.array([theta]))
    return float(rho + image_center(size) * (cos_t[0] + sin_t[0]))


def detect_wake(
    image: Image,
    denoiser: str = 'none',
    k: int = Config.TOP_K,
    sigma: Optional[float] = None,
    theta_step: float = Config.THETA_STEP,
    nms_rho: float = Config.NMS_RHO,
    nms_theta: float = Config.NMS_THETA,
    min_count: Optional[int] = None,
    reference: Optional[Image] = None,
    interpolation: str = Config.INTERPOLATION,
    denoising_service: Optional[DenoisingService] = None
) -> Tuple[WakeDetection, Optional[QualityReport]]:
    """
    Full pipeline: optional denoise, Radon transform, peak picking, arm rule.

    Args:
        image: Square input image
        denoiser: 'none', 'sure', 'neighshrink' or 'universal'
        k: Number of peaks
        sigma: Noise std-dev passed to the denoiser (estimated when None)
        reference: Clean image; when given a QualityReport of the
            (denoised) image against it is returned
        denoising_service: Service carrying wavelet/levels/window settings

    Returns:
        Tuple of (WakeDetection, QualityReport or None)
    """
    _validate_image(image)
    service = denoising_service or DenoisingService()
    processed, thresholds = service.denoise(image, denoiser, sigma)

    sino = radon_transform(processed, theta_step, interpolation)
    peaks = find_peaks(sino, k, nms_rho, nms_theta, min_count)
    top = peaks[0]
    low_confidence = top.score <= 1e-12
    if low_confidence:
        logger.warning("Top Radon peak has zero score; detection is degenerate")

    detection = WakeDetection(
        peaks=tuple(peaks),
        arm_angle=top.arm_angle,
        low_confidence=low_confidence,
        size=image.width,
        denoiser=denoiser,
        sigma=thresholds.sigma if thresholds else sigma,
        thresholds=thresholds
    )

    quality = None
    if reference is not None:
        quality = quality_report(reference, processed)
    return detection, quality


def sinogram_heatmap(sino: Sinogram) -> Image:
    """Affine-rescaled accumulator as an image (rows rho, columns theta)."""
    return rescale_to_8bit(sino.accum)


def render_overlay(image: Image, detection: WakeDetection, value: float = 255.0) -> Image:
    """Copy of the image with every detected line drawn at the given grey level."""
    size = image.width
    s = sample_range(size)
    pixels = np.array(image.pixels)
    for peak in detection.peaks:
        pixels[rasterize_line(peak.rho, peak.theta, size, s)] = value
    return Image(pixels)


class WakeDetectionService:
    """Runs the detection pipeline with configured defaults."""

    def __init__(
        self,
        denoising_service: Optional[DenoisingService] = None,
        theta_step: float = Config.THETA_STEP,
        k: int = Config.TOP_K,
        nms_rho: float = Config.NMS_RHO,
        nms_theta: float = Config.NMS_THETA,
        interpolation: str = Config.INTERPOLATION
    ):
        self.denoising_service = denoising_service or DenoisingService()
        self.theta_step = theta_step
        self.k = k
        self.nms_rho = nms_rho
        self.nms_theta = nms_theta
        self.interpolation = interpolation

    def detect(
        self,
        image: Image,
        denoiser: str = 'none',
        sigma: Optional[float] = None,
        k: Optional[int] = None,
        reference: Optional[Image] = None,
        theta_step: Optional[float] = None
    ) -> Tuple[WakeDetection, Optional[QualityReport]]:
        """
        Detect wake lines in an image.

        Args:
            image: Square input image
            denoiser: Denoising method name
            sigma: Noise std-dev for the denoiser
            k: Override the configured number of peaks
            reference: Optional clean image for quality metrics
            theta_step: Override the configured angular step in degrees

        Returns:
            Tuple of (WakeDetection, QualityReport or None)
        """
        try:
            detection, quality = detect_wake(
                image,
                denoiser=denoiser,
                k=k or self.k,
                sigma=sigma,
                theta_step=self.theta_step if theta_step is None else theta_step,
                nms_rho=self.nms_rho,
                nms_theta=self.nms_theta,
                reference=reference,
                interpolation=self.interpolation,
                denoising_service=self.denoising_service
            )
            top = detection.top
            logger.info(
                f"Detected top line rho={top.rho:.0f} theta={top.theta:.1f} "
                f"score={top.score:.2f} arm={detection.arm_angle:.1f} ({denoiser})"
            )
            return detection, quality

        except Exception as e:
            logger.error(f"Error detecting wake: {e}")
            raise
