"""
Shrinkage Service Module
========================
Wavelet-shrinkage denoisers:

- SURE: per-subband soft thresholding with the threshold that minimizes
  Stein's unbiased risk estimate on sigma-normalized coefficients,
  capped at the universal threshold sqrt(2 ln d).
- NeighShrink: each coefficient scaled by max(0, 1 - lambda^2 / S^2),
  S^2 being the energy of its window x window neighborhood.
- Universal: soft thresholding at sigma * sqrt(2 ln d) in every band,
  the non-adaptive baseline.

The LL band always passes through untouched.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app.config import Config
from services.image_service import Image
from services.wavelet_service import (
    ORIENTATIONS,
    WaveletPyramid,
    crop,
    dwt2,
    idwt2,
    pad_for_levels,
)
from utils.exceptions import (
    EmptySubband,
    EmptyVector,
    EvenWindow,
    NegativeSigma,
    NegativeThreshold,
    UnknownDenoiser,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SubbandThreshold:
    """Threshold chosen for one detail subband."""

    subband: str
    sigma: float
    threshold: float  # unit-variance scale
    risk: float
    capped: bool


@dataclass(frozen=True)
class ThresholdReport:
    """Per-subband SURE decisions of one denoising run."""

    sigma: float
    entries: Tuple[SubbandThreshold, ...]

    def to_rows(self) -> List[dict]:
        return [
            {
                'subband': e.subband,
                'sigma': e.sigma,
                't': e.threshold,
                'risk': e.risk,
                'capped': int(e.capped),
            }
            for e in self.entries
        ]


def estimate_noise_sigma(pyramid: WaveletPyramid) -> float:
    """
    Robust noise estimate median(|HH1|) / 0.6745 from the finest diagonal band.

    Raises:
        EmptySubband: Pyramid has no level-1 HH coefficients
    """
    if pyramid.levels < 1:
        raise EmptySubband("Pyramid has no level-1 HH subband")
    hh1 = np.asarray(pyramid.detail(1, 'HH'))
    if hh1.size == 0:
        raise EmptySubband("Level-1 HH subband is empty")
    return float(np.median(np.abs(hh1)) / Config.MAD_SCALE)


def soft_threshold(x, t: float):
    """
    Soft thresholding sign(x) * max(|x| - t, 0).

    Works on scalars and arrays alike.
    """
    if t < 0:
        raise NegativeThreshold(f"Threshold must be >= 0, got {t}")
    shrunk = np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    return float(shrunk) if np.ndim(shrunk) == 0 else shrunk


def _as_vector(x) -> np.ndarray:
    vec = np.abs(np.ravel(np.asarray(x, dtype=np.float64)))
    if vec.size == 0:
        raise EmptyVector("Coefficient vector is empty")
    return vec


def universal_threshold(d: int) -> float:
    """sqrt(2 ln d) for d unit-variance coefficients."""
    return float(np.sqrt(2.0 * np.log(d))) if d > 1 else 0.0


def sure_cost(x, t: float) -> float:
    """
    Stein's unbiased estimate of soft-threshold risk:
    d - 2 * #{i : |x_i| <= t} + sum(min(|x_i|, t)^2).

    Args:
        x: Unit-variance coefficient vector
        t: Threshold (>= 0)
    """
    if t < 0:
        raise NegativeThreshold(f"Threshold must be >= 0, got {t}")
    a = _as_vector(x)
    d = a.size
    return float(d - 2 * np.count_nonzero(a <= t) + np.sum(np.minimum(a, t) ** 2))


def sure_threshold(x) -> float:
    """
    SURE-optimal threshold over the candidate set {0} U {|x_i| <= lambda_u} U {lambda_u}.

    The risk is piecewise increasing between consecutive |x_i|, so its
    minimum on [0, lambda_u] lies on a candidate. Ties go to the smaller t.

    Args:
        x: Unit-variance coefficient vector

    Returns:
        Threshold t* on the unit-variance scale
    """
    a = np.sort(_as_vector(x))
    d = a.size
    lam = universal_threshold(d)

    candidates = np.unique(np.concatenate(([0.0], a[a <= lam], [lam])))
    # cumulative sum of squares of the k smallest magnitudes
    cum_sq = np.concatenate(([0.0], np.cumsum(a ** 2)))
    below = np.searchsorted(a, candidates, side='right')
    costs = d - 2.0 * below + cum_sq[below] + (d - below) * candidates ** 2
    return float(candidates[int(np.argmin(costs))])


def _hybrid_is_sparse(x: np.ndarray) -> bool:
    d = x.size
    if d < 2:
        return False
    energy = (np.sum(x ** 2) - d) / d
    return energy <= np.log2(d) ** 1.5 / np.sqrt(d)


def _check_sigma(sigma: Optional[float]) -> None:
    if sigma is not None and sigma < 0:
        raise NegativeSigma(f"Noise sigma must be >= 0, got {sigma}")


def sure_shrink_pyramid(
    pyramid: WaveletPyramid,
    sigma: float,
    hybrid: bool = Config.HYBRID_SURE
) -> Tuple[WaveletPyramid, ThresholdReport]:
    """
    Apply SURE soft thresholding to every detail band of a pyramid.

    Args:
        pyramid: Decomposition of the noisy image
        sigma: Noise std-dev in grey levels
        hybrid: Fall back to the universal threshold in sparse bands

    Returns:
        Shrunk pyramid and the per-band threshold report
    """
    _check_sigma(sigma)
    entries = []
    details = [list(level) for level in pyramid.details]
    scale = sigma if sigma > 0 else 1.0

    for band in pyramid.subbands():
        coeffs = band.coefficients
        normalized = np.ravel(coeffs) / scale
        lam = universal_threshold(normalized.size)
        if sigma == 0:
            t = 0.0
        elif hybrid and _hybrid_is_sparse(normalized):
            t = lam
        else:
            t = sure_threshold(normalized)
        risk = sure_cost(normalized, t)
        capped = bool(sigma > 0 and lam > 0 and t == lam)

        details[band.level - 1][ORIENTATIONS.index(band.orientation)] = soft_threshold(coeffs, t * sigma)
        entries.append(SubbandThreshold(band.name, float(sigma), t, risk, capped))
        logger.debug(f"{band.name}: t={t:.4f} risk={risk:.2f} capped={capped}")

    return pyramid.with_details(details), ThresholdReport(float(sigma), tuple(entries))


def universal_shrink_pyramid(pyramid: WaveletPyramid, sigma: float) -> WaveletPyramid:
    """Soft thresholding at sigma * sqrt(2 ln d) in every detail band."""
    _check_sigma(sigma)
    details = [
        tuple(soft_threshold(band, sigma * universal_threshold(band.size)) for band in level)
        for level in pyramid.details
    ]
    return pyramid.with_details(details)


def neighborhood_energy(coeffs: np.ndarray, window: int) -> np.ndarray:
    """Sum of squared coefficients over each window x window neighborhood, zero-padded."""
    half = window // 2
    padded = np.pad(np.asarray(coeffs, dtype=np.float64) ** 2, half, mode='constant')
    return sliding_window_view(padded, (window, window)).sum(axis=(-2, -1))


def _check_window(window: int) -> None:
    if window < 1 or window % 2 == 0:
        raise EvenWindow(f"Window must be odd and >= 1, got {window}")


def neighshrink_pyramid(pyramid: WaveletPyramid, sigma: float, window: int = Config.WINDOW) -> WaveletPyramid:
    """
    NeighShrink every detail band of a pyramid.

    For a band of n coefficients, lambda^2 = 2 sigma^2 ln n and each
    coefficient is multiplied by max(0, 1 - lambda^2 / S^2).
    """
    _check_sigma(sigma)
    _check_window(window)

    details = []
    for level in pyramid.details:
        shrunk = []
        for band in level:
            lam_sq = 2.0 * sigma ** 2 * np.log(band.size)
            energy = neighborhood_energy(band, window)
            ratio = np.divide(lam_sq, energy, out=np.full(energy.shape, np.inf), where=energy > 0)
            beta = np.maximum(0.0, 1.0 - ratio)
            shrunk.append(band * beta)
        details.append(tuple(shrunk))
    return pyramid.with_details(details)


def _run_denoiser(
    image: Image,
    sigma: Optional[float],
    levels: int,
    wavelet: str,
    shrink: Callable[[WaveletPyramid, float], WaveletPyramid]
) -> Tuple[Image, float]:
    _check_sigma(sigma)
    padded, shape = pad_for_levels(image, levels)
    pyramid = dwt2(padded, levels, wavelet)

    if sigma is None:
        sigma = estimate_noise_sigma(pyramid)
        logger.info(f"Estimated noise sigma {sigma:.3f} from HH1")
        if sigma == 0:
            logger.warning("Estimated noise sigma is 0; returning the image unchanged")
    if sigma == 0:
        return image.copy(), 0.0

    restored = idwt2(shrink(pyramid, sigma))
    return crop(restored, shape), float(sigma)


def denoise_sureshrink(
    image: Image,
    sigma: Optional[float] = None,
    wavelet: str = Config.WAVELET,
    levels: int = Config.LEVELS,
    hybrid: bool = Config.HYBRID_SURE
) -> Tuple[Image, ThresholdReport]:
    """
    SURE-thresholding denoiser.

    Args:
        image: Noisy image
        sigma: Noise std-dev; estimated from HH1 when omitted
        wavelet: Wavelet identifier
        levels: Decomposition depth
        hybrid: Use the universal threshold in sparse bands

    Returns:
        Tuple of (denoised image, threshold report)
    """
    reports = []

    def shrink(pyramid, s):
        shrunk, report = sure_shrink_pyramid(pyramid, s, hybrid)
        reports.append(report)
        return shrunk

    denoised, used_sigma = _run_denoiser(image, sigma, levels, wavelet, shrink)
    if not reports:
        # zero sigma: every threshold is 0 and the image passes through
        padded, _ = pad_for_levels(image, levels)
        _, report = sure_shrink_pyramid(dwt2(padded, levels, wavelet), 0.0)
        reports.append(report)
    return denoised, reports[0]


def denoise_neighshrink(
    image: Image,
    sigma: Optional[float] = None,
    window: int = Config.WINDOW,
    wavelet: str = Config.WAVELET,
    levels: int = Config.LEVELS
) -> Image:
    """
    NeighShrink denoiser.

    Args:
        image: Noisy image
        sigma: Noise std-dev; estimated from HH1 when omitted
        window: Odd neighborhood side

    Returns:
        Denoised image
    """
    _check_window(window)
    denoised, _ = _run_denoiser(
        image, sigma, levels, wavelet,
        lambda pyramid, s: neighshrink_pyramid(pyramid, s, window)
    )
    return denoised


def denoise_universal(
    image: Image,
    sigma: Optional[float] = None,
    wavelet: str = Config.WAVELET,
    levels: int = Config.LEVELS
) -> Image:
    """Universal-threshold (VisuShrink-style) soft denoiser."""
    denoised, _ = _run_denoiser(image, sigma, levels, wavelet, universal_shrink_pyramid)
    return denoised


class DenoisingService:
    """Dispatches denoising requests by method name."""

    def __init__(
        self,
        wavelet: str = Config.WAVELET,
        levels: int = Config.LEVELS,
        window: int = Config.WINDOW,
        hybrid: bool = Config.HYBRID_SURE
    ):
        """
        Initialize the denoising service.

        Args:
            wavelet: Wavelet identifier
            levels: Decomposition depth
            window: NeighShrink window side
            hybrid: Hybrid SURE switch
        """
        self.wavelet = wavelet
        self.levels = levels
        self.window = window
        self.hybrid = hybrid

    def denoise(
        self,
        image: Image,
        method: str,
        sigma: Optional[float] = None,
        window: Optional[int] = None
    ) -> Tuple[Image, Optional[ThresholdReport]]:
        """
        Denoise an image with the named method.

        Args:
            image: Noisy image
            method: 'none', 'sure', 'neighshrink' or 'universal'
            sigma: Noise std-dev (estimated when None)
            window: Override the configured NeighShrink window

        Returns:
            Tuple of (image, threshold report for 'sure' else None)
        """
        method = method.lower()
        if method not in Config.DENOISERS:
            raise UnknownDenoiser(f"Unknown denoiser {method!r}; choose from {', '.join(Config.DENOISERS)}")

        try:
            if method == 'none':
                return image, None
            if method == 'sure':
                return denoise_sureshrink(image, sigma, self.wavelet, self.levels, self.hybrid)
            if method == 'neighshrink':
                window = self.window if window is None else window
                return denoise_neighshrink(image, sigma, window, self.wavelet, self.levels), None
            return denoise_universal(image, sigma, self.wavelet, self.levels), None

        except Exception as e:
            logger.error(f"Error denoising with {method}: {e}")
            raise
