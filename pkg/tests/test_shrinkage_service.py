import logging

import numpy as np
import pytest

from services.image_service import Image, NoiseSpec, add_gaussian_noise
from services.shrinkage_service import (
    DenoisingService,
    denoise_neighshrink,
    denoise_sureshrink,
    denoise_universal,
    estimate_noise_sigma,
    neighborhood_energy,
    neighshrink_pyramid,
    soft_threshold,
    sure_cost,
    sure_shrink_pyramid,
    sure_threshold,
    universal_threshold,
)
from services.synthesis_service import WakeScene, synth_wake
from services.wavelet_service import WaveletPyramid, dwt2
from utils.exceptions import (
    EmptyVector,
    EvenWindow,
    NegativeSigma,
    NegativeThreshold,
    UnknownDenoiser,
)
from utils.metrics import psnr


def test_soft_threshold():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.5, 1.0) == 0.0
    np.testing.assert_array_equal(soft_threshold(np.array([-2.0, 0.0, 2.0]), 0.0), [-2.0, 0.0, 2.0])
    with pytest.raises(NegativeThreshold):
        soft_threshold(1.0, -0.1)


def test_universal_threshold():
    assert universal_threshold(1024) == pytest.approx(np.sqrt(2 * np.log(1024)))
    assert universal_threshold(1) == 0.0


def test_sure_cost_by_hand():
    x = np.array([0.5, -1.0, 3.0])
    # d - 2 * #{|x| <= 1} + sum(min(|x|, 1)^2) = 3 - 4 + (0.25 + 1 + 1)
    assert sure_cost(x, 1.0) == pytest.approx(1.25)
    assert sure_cost(x, 0.0) == pytest.approx(3.0)




@pytest.mark.parametrize('x, t, expected', [
    ([0.0, 0.0, 0.0], 0.0, -3.0),
    ([1.0, 2.0, 3.0], 1.5, 6.5),
    ([5.0], 10.0, 24.0),
])
def test_sure_cost_worked_examples(x, t, expected):
    assert sure_cost(x, t) == pytest.approx(expected, abs=1e-12)


def test_sure_cost_at_zero_counts_zero_coefficients():
    x = np.array([0.0, 1.5, -2.0, 0.0, 0.3, 0.0])
    assert sure_cost(x, 0.0) == x.size - 2 * 3


def test_sure_cost_is_flat_beyond_the_largest_magnitude():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.normal(0.0, 2.0, size=int(rng.integers(1, 40)))
        tail = -x.size + np.sum(x ** 2)
        top = np.abs(x).max()
        for t in (top, top + 0.5, 10.0 * top + 1.0):
            assert sure_cost(x, t) == pytest.approx(tail, abs=1e-9)


def test_sure_threshold_small_vectors():
    assert sure_threshold([0.1, 0.1, 9.0]) == 0.1
    assert sure_threshold(np.zeros(16)) == 0.0


def test_sure_threshold_error_cases():
    with pytest.raises(EmptyVector):
        sure_threshold([])
    with pytest.raises(NegativeThreshold):
        sure_cost([1.0], -1.0)


def test_sure_threshold_is_zero_for_strong_signal():
    x = np.full(64, 50.0)
    assert sure_threshold(x) == 0.0


def test_sure_threshold_ties_go_to_smaller_threshold():
    # risk is flat for every t >= max|x|
    x = np.full(64, 0.01)
    assert sure_threshold(x) == 0.01
    assert sure_cost(x, 0.01) == pytest.approx(sure_cost(x, universal_threshold(64)))


def _dense_grid_minimum(x, points=10_000):
    a = np.abs(x)
    lam = universal_threshold(a.size)
    grid = np.linspace(0.0, lam, points)[:, None]
    costs = a.size - 2 * np.sum(a <= grid, axis=1) + np.sum(np.minimum(a, grid) ** 2, axis=1)
    return float(costs.min()), lam / (points - 1)


def test_sure_threshold_matches_dense_grid_search():
    rng = np.random.default_rng(99)
    for _ in range(40):
        d = int(rng.integers(1, 65))
        x = rng.normal(0.0, 1.0, size=d)
        x[: d // 4] += rng.normal(0.0, 4.0, size=d // 4)
        t = sure_threshold(x)
        lam = universal_threshold(d)
        assert 0.0 <= t <= lam + 1e-15
        grid_min, step = _dense_grid_minimum(x)
        gap = grid_min - sure_cost(x, t)
        # the grid can never beat the exact minimiser, and the squared
        # term grows by at most 2 d lam per unit of t
        assert gap >= -1e-9
        assert gap <= 2 * d * lam * step + 1e-9


def test_estimate_noise_sigma_on_white_noise():
    rng = np.random.default_rng(8)
    pyramid = dwt2(Image(rng.normal(100.0, 20.0, size=(128, 128))), levels=4, wavelet='sym8')
    assert estimate_noise_sigma(pyramid) == pytest.approx(20.0, rel=0.1)


def test_sure_shrink_pyramid_report(random_image):
    pyramid = dwt2(random_image, levels=4, wavelet='sym8')
    shrunk, report = sure_shrink_pyramid(pyramid, 20.0)
    assert [e.subband for e in report.entries][:3] == ['LH1', 'HL1', 'HH1']
    assert len(report.entries) == 12
    assert np.array_equal(shrunk.ll, pyramid.ll)
    for entry in report.entries:
        assert 0.0 <= entry.threshold <= universal_threshold(pyramid.detail(int(entry.subband[2]), entry.subband[:2]).size)
    assert set(report.to_rows()[0]) == {'subband', 'sigma', 't', 'risk', 'capped'}


def _neighshrink_scalar(band, sigma, window):
    rows, cols = band.shape
    half = window // 2
    lam_sq = 2.0 * sigma ** 2 * np.log(band.size)
    out = np.zeros_like(band)
    for i in range(rows):
        for j in range(cols):
            s2 = 0.0
            for di in range(-half, half + 1):
                for dj in range(-half, half + 1):
                    r, c = i + di, j + dj
                    if 0 <= r < rows and 0 <= c < cols:
                        s2 += band[r, c] ** 2
            beta = max(0.0, 1.0 - lam_sq / s2) if s2 > 0 else 0.0
            out[i, j] = band[i, j] * beta
    return out


@pytest.mark.parametrize('window', [3, 5])
def test_neighshrink_matches_scalar_oracle(window):
    rng = np.random.default_rng(window)
    image = Image(rng.uniform(0, 255, size=(32, 32)))
    pyramid = dwt2(image, levels=2, wavelet='haar')
    shrunk = neighshrink_pyramid(pyramid, 25.0, window)
    assert np.array_equal(shrunk.ll, pyramid.ll)
    for band, new in zip(pyramid.subbands(), shrunk.subbands()):
        expected = _neighshrink_scalar(band.coefficients, 25.0, window)
        np.testing.assert_allclose(new.coefficients, expected, rtol=0, atol=1e-12)


def test_neighborhood_energy_zero_pads():
    coeffs = np.ones((3, 3))
    energy = neighborhood_energy(coeffs, 3)
    assert energy[1, 1] == 9.0
    assert energy[0, 0] == 4.0


def _single_band_pyramid(lh):
    zeros = np.zeros_like(lh)
    return WaveletPyramid(np.zeros_like(lh), ((lh, zeros, zeros.copy()),), 'haar')


def test_neighshrink_gain_closed_forms():
    lam = np.sqrt(2.0 * np.log(16))
    isolated = np.zeros((4, 4))
    isolated[1, 1] = lam
    shrunk = neighshrink_pyramid(_single_band_pyramid(isolated), 1.0, 3)
    # S^2 = lambda^2 leaves nothing
    assert shrunk.detail(1, 'LH')[1, 1] == pytest.approx(0.0, abs=1e-12)

    pair = np.zeros((4, 4))
    pair[1, 1] = pair[1, 2] = lam
    shrunk = neighshrink_pyramid(_single_band_pyramid(pair), 1.0, 3)
    # S^2 = 2 lambda^2 halves both coefficients
    np.testing.assert_allclose(shrunk.detail(1, 'LH')[1, 1:3], [lam / 2, lam / 2], rtol=1e-12)
    assert np.count_nonzero(shrunk.detail(1, 'LH')) == 2


@pytest.mark.parametrize('shrink', [
    lambda pyramid: sure_shrink_pyramid(pyramid, 20.0)[0],
    lambda pyramid: neighshrink_pyramid(pyramid, 20.0, 3),
    lambda pyramid: neighshrink_pyramid(pyramid, 20.0, 5),
])
def test_shrinkage_never_grows_a_coefficient(random_image, shrink):
    pyramid = dwt2(random_image, levels=4, wavelet='sym8')
    shrunk = shrink(pyramid)
    for band, new in zip(pyramid.subbands(), shrunk.subbands()):
        before, after = band.coefficients, new.coefficients
        assert np.all(np.abs(after) <= np.abs(before)), band.name
        assert np.all(after * before >= 0.0), band.name


def test_zero_estimated_sigma_warns(caplog):
    image = Image.constant(64, 50.0)
    with caplog.at_level(logging.WARNING, logger='services.shrinkage_service'):
        denoised, report = denoise_sureshrink(image, wavelet='haar', levels=2)
    assert report.sigma == 0.0
    assert np.array_equal(denoised.pixels, image.pixels)
    assert any(r.levelno == logging.WARNING and 'sigma is 0' in r.getMessage() for r in caplog.records)


def test_even_window_rejected(random_image):
    with pytest.raises(EvenWindow):
        denoise_neighshrink(random_image, 10.0, window=4)


def test_negative_sigma_rejected(random_image):
    with pytest.raises(NegativeSigma):
        denoise_sureshrink(random_image, -1.0)


def test_zero_sigma_passes_through(default_wake):
    image, _ = default_wake
    denoised, report = denoise_sureshrink(image, 0.0)
    assert np.array_equal(denoised.pixels, image.pixels)
    assert all(e.threshold == 0.0 for e in report.entries)
    assert np.array_equal(denoise_neighshrink(image, 0.0).pixels, image.pixels)


@pytest.mark.parametrize('denoise', [
    lambda im, s: denoise_sureshrink(im, s)[0],
    denoise_neighshrink,
    denoise_universal,
])
def test_denoisers_improve_psnr(default_wake, denoise):
    clean, _ = default_wake
    noisy = add_gaussian_noise(clean, NoiseSpec(20.0, seed=11))
    denoised = denoise(noisy, 20.0)
    assert denoised.shape == clean.shape
    assert psnr(clean, denoised) > psnr(clean, noisy) + 2.0


def test_estimated_sigma_is_used_when_omitted():
    clean, _ = synth_wake(WakeScene(size=128))
    noisy = add_gaussian_noise(clean, NoiseSpec(30.0, seed=2))
    _, report = denoise_sureshrink(noisy)
    assert report.sigma == pytest.approx(30.0, rel=0.1)


def test_denoising_service_dispatch(random_image):
    service = DenoisingService(wavelet='haar', levels=2)
    same, report = service.denoise(random_image, 'none')
    assert same is random_image and report is None
    _, report = service.denoise(random_image, 'SURE', 10.0)
    assert len(report.entries) == 6
    with pytest.raises(UnknownDenoiser):
        service.denoise(random_image, 'bm3d')
