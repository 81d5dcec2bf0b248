import numpy as np
import pytest

from services.synthesis_service import (
    WakeScene,
    line_samples,
    rasterize_line,
    sample_range,
    scene_from_mapping,
    synth_wake,
)
from utils.exceptions import ConfigError, InvalidScene


def test_default_scene_shape_and_truth(default_wake):
    image, truth = default_wake
    assert image.shape == (120, 120)
    assert [line.name for line in truth.lines] == ['centerline', 'arm_port', 'arm_starboard']
    assert (truth.centerline.rho, truth.centerline.theta, truth.centerline.sign) == (8.0, 60.0, 1)
    for line in truth.lines:
        assert 0.0 <= line.theta < 180.0


def test_arm_angles_follow_half_angle(default_wake):
    _, truth = default_wake
    thetas = sorted(line.theta for line in truth.lines[1:])
    assert thetas == pytest.approx([40.5, 79.5])


def test_arms_pass_through_the_vessel():
    scene = WakeScene(track_theta=30.0, track_rho=-10.0)
    _, truth = synth_wake(scene)
    apex = np.array([-10.0 * np.cos(np.deg2rad(30.0)), -10.0 * np.sin(np.deg2rad(30.0))])
    for line in truth.lines:
        normal = np.array([np.cos(np.deg2rad(line.theta)), np.sin(np.deg2rad(line.theta))])
        assert apex @ normal == pytest.approx(line.rho)


def test_arm_normalization_flips_rho():
    _, truth = synth_wake(WakeScene(track_theta=170.0, track_rho=5.0))
    port = truth.lines[1]
    assert port.theta == pytest.approx(9.5)


def test_noise_free_scene_values():
    image, _ = synth_wake(WakeScene(size=32, texture_std=0.0, background=100.0, line_delta=60.0))
    assert set(np.unique(image.pixels)) == {100.0, 130.0, 160.0}


def test_equal_contrast_arms():
    scene = WakeScene(size=32, texture_std=0.0, background=100.0, line_delta=60.0, arm_contrast=1.0)
    image, _ = synth_wake(scene)
    assert set(np.unique(image.pixels)) == {100.0, 160.0}


def test_centerline_is_brighter_than_the_arms():
    image, _ = synth_wake(WakeScene(size=64, texture_std=0.0))
    assert image.pixels.max() == 90.0 + 140.0
    values = set(np.unique(image.pixels))
    assert values == {90.0, 90.0 + 70.0, 90.0 + 140.0}


@pytest.mark.parametrize('scene', [
    WakeScene(texture_std=0.0),
    WakeScene(size=64, track_theta=45.0, track_rho=10.0, texture_std=0.0),
    WakeScene(size=97, track_theta=135.0, track_rho=-12.0, texture_std=0.0, line_delta=-50.0),
    WakeScene(size=33, track_theta=0.0, track_rho=3.0, texture_std=0.0),
])
def test_touched_pixels_lie_on_a_ground_truth_line(scene):
    image, truth = synth_wake(scene)
    rows, cols = np.nonzero(image.pixels != scene.background)
    c = (scene.size - 1) / 2.0
    x, y = cols - c, rows - c
    distances = np.array([
        np.abs(x * np.cos(np.deg2rad(line.theta)) + y * np.sin(np.deg2rad(line.theta)) - line.rho)
        for line in truth.lines
    ])
    assert rows.size > scene.size
    assert np.all(distances.min(axis=0) <= 0.5 * np.sqrt(2.0) + 1e-9)


def test_dark_wake_sign():
    image, truth = synth_wake(WakeScene(size=32, texture_std=0.0, background=100.0, line_delta=-40.0))
    assert truth.centerline.sign == -1
    assert image.pixels.min() == 60.0


def test_texture_is_seeded():
    a, _ = synth_wake(WakeScene(size=32, seed=3))
    b, _ = synth_wake(WakeScene(size=32, seed=3))
    c, _ = synth_wake(WakeScene(size=32, seed=4))
    assert np.array_equal(a.pixels, b.pixels)
    assert not np.array_equal(a.pixels, c.pixels)


def test_vertical_line_on_odd_grid():
    size = 17
    mask = rasterize_line(3.0, 0.0, size, sample_range(size))
    cols = np.nonzero(mask.any(axis=0))[0]
    assert list(cols) == [8 + 3]
    assert mask.sum() == size


def test_line_samples_uses_center_origin():
    rows, cols = line_samples(0.0, 90.0, 16, np.array([0.0]))
    # x = 0, y = 0 is the center (7.5, 7.5), rounded half-up
    assert (rows[0], cols[0]) == (8, 8)


@pytest.mark.parametrize('kwargs', [
    {'size': 8},
    {'track_theta': 200.0},
    {'track_theta': -1.0},
    {'track_rho': 100.0},
    {'arm_half_angle': 90.0},
    {'texture_std': 3.0},
    {'arm_contrast': 0.0},
    {'arm_contrast': 1.5},
    {'seed': -1},
])
def test_invalid_scene(kwargs):
    with pytest.raises(InvalidScene):
        synth_wake(WakeScene(**kwargs))


def test_scene_from_mapping():
    scene = scene_from_mapping({'size': '64', 'theta': '30', 'delta': '-20', 'arm_contrast': '0.25', 'scene_seed': '9'})
    assert (scene.size, scene.track_theta, scene.line_delta, scene.arm_contrast, scene.seed) == (64, 30.0, -20.0, 0.25, 9)
    assert isinstance(scene.size, int)
    with pytest.raises(ConfigError):
        scene_from_mapping({'colour': 'red'})
    with pytest.raises(ConfigError):
        scene_from_mapping({'rho': 'north'})
