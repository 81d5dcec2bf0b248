"""
Shared pytest fixtures.
"""

import numpy as np
import pytest
from click.testing import CliRunner

from app import configure_logging, create_app
from services.image_service import Image
from services.synthesis_service import WakeScene, synth_wake


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_scene():
    """64x64 noise-free scene, fast enough for the Radon transform in every test."""
    return WakeScene(size=64, track_theta=60.0, track_rho=8.0, texture_std=0.0, seed=7)


@pytest.fixture
def small_wake(small_scene):
    return synth_wake(small_scene)


@pytest.fixture
def default_wake():
    return synth_wake(WakeScene())


@pytest.fixture
def random_image(rng):
    return Image(rng.uniform(0, 255, size=(128, 128)))


@pytest.fixture
def runner():
    yield CliRunner()
    # the CLI binds logging to the runner's stderr; rebind to the real one
    configure_logging('WARNING', force=True)


@pytest.fixture
def app():
    return create_app('testing')


@pytest.fixture
def client(app):
    return app.test_client()
