"""
Application Configuration Module
================================
Centralized configuration for the wake detection toolkit.
Uses environment variables with sensible defaults.
"""

import os
from pathlib import Path


class Config:
    """Base configuration class."""

    # Application Settings
    APP_NAME = "SAR Wake Detector"
    VERSION = "1.0.0"
    SECRET_KEY = os.environ.get('SECRET_KEY', 'change-me-in-production')
    DEBUG = os.environ.get('DEBUG', 'False').lower() in ('true', '1', 'yes')
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO').upper()

    # Base Paths
    BASE_DIR = Path(__file__).resolve().parent.parent
    OUTPUT_DIR = Path(os.environ.get('WAKE_OUTPUT_DIR', BASE_DIR / 'output'))

    # Wavelet Parameters
    WAVELET = os.environ.get('WAKE_WAVELET', 'sym8')
    LEVELS = int(os.environ.get('WAKE_LEVELS', 4))
    PAD_MODE = 'edge'  # replication pad up to a multiple of 2**LEVELS

    # Shrinkage Parameters
    WINDOW = 3  # NeighShrink neighborhood side
    MAD_SCALE = 0.6745  # median(|N(0,1)|)
    HYBRID_SURE = False

    # Radon Parameters
    THETA_STEP = 1.0  # degrees
    NMS_RHO = 5  # pixels
    NMS_THETA = 5.0  # degrees
    TOP_K = 3
    INTERPOLATION = 'nearest'

    # Metrics
    PEAK_VALUE = 255.0

    # Scene Defaults
    SCENE_SIZE = 120
    SCENE_THETA = 60.0
    SCENE_RHO = 8.0
    ARM_HALF_ANGLE = 19.5  # Kelvin half-angle
    BACKGROUND = 90.0
    LINE_DELTA = 140.0  # centerline contrast
    ARM_CONTRAST = 0.5  # arm contrast as a fraction of LINE_DELTA
    TEXTURE_STD = 1.0

    # Bench Parameters
    SEED = int(os.environ.get('WAKE_SEED', 20240601))
    SIGMAS = (10.0, 20.0, 30.0, 50.0, 75.0, 100.0)
    METHODS = ('sure', 'neighshrink')
    SIGMA_SOURCE = 'true'  # 'true' passes the injected sigma, 'mad' estimates it
    BENCH_JOBS = int(os.environ.get('WAKE_BENCH_JOBS', 1))
    BENCH_SCENES = (
        {'theta': 60.0, 'rho': 8.0},
        {'theta': 135.0, 'rho': -12.0, 'background': 170.0, 'delta': -140.0},
    )

    # Known identifiers
    WAVELETS = ('haar', 'sym8', 'db8')
    DENOISERS = ('none', 'sure', 'neighshrink', 'universal')


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False


class TestingConfig(Config):
    """Testing configuration."""
    DEBUG = True
    TESTING = True
    LOG_LEVEL = 'WARNING'


# Configuration mapping
config_by_name = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(name=None):
    """Get configuration based on environment."""
    env = name or os.environ.get('WAKE_ENV', 'development')
    return config_by_name.get(env, DevelopmentConfig)
