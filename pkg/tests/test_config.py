from app.config import Config, DevelopmentConfig, TestingConfig, get_config


def test_get_config_by_name():
    assert get_config('testing') is TestingConfig
    assert get_config('unknown') is DevelopmentConfig


def test_get_config_from_environment(monkeypatch):
    monkeypatch.setenv('WAKE_ENV', 'testing')
    assert get_config() is TestingConfig


def test_pipeline_defaults():
    assert Config.WAVELET == 'sym8'
    assert Config.LEVELS == 4
    assert Config.SIGMAS == (10.0, 20.0, 30.0, 50.0, 75.0, 100.0)
    assert set(Config.METHODS) <= set(Config.DENOISERS)
