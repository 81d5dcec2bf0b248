"""
Flask Application Factory
=========================
Creates and configures the Flask application that serves the wake
detection pipeline as JSON endpoints.
"""

import logging

from flask import Flask

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(level=None, force=False):
    """
    Configure root logging for the process.

    Args:
        level: Level name or number (defaults to Config.LOG_LEVEL)
        force: Replace existing root handlers (the CLI rebinds stderr per run)
    """
    from app.config import Config

    level = level or Config.LOG_LEVEL
    logging.basicConfig(level=level, format=LOG_FORMAT, force=force)
    logging.getLogger().setLevel(level)


def create_app(config_name=None):
    """
    Application factory for creating Flask app instance.

    Args:
        config_name: Configuration environment name

    Returns:
        Configured Flask application instance
    """
    from app.config import get_config

    config_class = get_config(config_name)
    configure_logging(config_class.LOG_LEVEL)

    app = Flask(__name__)
    app.config.from_object(config_class)

    _init_extensions(app)
    _register_blueprints(app)
    _register_error_handlers(app)

    logger.info(f"Application initialized with {config_class.__name__}")

    return app


def _init_extensions(app):
    """Initialize Flask extensions and shared services."""
    from flask_cors import CORS
    from services.radon_service import WakeDetectionService
    from services.shrinkage_service import DenoisingService

    CORS(app)
    app.denoising_service = DenoisingService()
    app.detection_service = WakeDetectionService(denoising_service=app.denoising_service)


def _register_blueprints(app):
    """Register application blueprints."""
    from routes.api_routes import api_bp

    app.register_blueprint(api_bp, url_prefix='/api')

    logger.info("Blueprints registered")


def _register_error_handlers(app):
    """Register JSON error handlers."""
    from flask import jsonify
    from werkzeug.exceptions import HTTPException
    from utils.exceptions import WakeDetectionError

    @app.errorhandler(WakeDetectionError)
    def domain_error(error):
        logger.warning(f"Rejected request: {error}")
        return jsonify({'success': False, 'error': str(error)}), 400

    @app.errorhandler(HTTPException)
    def http_error(error):
        return jsonify({'success': False, 'error': error.description}), error.code

    @app.errorhandler(Exception)
    def handle_exception(error):
        logger.error(f"Unhandled exception: {error}")
        return jsonify({'success': False, 'error': str(error)}), 500
