"""
API Routes Module
=================
REST API endpoints for the wake detection pipeline.

Image endpoints take raw PGM bytes as the request body.
"""

import io
import logging

from flask import Blueprint, current_app, jsonify, request, send_file

from app.config import Config
from services.image_service import read_pgm, write_pgm
from services.synthesis_service import scene_from_mapping, synth_wake
from utils.exceptions import ConfigError, InvalidInput

logger = logging.getLogger(__name__)

api_bp = Blueprint('api', __name__)

PGM_MIMETYPE = 'image/x-portable-graymap'


def _request_image():
    data = request.get_data()
    if not data:
        raise InvalidInput("Request body must be a PGM image")
    return read_pgm(data)


def _optional_float(name):
    value = request.args.get(name)
    if value is None or value == '':
        return None
    try:
        return float(value)
    except ValueError as e:
        raise ConfigError(f"Query parameter {name} must be a number, got {value!r}") from e


def _optional_int(name):
    value = request.args.get(name)
    if value is None or value == '':
        return None
    try:
        return int(value)
    except ValueError as e:
        raise ConfigError(f"Query parameter {name} must be an integer, got {value!r}") from e


def _pgm_response(image, filename):
    return send_file(
        io.BytesIO(write_pgm(image)),
        mimetype=PGM_MIMETYPE,
        as_attachment=False,
        download_name=filename
    )


@api_bp.route('/health', methods=['GET'])
def health_check():
    """Health check endpoint."""
    return jsonify({
        'success': True,
        'status': 'healthy',
        'app': Config.APP_NAME,
        'version': Config.VERSION
    })


@api_bp.route('/detect', methods=['POST'])
def detect():
    """
    Detect wake lines in a PGM image.

    Query params:
        denoiser: none | sure | neighshrink | universal (default: none)
        k: Number of peaks (default: 3)
        sigma: Noise std-dev for the denoiser (estimated when omitted)
        theta_step: Angular step in degrees (default: 1)
    """
    image = _request_image()
    denoiser = request.args.get('denoiser', 'none')
    k = request.args.get('k', Config.TOP_K, type=int)
    sigma = _optional_float('sigma')
    theta_step = _optional_float('theta_step')

    detection, _ = current_app.detection_service.detect(image, denoiser, sigma, k=k, theta_step=theta_step)

    return jsonify({
        'success': True,
        'denoiser': denoiser,
        'arm_angle': detection.arm_angle,
        'low_confidence': detection.low_confidence,
        'peaks': [
            {
                'rank': rank,
                'rho': peak.rho,
                'theta': peak.theta,
                'score': peak.score,
                'polarity': peak.polarity,
                'arm_angle': peak.arm_angle,
                'rho_corner': peak.rho_corner,
                'line': list(peak.line_coefficients)
            }
            for rank, peak in enumerate(detection.peaks, start=1)
        ]
    })


@api_bp.route('/denoise', methods=['POST'])
def denoise():
    """
    Denoise a PGM image; responds with the denoised PGM.

    Query params:
        method: sure | neighshrink | universal | none (default: sure)
        sigma: Noise std-dev (estimated when omitted)
        window: Odd NeighShrink window side (default: 3)
    """
    image = _request_image()
    method = request.args.get('method', 'sure')
    sigma = _optional_float('sigma')
    window = _optional_int('window')

    denoised, _ = current_app.denoising_service.denoise(image, method, sigma, window=window)
    logger.info(f"Denoised {image.width}x{image.height} image with {method}")
    return _pgm_response(denoised, f"denoised_{method}.pgm")


@api_bp.route('/thresholds', methods=['POST'])
def thresholds():
    """Per-subband SURE thresholds of a PGM image."""
    image = _request_image()
    sigma = _optional_float('sigma')

    _, report = current_app.denoising_service.denoise(image, 'sure', sigma)
    return jsonify({
        'success': True,
        'sigma': report.sigma,
        'thresholds': report.to_rows()
    })


@api_bp.route('/synth', methods=['POST'])
def synth():
    """
    Generate a synthetic wake scene.

    JSON body: scene keys (size, theta, rho, delta, arm_half_angle,
    arm_contrast, texture_std, background, scene_seed); omitted keys use
    defaults.
    """
    params = request.get_json(silent=True) or {}
    if not isinstance(params, dict):
        raise ConfigError("Request body must be a JSON object")

    image, truth = synth_wake(scene_from_mapping(params))
    response = _pgm_response(image, 'scene.pgm')
    centerline = truth.centerline
    response.headers['X-Wake-Rho'] = str(centerline.rho)
    response.headers['X-Wake-Theta'] = str(centerline.theta)
    return response
