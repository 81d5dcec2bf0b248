"""
Command Line Interface
======================
click command group over the wake detection pipeline:
synth | noise | denoise | radon | detect | bench.

Machine output (CSV) goes to stdout or files; diagnostics go to stderr.
Exit code is 0 on success, 1 on a pipeline or I/O error, 2 on bad usage.
"""

import functools
import logging
from pathlib import Path

import click

from app import configure_logging
from app.config import Config
from services.bench_service import BenchService, RunConfig
from services.image_service import NoiseSpec, add_gaussian_noise, load_pgm, save_pgm
from services.radon_service import (
    WakeDetectionService,
    radon_transform,
    render_overlay,
    sinogram_heatmap,
)
from services.report_service import ReportService
from services.shrinkage_service import DenoisingService
from services.synthesis_service import synth_wake
from services.wavelet_service import dump_subbands, dwt2, pad_for_levels
from utils.exceptions import WakeDetectionError

logger = logging.getLogger(__name__)

report_service = ReportService()

IMAGE_PATH = click.Path(dir_okay=False, path_type=Path)
DIR_PATH = click.Path(file_okay=False, path_type=Path)


def handle_errors(command):
    """Turn pipeline and I/O errors into a one-line diagnostic and exit code 1."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (WakeDetectionError, OSError) as e:
            click.echo(f"error: {e}", err=True)
            raise SystemExit(1)

    return wrapper


def _emit(text: str, path):
    """Write text to a file when a path is given, else to stdout."""
    if path is None:
        click.echo(text, nl=False)
    else:
        report_service.write(text, path)


def _denoising_service(run: RunConfig) -> DenoisingService:
    return DenoisingService(run.wavelet, run.levels, run.window, run.hybrid)


@click.group()
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='key=value configuration file; flags override it.')
@click.option('--seed', type=int, help='Run seed (scene texture and noise).')
@click.option('--wavelet', type=click.Choice(Config.WAVELETS), help='Wavelet filter bank.')
@click.option('--levels', type=click.IntRange(min=1), help='Decomposition depth.')
@click.option('--window', type=int, help='NeighShrink window side (odd).')
@click.option('--theta-step', type=float, help='Radon angle step in degrees.')
@click.option('--out-dir', type=DIR_PATH, help='Directory for generated files.')
@click.option('-v', '--verbose', is_flag=True, help='Debug logging.')
@click.version_option(Config.VERSION, prog_name=Config.APP_NAME)
@click.pass_context
def cli(ctx, config_path, seed, wavelet, levels, window, theta_step, out_dir, verbose):
    """Detect ship-wake lines in SAR images."""
    configure_logging('DEBUG' if verbose else Config.LOG_LEVEL, force=True)
    try:
        run = RunConfig.from_file(config_path) if config_path else RunConfig()
        run = run.with_overrides(
            seed=seed, wavelet=wavelet, levels=levels, window=window,
            theta_step=theta_step, out_dir=out_dir,
        )
    except (WakeDetectionError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        raise SystemExit(1)
    ctx.obj = run


@cli.command()
@click.option('--size', type=int, help='Image side in pixels.')
@click.option('--theta', type=float, help='Track angle in degrees, [0, 180).')
@click.option('--rho', type=float, help='Track offset from the image center in pixels.')
@click.option('--delta', type=float, help='Line contrast in grey levels (negative for dark wakes).')
@click.option('--arm-half-angle', type=float, help='Angle between each arm and the track.')
@click.option('--arm-contrast', type=float, help='Arm contrast as a fraction of --delta, in (0, 1].')
@click.option('--texture-std', type=float, help='Background texture std-dev.')
@click.option('-o', '--output', type=IMAGE_PATH, help='Scene PGM path (default OUT_DIR/scene.pgm).')
@click.option('--truth', type=IMAGE_PATH, help='Ground-truth CSV path (default OUT_DIR/scene_truth.csv).')
@click.pass_obj
@handle_errors
def synth(run, size, theta, rho, delta, arm_half_angle, arm_contrast, texture_std, output, truth):
    """Generate a synthetic wake scene and its ground truth."""
    run = run.with_overrides(
        size=size, theta=theta, rho=rho, delta=delta,
        arm_half_angle=arm_half_angle, arm_contrast=arm_contrast, texture_std=texture_std,
    )
    image, ground_truth = synth_wake(run.scene)
    save_pgm(image, output or run.out_dir / 'scene.pgm')
    report_service.write(
        report_service.ground_truth_csv(ground_truth),
        truth or run.out_dir / 'scene_truth.csv',
    )


@cli.command()
@click.argument('input_path', type=IMAGE_PATH)
@click.option('--sigma', type=click.FloatRange(min=0), required=True, help='Noise std-dev in grey levels.')
@click.option('-o', '--output', type=IMAGE_PATH, help='Noisy PGM path (default OUT_DIR/noisy.pgm).')
@click.pass_obj
@handle_errors
def noise(run, input_path, sigma, output):
    """Add seeded Gaussian noise to a PGM image."""
    noisy = add_gaussian_noise(load_pgm(input_path), NoiseSpec(sigma, run.seed))
    save_pgm(noisy, output or run.out_dir / 'noisy.pgm')


@cli.command()
@click.argument('input_path', type=IMAGE_PATH)
@click.option('--method', type=click.Choice(Config.DENOISERS), default='sure', show_default=True)
@click.option('--sigma', type=click.FloatRange(min=0), help='Noise std-dev; estimated from HH1 when omitted.')
@click.option('-o', '--output', type=IMAGE_PATH, help='Denoised PGM path (default OUT_DIR/denoised.pgm).')
@click.option('--thresholds', type=IMAGE_PATH, help='Write the per-subband SURE thresholds as CSV.')
@click.option('--dump-subbands', 'subband_dir', type=DIR_PATH, help='Write every subband as a rescaled PGM.')
@click.pass_obj
@handle_errors
def denoise(run, input_path, method, sigma, output, thresholds, subband_dir):
    """Denoise a PGM image by wavelet shrinkage."""
    image = load_pgm(input_path)
    denoised, report = _denoising_service(run).denoise(image, method, sigma)
    save_pgm(denoised, output or run.out_dir / 'denoised.pgm')

    if thresholds is not None:
        if report is None:
            logger.warning(f"No threshold report for method {method!r}")
        else:
            report_service.write(report_service.thresholds_csv(report), thresholds)

    if subband_dir is not None:
        padded, _ = pad_for_levels(image, run.levels)
        paths = dump_subbands(dwt2(padded, run.levels, run.wavelet), subband_dir)
        logger.info(f"Dumped {len(paths)} subbands to {subband_dir}")


@cli.command()
@click.argument('input_path', type=IMAGE_PATH)
@click.option('--interpolation', type=click.Choice(['nearest', 'linear']), default=Config.INTERPOLATION,
              show_default=True)
@click.option('-o', '--output', type=IMAGE_PATH, help='Sinogram CSV path (default stdout).')
@click.option('--heatmap', type=IMAGE_PATH, help='Write the accumulator as a rescaled PGM.')
@click.pass_obj
@handle_errors
def radon(run, input_path, interpolation, output, heatmap):
    """Compute the Radon sinogram of a square PGM image."""
    sino = radon_transform(load_pgm(input_path), run.theta_step, interpolation)
    _emit(report_service.sinogram_csv(sino), output)
    if heatmap is not None:
        save_pgm(sinogram_heatmap(sino), heatmap)


@cli.command()
@click.argument('input_path', type=IMAGE_PATH)
@click.option('--denoiser', type=click.Choice(Config.DENOISERS), default='none', show_default=True)
@click.option('-k', 'k', type=click.IntRange(min=1), help='Number of peaks to report.')
@click.option('--sigma', type=click.FloatRange(min=0), help='Noise std-dev for the denoiser.')
@click.option('--reference', type=IMAGE_PATH, help='Clean image; logs PSNR of the processed input.')
@click.option('-o', '--output', type=IMAGE_PATH, help='Detection CSV path (default stdout).')
@click.option('--sinogram', type=IMAGE_PATH, help='Write the sinogram of the processed image as CSV.')
@click.option('--overlay', type=IMAGE_PATH, help='Write the image with detected lines drawn.')
@click.pass_obj
@handle_errors
def detect(run, input_path, denoiser, k, sigma, reference, output, sinogram, overlay):
    """Detect wake lines: optional denoise, Radon transform, peak picking."""
    image = load_pgm(input_path)
    clean = load_pgm(reference) if reference is not None else None

    denoising = _denoising_service(run)
    service = WakeDetectionService(
        denoising_service=denoising, theta_step=run.theta_step,
        k=k or run.k, interpolation=run.interpolation,
    )
    detection, quality = service.detect(image, denoiser, sigma, reference=clean)

    _emit(report_service.detections_csv(detection), output)
    click.echo(f"arm_angle={detection.arm_angle:g}", err=True)
    if quality is not None:
        click.echo(f"psnr_db={quality.psnr:.3f}", err=True)

    if sinogram is not None:
        processed, _ = denoising.denoise(image, denoiser, sigma)
        sino = radon_transform(processed, run.theta_step, run.interpolation)
        report_service.write(report_service.sinogram_csv(sino), sinogram)
    if overlay is not None:
        save_pgm(render_overlay(image, detection), overlay)


@cli.command()
@click.option('--sigmas', help='Comma-separated noise levels.')
@click.option('--methods', help='Comma-separated denoisers.')
@click.option('--jobs', type=int, help='Parallel workers (joblib n_jobs).')
@click.option('--sigma-source', type=click.Choice(['true', 'mad']), help='Pass the injected sigma or estimate it.')
@click.pass_obj
@handle_errors
def bench(run, sigmas, methods, jobs, sigma_source):
    """Run every scene x sigma x method cell and write bench.csv."""
    run = run.with_overrides(sigmas=sigmas, methods=methods, jobs=jobs, sigma_source=sigma_source)
    records, path = BenchService(report_service).run_and_write(run)
    logger.info(f"Wrote {len(records)} bench records to {path}")
    click.echo(path.read_text(), nl=False)


def main():
    cli(prog_name='wake')


if __name__ == '__main__':
    main()
