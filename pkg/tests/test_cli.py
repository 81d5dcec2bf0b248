import csv
import io

import numpy as np

from app.cli import cli
from services.image_service import load_pgm


def _invoke(runner, tmp_path, *args):
    return runner.invoke(cli, ['--out-dir', str(tmp_path), *args])


def _csv_rows(path):
    lines = [line for line in path.read_text().splitlines() if not line.startswith('#')]
    return list(csv.DictReader(io.StringIO('\n'.join(lines))))


def test_synth_writes_scene_and_truth(runner, tmp_path):
    result = _invoke(runner, tmp_path, 'synth')
    assert result.exit_code == 0, result.output
    assert load_pgm(tmp_path / 'scene.pgm').shape == (120, 120)
    rows = _csv_rows(tmp_path / 'scene_truth.csv')
    assert len(rows) == 3
    assert list(rows[0]) == ['rho', 'theta', 'sign']


def test_synth_size_flag(runner, tmp_path):
    result = _invoke(runner, tmp_path, 'synth', '--size', '64', '-o', str(tmp_path / 'small.pgm'))
    assert result.exit_code == 0, result.output
    assert load_pgm(tmp_path / 'small.pgm').shape == (64, 64)


def test_synth_invalid_theta_fails(runner, tmp_path):
    result = _invoke(runner, tmp_path, 'synth', '--theta', '200')
    assert result.exit_code == 1
    assert 'error' in result.output
    assert not (tmp_path / 'scene.pgm').exists()


def test_noise_is_seeded(runner, tmp_path):
    _invoke(runner, tmp_path, 'synth', '--size', '32')
    scene = str(tmp_path / 'scene.pgm')
    for name in ('a.pgm', 'b.pgm'):
        result = _invoke(runner, tmp_path, '--seed', '3', 'noise', scene, '--sigma', '20', '-o', str(tmp_path / name))
        assert result.exit_code == 0, result.output
    assert np.array_equal(load_pgm(tmp_path / 'a.pgm').pixels, load_pgm(tmp_path / 'b.pgm').pixels)


def test_denoise_with_thresholds_and_dump(runner, tmp_path):
    _invoke(runner, tmp_path, 'synth')
    _invoke(runner, tmp_path, 'noise', str(tmp_path / 'scene.pgm'), '--sigma', '20')
    result = _invoke(
        runner, tmp_path, 'denoise', str(tmp_path / 'noisy.pgm'),
        '--method', 'sure', '--sigma', '20',
        '--thresholds', str(tmp_path / 'thresholds.csv'),
        '--dump-subbands', str(tmp_path / 'bands'),
    )
    assert result.exit_code == 0, result.output
    assert load_pgm(tmp_path / 'denoised.pgm').shape == (120, 120)
    assert len(_csv_rows(tmp_path / 'thresholds.csv')) == 12
    assert (tmp_path / 'bands' / 'HH1.pgm').exists()


def test_radon_writes_sinogram_and_heatmap(runner, tmp_path):
    _invoke(runner, tmp_path, 'synth', '--size', '32')
    result = _invoke(
        runner, tmp_path, '--theta-step', '10', 'radon', str(tmp_path / 'scene.pgm'),
        '-o', str(tmp_path / 'sino.csv'), '--heatmap', str(tmp_path / 'heat.pgm'),
    )
    assert result.exit_code == 0, result.output
    rows = _csv_rows(tmp_path / 'sino.csv')
    assert len(rows) == 18 * 47
    assert load_pgm(tmp_path / 'heat.pgm').shape == (47, 18)


def test_detect_finds_the_track(runner, tmp_path):
    _invoke(runner, tmp_path, 'synth', '--size', '64', '--texture-std', '0')
    result = _invoke(
        runner, tmp_path, 'detect', str(tmp_path / 'scene.pgm'), '-k', '2',
        '-o', str(tmp_path / 'peaks.csv'),
        '--overlay', str(tmp_path / 'overlay.pgm'),
        '--sinogram', str(tmp_path / 'sino.csv'),
    )
    assert result.exit_code == 0, result.output
    rows = _csv_rows(tmp_path / 'peaks.csv')
    assert len(rows) == 2
    assert abs(float(rows[0]['theta']) - 60.0) <= 1.0
    assert float(rows[0]['arm_angle']) == (float(rows[0]['theta']) + 90.0) % 180.0
    assert (tmp_path / 'overlay.pgm').exists()
    assert (tmp_path / 'sino.csv').exists()


def test_detect_with_denoiser_keeps_the_angle(runner, tmp_path):
    _invoke(runner, tmp_path, 'synth', '--size', '64')
    _invoke(runner, tmp_path, 'noise', str(tmp_path / 'scene.pgm'), '--sigma', '20')
    thetas = []
    for denoiser in ('none', 'sure'):
        out = tmp_path / f'{denoiser}.csv'
        result = _invoke(
            runner, tmp_path, '--levels', '3', 'detect', str(tmp_path / 'noisy.pgm'),
            '--denoiser', denoiser, '--sigma', '20', '-o', str(out),
        )
        assert result.exit_code == 0, result.output
        thetas.append(float(_csv_rows(out)[0]['theta']))
    assert abs(thetas[0] - thetas[1]) <= 1.0


def test_detect_missing_file(runner, tmp_path):
    result = _invoke(runner, tmp_path, 'detect', str(tmp_path / 'nope.pgm'))
    assert result.exit_code == 1
    assert 'error' in result.output


def test_detect_rejects_unknown_denoiser(runner, tmp_path):
    result = _invoke(runner, tmp_path, 'detect', 'x.pgm', '--denoiser', 'median')
    assert result.exit_code == 2


def test_bench_with_config_file(runner, tmp_path):
    config = tmp_path / 'bench.cfg'
    config.write_text("size = 64\nsigmas = 20\nlevels = 3\n")
    result = _invoke(runner, tmp_path, '--config', str(config), 'bench', '--methods', 'none,sure')
    assert result.exit_code == 0, result.output
    rows = _csv_rows(tmp_path / 'bench.csv')
    assert len(rows) == 2 * 1 * 2
    assert {row['method'] for row in rows} == {'none', 'sure'}
    assert (tmp_path / 'bench_timing.csv').exists()


def test_bad_config_file(runner, tmp_path):
    config = tmp_path / 'bad.cfg'
    config.write_text("flavour = mint\n")
    result = _invoke(runner, tmp_path, '--config', str(config), 'bench')
    assert result.exit_code == 1
    assert 'flavour' in result.output
