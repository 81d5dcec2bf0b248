"""
Bench Service Module
====================
Runs the denoise-then-detect comparison over a grid of scenes, noise
levels and methods, and writes the results as CSV.
"""

import logging
import re
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from joblib import Parallel, delayed

from app.config import Config
from services.image_service import NoiseSpec, add_gaussian_noise
from services.radon_service import detect_wake
from services.report_service import ReportService
from services.shrinkage_service import DenoisingService
from services.synthesis_service import SCENE_KEYS, WakeScene, scene_from_mapping, synth_wake
from utils.exceptions import ConfigError
from utils.helpers import derive_seed, parse_float_list, parse_key_value, parse_name_list
from utils.metrics import INFINITE, empirical_std, psnr, snr

logger = logging.getLogger(__name__)

BENCH_FILE = 'bench.csv'
TIMING_FILE = 'bench_timing.csv'
PADDING_POLICY = 'edge-replicate to a multiple of 2**levels, crop after reconstruction'
SIGMA_SOURCES = ('true', 'mad')

_SCENE_PREFIX = re.compile(r'^scene(\d+)\.(\w+)$')


@dataclass(frozen=True)
class BenchRecord:
    """One row of the bench report: one (image, method, sigma) cell."""

    image_id: str
    method: str
    sigma: float
    psnr_db: float
    elapsed_ms: float
    rho: float
    theta: float
    score: float
    snr: float
    sigma_source: str

    @property
    def sort_key(self) -> Tuple[str, str, float]:
        return self.image_id, self.method, self.sigma

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class RunConfig:
    """Everything a bench or CLI run needs; built from defaults, a file, then flags."""

    sigmas: Tuple[float, ...] = tuple(Config.SIGMAS)
    methods: Tuple[str, ...] = tuple(Config.METHODS)
    seed: int = Config.SEED
    wavelet: str = Config.WAVELET
    levels: int = Config.LEVELS
    window: int = Config.WINDOW
    theta_step: float = Config.THETA_STEP
    out_dir: Path = Config.OUTPUT_DIR
    k: int = Config.TOP_K
    jobs: int = Config.BENCH_JOBS
    sigma_source: str = Config.SIGMA_SOURCE
    hybrid: bool = Config.HYBRID_SURE
    interpolation: str = Config.INTERPOLATION
    scene_overrides: Dict[str, str] = field(default_factory=dict)
    scene_specs: Optional[Tuple[Dict[str, str], ...]] = None

    @property
    def scenes(self) -> Tuple[WakeScene, ...]:
        """
        Scenes of the run.

        Unprefixed scene keys override the built-in bench scenes; numbered
        scene entries override the unprefixed keys.
        """
        base = WakeScene(seed=self.seed)
        if self.scene_specs is None:
            return tuple(
                scene_from_mapping({**defaults, **self.scene_overrides}, base)
                for defaults in Config.BENCH_SCENES
            )
        return tuple(
            scene_from_mapping({**self.scene_overrides, **spec}, base)
            for spec in self.scene_specs
        )

    @property
    def scene(self) -> WakeScene:
        """The first scene, used by single-image commands."""
        return self.scenes[0]

    def validate(self) -> 'RunConfig':
        """
        Check the run parameters.

        Raises:
            ConfigError: Empty sigma/method list, bad levels or unknown names
        """
        if not self.sigmas:
            raise ConfigError("sigma list must not be empty")
        if any(s < 0 for s in self.sigmas):
            raise ConfigError(f"sigmas must be >= 0, got {list(self.sigmas)}")
        if not self.methods:
            raise ConfigError("method list must not be empty")
        unknown = [m for m in self.methods if m not in Config.DENOISERS]
        if unknown:
            raise ConfigError(f"Unknown methods {unknown}; choose from {', '.join(Config.DENOISERS)}")
        if self.wavelet not in Config.WAVELETS:
            raise ConfigError(f"Unknown wavelet {self.wavelet!r}")
        if self.levels < 1:
            raise ConfigError(f"levels must be >= 1, got {self.levels}")
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError(f"window must be a positive odd integer, got {self.window}")
        if self.theta_step <= 0:
            raise ConfigError(f"theta_step must be > 0, got {self.theta_step}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.sigma_source not in SIGMA_SOURCES:
            raise ConfigError(f"sigma_source must be one of {SIGMA_SOURCES}, got {self.sigma_source!r}")
        for scene in self.scenes:
            scene.validate()
        return self

    @classmethod
    def from_mapping(cls, values: Dict[str, str], base: Optional['RunConfig'] = None) -> 'RunConfig':
        """
        Apply key=value entries on top of a base configuration.

        Scene keys without a prefix (theta, rho, size, ...) apply to every
        scene; 'sceneN.key' entries define or override scene N (1-based).
        Defining any sceneN replaces the default scene list.
        """
        base = base or cls()
        params = {}
        shared = dict(base.scene_overrides)
        numbered: Dict[int, Dict[str, str]] = {}

        try:
            for key, raw in values.items():
                match = _SCENE_PREFIX.match(key)
                if match:
                    numbered.setdefault(int(match.group(1)), {})[match.group(2)] = raw
                elif key in SCENE_KEYS:
                    shared[key] = raw
                elif key == 'sigmas':
                    params['sigmas'] = tuple(parse_float_list(raw))
                elif key == 'methods':
                    params['methods'] = tuple(parse_name_list(raw))
                elif key in ('seed', 'levels', 'window', 'k', 'jobs'):
                    params[key] = int(raw)
                elif key == 'theta_step':
                    params[key] = float(raw)
                elif key in ('wavelet', 'sigma_source', 'interpolation'):
                    params[key] = raw.strip().lower()
                elif key == 'out_dir':
                    params[key] = Path(raw)
                elif key == 'hybrid':
                    params[key] = raw.strip().lower() in ('true', '1', 'yes')
                else:
                    raise ConfigError(f"Unknown configuration key {key!r}")
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Invalid configuration value: {e}") from e

        specs = base.scene_specs
        if numbered:
            specs = tuple(numbered[idx] for idx in sorted(numbered))

        config = replace(base, scene_overrides=shared, scene_specs=specs, **params)
        _ = config.scenes  # raises ConfigError on bad scene values
        return config

    @classmethod
    def from_file(cls, path: Union[str, Path], base: Optional['RunConfig'] = None) -> 'RunConfig':
        text = Path(path).read_text()
        logger.info(f"Loaded run configuration from {path}")
        return cls.from_mapping(parse_key_value(text), base)

    def with_overrides(self, **flags) -> 'RunConfig':
        """Apply command-line flags; None means the flag was not given."""
        given = {key: str(value) for key, value in flags.items() if value is not None}
        return RunConfig.from_mapping(given, self) if given else self

    def metadata(self) -> Dict[str, object]:
        return {
            'seed': self.seed,
            'wavelet': self.wavelet,
            'levels': self.levels,
            'window': self.window,
            'theta_step': self.theta_step,
            'padding': PADDING_POLICY,
            'sigma_source': self.sigma_source,
            'hybrid': self.hybrid,
        }


def run_cell(run: RunConfig, scene_idx: int, sigma_idx: int) -> List[BenchRecord]:
    """
    Run every method on one (scene, sigma) cell.

    The noisy image is shared by all methods of the cell; its seed is
    derived from the run seed and the cell indices.
    """
    scene = run.scenes[scene_idx]
    sigma = float(run.sigmas[sigma_idx])
    image_id = f"scene{scene_idx + 1}"

    clean, _ = synth_wake(scene)
    noise_seed = derive_seed(run.seed, scene_idx, sigma_idx)
    noisy = add_gaussian_noise(clean, NoiseSpec(sigma, noise_seed))
    signal_std = empirical_std(clean)
    ratio = snr(signal_std, sigma) if sigma > 0 else INFINITE

    service = DenoisingService(run.wavelet, run.levels, run.window, run.hybrid)
    denoiser_sigma = sigma if run.sigma_source == 'true' else None

    records = []
    for method in run.methods:
        start = time.perf_counter()
        denoised, _ = service.denoise(noisy, method, denoiser_sigma)
        elapsed_ms = (time.perf_counter() - start) * 1000.0

        detection, _ = detect_wake(
            denoised,
            denoiser='none',
            k=run.k,
            theta_step=run.theta_step,
            interpolation=run.interpolation,
        )
        top = detection.top
        records.append(BenchRecord(
            image_id=image_id,
            method=method,
            sigma=sigma,
            psnr_db=psnr(clean, denoised),
            elapsed_ms=max(0.0, elapsed_ms),
            rho=top.rho,
            theta=top.theta,
            score=top.score,
            snr=ratio,
            sigma_source=run.sigma_source,
        ))

    logger.info(f"Bench cell {image_id} sigma={sigma:g} done ({len(records)} methods)")
    return records


class BenchService:
    """Service for running the method comparison grid."""

    def __init__(self, report_service: Optional[ReportService] = None):
        self.report_service = report_service or ReportService()

    def run(self, run: RunConfig) -> List[BenchRecord]:
        """
        Run every (scene, sigma, method) cell.

        Args:
            run: Validated run configuration

        Returns:
            Records sorted by (image_id, method, sigma)
        """
        run.validate()
        return sorted(self._collect(run, []), key=lambda r: r.sort_key)

    def _collect(self, run: RunConfig, sink: List[BenchRecord]) -> List[BenchRecord]:
        cells = [
            (scene_idx, sigma_idx)
            for scene_idx in range(len(run.scenes))
            for sigma_idx in range(len(run.sigmas))
        ]
        logger.info(f"Running {len(cells)} bench cells x {len(run.methods)} methods with {run.jobs} job(s)")
        if run.jobs == 1:
            results = (run_cell(run, scene_idx, sigma_idx) for scene_idx, sigma_idx in cells)
        else:
            results = Parallel(n_jobs=run.jobs, return_as='generator')(
                delayed(run_cell)(run, scene_idx, sigma_idx) for scene_idx, sigma_idx in cells
            )
        for records in results:
            sink.extend(records)
        return sink

    def run_and_write(self, run: RunConfig, out_dir: Optional[Union[str, Path]] = None) -> Tuple[List[BenchRecord], Path]:
        """
        Run the bench and write bench.csv plus bench_timing.csv.

        Records finished before a failure are written before the error propagates.

        Returns:
            Tuple of (sorted records, path of bench.csv)
        """
        run.validate()
        out_dir = Path(out_dir or run.out_dir)
        collected: List[BenchRecord] = []
        try:
            self._collect(run, collected)
        except Exception as e:
            logger.error(f"Bench aborted after {len(collected)} records: {e}")
            self._write(run, sorted(collected, key=lambda r: r.sort_key), out_dir)
            raise

        records = sorted(collected, key=lambda r: r.sort_key)
        return records, self._write(run, records, out_dir)

    def _write(self, run: RunConfig, records: List[BenchRecord], out_dir: Path) -> Path:
        bench_path = self.report_service.write(
            self.report_service.bench_csv(records, run.metadata()), out_dir / BENCH_FILE
        )
        self.report_service.write(self.report_service.timing_csv(records), out_dir / TIMING_FILE)
        return bench_path
