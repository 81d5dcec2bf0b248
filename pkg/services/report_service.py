"""
Report Service Module
=====================
CSV exports for ground truth, threshold reports, sinograms, detections
and bench runs. Column order is fixed; every file opens with a header row
(bench files may be preceded by '#' metadata comment lines).
"""

import io
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from services.radon_service import Sinogram, WakeDetection
from services.shrinkage_service import ThresholdReport
from services.synthesis_service import GroundTruth

logger = logging.getLogger(__name__)

GROUND_TRUTH_COLUMNS = ['rho', 'theta', 'sign']
THRESHOLD_COLUMNS = ['subband', 'sigma', 't', 'risk', 'capped']
SINOGRAM_COLUMNS = ['theta', 'rho', 'accum', 'count']
DETECTION_COLUMNS = ['rank', 'rho', 'theta', 'score', 'polarity', 'arm_angle', 'rho_corner']
BENCH_COLUMNS = ['image_id', 'method', 'sigma', 'psnr_db', 'rho', 'theta', 'score', 'snr', 'sigma_source']
TIMING_COLUMNS = ['image_id', 'method', 'sigma', 'elapsed_ms']


class ReportService:
    """Service for generating CSV reports."""

    def __init__(self, float_format: Optional[str] = None):
        """
        Initialize the report service.

        Args:
            float_format: Optional printf-style float format; full precision when None
        """
        self.float_format = float_format

    def _to_csv(self, frame: pd.DataFrame, comments: Optional[List[str]] = None) -> str:
        output = io.StringIO()
        for line in comments or []:
            output.write(f"# {line}\n")
        frame.to_csv(output, index=False, lineterminator='\n', float_format=self.float_format)
        return output.getvalue()

    def ground_truth_csv(self, truth: GroundTruth) -> str:
        """Ground truth as rho,theta,sign (centerline first, then both arms)."""
        frame = pd.DataFrame(truth.to_rows(), columns=['line'] + GROUND_TRUTH_COLUMNS)
        return self._to_csv(frame[GROUND_TRUTH_COLUMNS])

    def thresholds_csv(self, report: ThresholdReport) -> str:
        frame = pd.DataFrame(report.to_rows(), columns=THRESHOLD_COLUMNS)
        return self._to_csv(frame)

    def sinogram_csv(self, sino: Sinogram) -> str:
        """Long-format sinogram, theta-major then rho ascending."""
        frame = pd.DataFrame({
            'theta': np.repeat(sino.thetas, sino.rhos.size),
            'rho': np.tile(sino.rhos, sino.thetas.size),
            'accum': sino.accum.T.ravel(),
            'count': sino.counts.T.ravel(),
        }, columns=SINOGRAM_COLUMNS)
        return self._to_csv(frame)

    def detections_csv(self, detection: WakeDetection) -> str:
        rows = [
            {
                'rank': rank,
                'rho': peak.rho,
                'theta': peak.theta,
                'score': peak.score,
                'polarity': peak.polarity,
                'arm_angle': peak.arm_angle,
                'rho_corner': peak.rho_corner,
            }
            for rank, peak in enumerate(detection.peaks, start=1)
        ]
        comments = [f"low_confidence={int(detection.low_confidence)}"] if detection.low_confidence else None
        return self._to_csv(pd.DataFrame(rows, columns=DETECTION_COLUMNS), comments)

    def bench_csv(self, records: Iterable, metadata: Optional[Dict[str, object]] = None) -> str:
        """
        Bench records with a '#' metadata block.

        Args:
            records: BenchRecord instances, already in output order
            metadata: Key/value pairs written as leading comment lines

        Returns:
            CSV text
        """
        frame = pd.DataFrame([r.to_dict() for r in records], columns=BENCH_COLUMNS)
        comments = [f"{key}={value}" for key, value in (metadata or {}).items()]
        return self._to_csv(frame, comments)

    def timing_csv(self, records: Iterable) -> str:
        """Wall time of each denoise step, kept apart so bench bodies stay reproducible."""
        frame = pd.DataFrame([r.to_dict() for r in records], columns=TIMING_COLUMNS)
        return self._to_csv(frame)

    def write(self, text: str, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info(f"Report written to {path}")
        return path
