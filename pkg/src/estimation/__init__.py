"""
Channel estimation for beamgan.

Generative channel estimation (plain and conditional), OMP and EM-GM-AMP
baselines, NMSE scoring and test-set evaluation reports.
"""

from .schemas import GCEConfig, EstimationResult, ESTIMATOR_METHODS

from .metrics import (
    NMSE,
    NMSE_DB_FLOOR,
    nmse,
    batch_nmse,
    to_db,
    aggregate_nmse_db,
    hanning_smooth,
    smoothing_window,
)

from .gce import gce, gce_batch, gce_conditional, gce_conditional_batch, gce_objective

from .omp import omp, MAX_OMP_ITERATIONS

from .amp import AMPConfig, em_gm_amp

from .los import los_condition, condition_from_probability

from .evaluate import (
    CompressiveProbe,
    evaluate_estimators,
    aggregate_report,
    nmse_table,
    RECORD_COLUMNS,
)

__all__ = [
    # Schemas
    'GCEConfig',
    'EstimationResult',
    'ESTIMATOR_METHODS',
    # Metrics
    'NMSE',
    'NMSE_DB_FLOOR',
    'nmse',
    'batch_nmse',
    'to_db',
    'aggregate_nmse_db',
    'hanning_smooth',
    'smoothing_window',
    # GCE
    'gce',
    'gce_batch',
    'gce_conditional',
    'gce_conditional_batch',
    'gce_objective',
    # Baselines
    'omp',
    'MAX_OMP_ITERATIONS',
    'AMPConfig',
    'em_gm_amp',
    # LOS condition
    'los_condition',
    'condition_from_probability',
    # Evaluation
    'CompressiveProbe',
    'evaluate_estimators',
    'aggregate_report',
    'nmse_table',
    'RECORD_COLUMNS',
]
