"""Tests for abrupt and gradual changes in the mean of functional time series."""

from .covariance import KernelFn, LinOp, default_bandwidth, lag_cov, lrcov, sample_cov
from .dgp import ChangeFn, NoiseSpec, change_eval, fourier_basis, g0_functional, gen_noise, inject
from .errors import (
    DegeneracyError,
    DimensionError,
    FChangeError,
    InputError,
    NumericalError,
    ParameterError,
    RankError,
)
from .fseries import FSeries, Grid, ScoreMatrix, center, inner, mean_curve, norm, project_scores, read_csv
from .limits import (
    LimitSamples,
    crit_value,
    gp_cov,
    gp_paths,
    limit_amoc,
    limit_gradual,
    p_value,
    simulate_bridges,
)
from .pipeline import RunConfig, StudySpec, analyze, detect_pipeline, power_study
from .spectral import Spectrum, eig, op_norm, ridge_inv_sqrt_apply, truncate
from .stats_amoc import TestReport, cusum_process, t_ff, t_pc, t_wf
from .stats_gradual import (
    WeightFn,
    detectability_signal,
    t_ff_grad,
    t_pc_grad,
    t_wf_grad,
    weight_eval,
    weighted_sum_process,
)

__version__ = "0.1.0"

__all__ = [
    "ChangeFn",
    "DegeneracyError",
    "DimensionError",
    "FChangeError",
    "FSeries",
    "Grid",
    "InputError",
    "KernelFn",
    "LimitSamples",
    "LinOp",
    "NoiseSpec",
    "NumericalError",
    "ParameterError",
    "RankError",
    "RunConfig",
    "ScoreMatrix",
    "Spectrum",
    "StudySpec",
    "TestReport",
    "WeightFn",
    "analyze",
    "center",
    "change_eval",
    "crit_value",
    "cusum_process",
    "default_bandwidth",
    "detect_pipeline",
    "detectability_signal",
    "eig",
    "fourier_basis",
    "g0_functional",
    "gen_noise",
    "gp_cov",
    "gp_paths",
    "inject",
    "inner",
    "lag_cov",
    "limit_amoc",
    "limit_gradual",
    "lrcov",
    "mean_curve",
    "norm",
    "op_norm",
    "p_value",
    "power_study",
    "project_scores",
    "read_csv",
    "ridge_inv_sqrt_apply",
    "sample_cov",
    "simulate_bridges",
    "t_ff",
    "t_ff_grad",
    "t_pc",
    "t_pc_grad",
    "t_wf",
    "t_wf_grad",
    "truncate",
    "weight_eval",
    "weighted_sum_process",
]
