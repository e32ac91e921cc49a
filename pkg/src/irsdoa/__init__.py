"""Numerical lab for gridless DoA estimation with a semi-passive IRS."""

from .anm import (
    AnmConfig,
    DoaEstimate,
    DualSolution,
    Spectrum,
    build_problem,
    default_beta,
    dual_spectrum,
    estimate_anm,
    pick_peaks,
    solve_dual,
)
from .crb import CrbReport, FisherMatrix, closed_form_single_crb, crb_values, fisher_matrix
from .harness import SweepSpec, TrialRecord, load_sweep_spec, rmse, run_sweep, run_trial
from .music import MusicConfig, estimate_music, sample_covariance
from .numerics import hermitian_eig, hermitian_solve, psd_project
from .scene import (
    EchoData,
    MeasurementMatrix,
    ModelMatrices,
    SceneConfig,
    Target,
    build_measurement,
    load_scene,
    model_matrices,
    path_gain_bs_irs,
    path_gain_target,
    steering_derivative,
    synthesize_echo,
    ula_steering,
)

__all__ = [
    "AnmConfig", "DoaEstimate", "DualSolution", "Spectrum", "build_problem",
    "default_beta", "dual_spectrum", "estimate_anm", "pick_peaks", "solve_dual",
    "CrbReport", "FisherMatrix", "closed_form_single_crb", "crb_values",
    "fisher_matrix", "SweepSpec", "TrialRecord", "load_sweep_spec", "rmse",
    "run_sweep", "run_trial", "MusicConfig", "estimate_music",
    "sample_covariance", "hermitian_eig", "hermitian_solve", "psd_project",
    "EchoData", "MeasurementMatrix", "ModelMatrices", "SceneConfig", "Target",
    "build_measurement", "load_scene", "model_matrices", "path_gain_bs_irs",
    "path_gain_target", "steering_derivative", "synthesize_echo", "ula_steering",
]

__version__ = "0.1.0"
