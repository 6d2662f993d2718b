"""Simulation and analysis of noisy single-qubit rotation-channel discrimination."""

__version__ = "0.1.0"

from .noise import AngleDistribution, RdgInstance, make_rng
from .protocols import (
    ProtocolResult,
    QspProtocol,
    adaptive_incoherent_error,
    helstrom_error_noiseless,
    helstrom_error_noisy,
    maj_error_small_delta,
    maj_protocol_error,
    majority_vote,
    qsp_error_mc,
    qsp_error_noiseless,
    simple_qsp_error_exact,
    simple_qsp_error_noisy,
    transition_sigma,
)
from .hybrid import (
    CoherenceCurve,
    HybridConfig,
    coherence_curve,
    digamma,
    hybrid_error,
    optimal_xi,
    xi_large_sigma,
    xi_small_sigma,
)
from .optimize import OptimizeConfig, OptimizeReport, optimize_qsp
from .sweep import ErrorSurface, SweepSpec, extract_boundary, ratio_map, run_sweep

__all__ = [
    "AngleDistribution",
    "RdgInstance",
    "make_rng",
    "ProtocolResult",
    "QspProtocol",
    "adaptive_incoherent_error",
    "helstrom_error_noiseless",
    "helstrom_error_noisy",
    "maj_error_small_delta",
    "maj_protocol_error",
    "majority_vote",
    "qsp_error_mc",
    "qsp_error_noiseless",
    "simple_qsp_error_exact",
    "simple_qsp_error_noisy",
    "transition_sigma",
    "CoherenceCurve",
    "HybridConfig",
    "coherence_curve",
    "digamma",
    "hybrid_error",
    "optimal_xi",
    "xi_large_sigma",
    "xi_small_sigma",
    "OptimizeConfig",
    "OptimizeReport",
    "optimize_qsp",
    "ErrorSurface",
    "SweepSpec",
    "extract_boundary",
    "ratio_map",
    "run_sweep",
]
