"""Phase-controlled double-Lambda two-photon laser: coefficients, moments, entanglement."""
from __future__ import annotations

from .atom_bloch import AtomParams, AtomSteadyState, build_bloch_generator, solve_atom_steady_state
from .coefficients import (
    CMatrixElements,
    CoefficientSet,
    DressedDenominators,
    MasterCoefficients,
    RateConstants,
    build_coefficients,
    c_matrix_elements,
    dressed_denominators,
    master_coefficients,
    rate_constants,
    with_kappa,
)
from .moments import (
    EntanglementReport,
    MomentState,
    duan_parameter,
    evolve_moments,
    g2_of_state,
    moment_drift,
    phase_window,
)
from .steady_state import (
    SteadyMoments,
    classify_stability,
    entanglement_verdict,
    steady_closed_form,
    steady_linear_solve,
)

__version__ = "0.1.0"

__all__ = [
    "AtomParams", "AtomSteadyState", "build_bloch_generator", "solve_atom_steady_state",
    "CMatrixElements", "CoefficientSet", "DressedDenominators", "MasterCoefficients",
    "RateConstants", "build_coefficients", "c_matrix_elements", "dressed_denominators",
    "master_coefficients", "rate_constants", "with_kappa",
    "EntanglementReport", "MomentState", "duan_parameter", "evolve_moments", "g2_of_state",
    "moment_drift", "phase_window",
    "SteadyMoments", "classify_stability", "entanglement_verdict", "steady_closed_form",
    "steady_linear_solve",
]
