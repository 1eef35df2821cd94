"""Entanglement entropy of the regularized Dirac vacuum and its Widom area coefficient."""

from __future__ import annotations

__version__ = "0.1.0"

from .dirac_symbols import (
    CutoffSpec,
    DiracParams,
    LineSymbol,
    ScalarLineSymbol,
    line_symbol,
    momentum_symbol,
    rescaled_symbol,
    rotation_spin_matrix,
)
from .entropy_functions import RenyiOrder, concavity_constant, eta, f0
from .errors import DiracEntropyError
from .lattice_model import (
    Region,
    TorusLattice,
    build_kernel,
    correlation_matrix,
    entanglement_entropy,
    schatten_commutator_slope,
)
from .spin_algebra import apply_matrix_function, gamma
from .wiener_hopf import SectionSpec, density_rho, finite_section_trace, hs_cross_norm, line_kernel
from .widom_coefficient import WidomResult, integrate_mkappa, m_profile, positivity_check, widom_coefficient
from .area_law_harness import SweepRecord, compare_report, fit_area_coefficient, run_sweep

__all__ = [
    "CutoffSpec", "DiracParams", "LineSymbol", "ScalarLineSymbol", "line_symbol", "momentum_symbol",
    "rescaled_symbol", "rotation_spin_matrix", "RenyiOrder", "concavity_constant", "eta", "f0",
    "DiracEntropyError", "Region", "TorusLattice", "build_kernel", "correlation_matrix",
    "entanglement_entropy", "schatten_commutator_slope", "apply_matrix_function", "gamma", "SectionSpec",
    "density_rho", "finite_section_trace", "hs_cross_norm", "line_kernel", "WidomResult", "integrate_mkappa",
    "m_profile", "positivity_check", "widom_coefficient", "SweepRecord", "compare_report",
    "fit_area_coefficient", "run_sweep",
]
