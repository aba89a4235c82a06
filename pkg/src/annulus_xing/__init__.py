"""Exact and simulated annulus crossing probabilities for critical percolation."""
from .exceptions import (
    AnnulusXingError,
    ConvergenceError,
    DegenerateMeshError,
    DomainError,
    InsufficientRootsError,
    QuadratureError,
    RootBracketError,
)
from .formulas import (
    SeriesValue,
    asymptotic_bb_ratio,
    cle_moment,
    p_b_eta,
    p_b_series,
    p_bb,
    p_bb_closed,
    p_bb_open,
    p_bw_eta,
    p_bw_series,
    p_one_interface,
)
from .roots import backbone_exponent, root_set, solve_real_root
from .special_fn import Modulus, eta

__version__ = "0.1.0"

__all__ = [
    "AnnulusXingError", "ConvergenceError", "DegenerateMeshError", "DomainError",
    "InsufficientRootsError", "QuadratureError", "RootBracketError",
    "SeriesValue", "asymptotic_bb_ratio", "cle_moment", "p_b_eta", "p_b_series", "p_bb",
    "p_bb_closed", "p_bb_open", "p_bw_eta", "p_bw_series", "p_one_interface",
    "backbone_exponent", "root_set", "solve_real_root", "Modulus", "eta",
]
