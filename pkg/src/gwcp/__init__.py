"""Branching random walks and degree-normalized contact processes on Galton-Watson trees."""

from .bounds import (
    BoundReport,
    Certificate,
    bound_report,
    check_certificate,
    check_certificate_full,
    lambda_g_upper_refined,
    lambda_g_upper_simple,
    lambda_l_lower_brw,
    search_certificate,
)
from .brw import BrwPhase, brw_phase, run_brw
from .cp import run_cp, run_cp_coupled
from .dist import OffspringDistribution, degenerate, from_map, geometric_from_rate
from .tree import TreeMode, new_tree
from .walk import DistanceChain, spectral_radius_formula

__all__ = [
    "BoundReport",
    "BrwPhase",
    "Certificate",
    "DistanceChain",
    "OffspringDistribution",
    "TreeMode",
    "bound_report",
    "brw_phase",
    "check_certificate",
    "check_certificate_full",
    "degenerate",
    "from_map",
    "geometric_from_rate",
    "lambda_g_upper_refined",
    "lambda_g_upper_simple",
    "lambda_l_lower_brw",
    "new_tree",
    "run_brw",
    "run_cp",
    "run_cp_coupled",
    "search_certificate",
    "spectral_radius_formula",
]
