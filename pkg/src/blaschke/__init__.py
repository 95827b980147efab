"""Moebius invariants of submanifolds of the sphere and the LS Blaschke-parallel family."""

from .errors import GeometryError
from .families import FAMILIES, ImmersionSpec, jet_eval, make_family
from .ls import LSParams, assemble_ls, feasibility_scan, solve_B0, solve_lambda
from .moebius import MoebiusData, MoebiusJets, blaschke_eigen

__version__ = "0.1.0"

__all__ = [
    "GeometryError", "FAMILIES", "ImmersionSpec", "jet_eval", "make_family",
    "LSParams", "assemble_ls", "feasibility_scan", "solve_B0", "solve_lambda",
    "MoebiusData", "MoebiusJets", "blaschke_eigen",
]
