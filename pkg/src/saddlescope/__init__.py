"""Quadratic differentials on the sphere, their WKB triangulations, edge lattices and stable spectra."""

from .config import Config, load_config
from .differentials import (
    Inconclusive,
    InvalidDifferential,
    QuadraticDifferential,
    critical_points,
    is_saddle_free,
    residues,
    saddle_phase_scan,
    standard_periods,
    strip_decomposition,
    wall_cross_check,
    wkb_signed,
    wkb_triangulation,
)
from .quivers import Quiver, edge_lattice, flip_lattice_map, mutate, potential, quiver
from .stability import CentralCharge, saddle_vs_stable, stable_count
from .surfaces import IdealTriangulation, MarkedSurface, SignedTriangulation, flip, pop

__all__ = [
    "Config",
    "load_config",
    "Inconclusive",
    "InvalidDifferential",
    "QuadraticDifferential",
    "critical_points",
    "is_saddle_free",
    "residues",
    "saddle_phase_scan",
    "standard_periods",
    "strip_decomposition",
    "wall_cross_check",
    "wkb_signed",
    "wkb_triangulation",
    "Quiver",
    "edge_lattice",
    "flip_lattice_map",
    "mutate",
    "potential",
    "quiver",
    "CentralCharge",
    "saddle_vs_stable",
    "stable_count",
    "IdealTriangulation",
    "MarkedSurface",
    "SignedTriangulation",
    "flip",
    "pop",
]
