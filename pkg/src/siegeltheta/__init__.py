"""Exact Fourier coefficients of Siegel theta series with harmonic coefficients
for the Niemeier lattices and the Leech lattice."""

from .exactnum import ThetaScalar
from .lattice import GramMatrix, Lattice, short_vectors
from .groups import GeneratedGroup, Isometry
from .catalog import build_niemeier, harmonic_spec, niemeier_lattice, target_gram
from .theta import CoefficientTask, coefficient, coefficient_bruteforce
from .ikeda import build_g, ikeda_coefficient

__version__ = "0.1.0"

__all__ = [
    "ThetaScalar",
    "GramMatrix",
    "Lattice",
    "short_vectors",
    "GeneratedGroup",
    "Isometry",
    "build_niemeier",
    "harmonic_spec",
    "niemeier_lattice",
    "target_gram",
    "CoefficientTask",
    "coefficient",
    "coefficient_bruteforce",
    "build_g",
    "ikeda_coefficient",
]
