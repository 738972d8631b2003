"""Numerical checks of Kantorovich-type inequalities for tensor products of operators."""

from .linalg import (
    DomainError,
    EigenConvergenceError,
    InputError,
    SpectrumWindow,
    eig_hermitian,
    loewner_margin,
)
from .catalog import CATALOG, run_case, run_seeded
from .sharpness import ratio_search
from .verifiers import VerificationReport

__all__ = [
    "CATALOG",
    "DomainError",
    "EigenConvergenceError",
    "InputError",
    "SpectrumWindow",
    "VerificationReport",
    "eig_hermitian",
    "loewner_margin",
    "ratio_search",
    "run_case",
    "run_seeded",
]
__version__ = "0.1.0"
