"""Exact chain complexes, cubical chains, circle-equivariant variants and Morse complexes."""

from .complex import (
    ChainMap,
    ComplexError,
    GradedFreeComplex,
    HomologyGroup,
    ShortExactSequence,
    betti_numbers,
    connecting_homomorphism,
    homology,
    long_exact_sequence_check,
    universal_coefficients_check,
    verify_complex,
)
from .equivariant import (
    CircleComplex,
    equivariant_homology,
    gysin_check,
    localization_check,
)
from .matrix import IntegerMatrix, smith_normal_form

__all__ = [
    "ChainMap", "CircleComplex", "ComplexError", "GradedFreeComplex", "HomologyGroup",
    "IntegerMatrix", "ShortExactSequence", "betti_numbers", "connecting_homomorphism",
    "equivariant_homology", "gysin_check", "homology", "localization_check",
    "long_exact_sequence_check", "smith_normal_form", "universal_coefficients_check",
    "verify_complex",
]

__version__ = "0.1.0"
