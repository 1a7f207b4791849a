"""
Core numerical layers.

numkernel -> lincat -> cochain -> omega -> fredholm -> homotopy, each
depending only on the layers before it.
"""

from .cochain import (
    Cochain,
    CochainComplex,
    class_solve,
    cochain_complex,
    is_cyclic_cocycle,
)
from .fredholm import EvenModule, OddModule, chern_even, chern_odd, periodicity_check
from .homotopy import HomotopyFamily, integrate_invariance
from .lincat import LinCat, LinComb, Morphism, enumerate_chains, validate_category
from .omega import OmegaForm, periodicity_S

__all__ = [
    "Cochain",
    "CochainComplex",
    "EvenModule",
    "HomotopyFamily",
    "LinCat",
    "LinComb",
    "Morphism",
    "OddModule",
    "OmegaForm",
    "chern_even",
    "chern_odd",
    "class_solve",
    "cochain_complex",
    "enumerate_chains",
    "integrate_invariance",
    "is_cyclic_cocycle",
    "periodicity_S",
    "periodicity_check",
    "validate_category",
]
