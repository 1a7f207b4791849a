"""
cychern

Cyclic cohomology of small linear categories, Chern characters of even and
odd Fredholm modules, and numerical certificates for their periodicity and
homotopy invariance.
"""

__version__ = "1.0.0"
__author__ = "cychern developers"
__description__ = (
    "Cyclic cocycles and Chern characters of categorified Fredholm modules"
)

# Public API exports
from .config import RunConfig, Tolerances
from .core.exceptions import CychernException
from .core.lincat import LinCat, LinComb
from .core.cochain import Cochain, cochain_complex
from .core.fredholm import EvenModule, OddModule
from .core.homotopy import HomotopyFamily

__all__ = [
    "Cochain",
    "CychernException",
    "EvenModule",
    "HomotopyFamily",
    "LinCat",
    "LinComb",
    "OddModule",
    "RunConfig",
    "Tolerances",
    "cochain_complex",
]
