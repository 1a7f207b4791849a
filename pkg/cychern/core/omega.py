"""
Symbolic universal DG-semicategory over a linear category.

A form is a finite sum of normal-form terms (f0 + mu) df1 ... dfn. A term
is keyed by (head, letters): head is a basis morphism name, or None for
the adjoined unit, and letters is the tuple (f1, ..., fn) of basis names.
Products are reduced to normal form by moving heads to the left with
    (w dl) g = w d(lg) - (wl) dg
and composites of basis morphisms are expanded by structure constants.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import structlog

from ..config import TOLERANCES
from .cochain import (
    ClassSolution,
    Cochain,
    CochainComplex,
    CocycleStatus,
    class_solve,
    cyclic_ops,
    hochschild_b,
    is_cyclic_cocycle,
    op_b,
)
from .exceptions import ComposabilityError, DegreeMismatchError, PreconditionError
from .lincat import ChainKey, LinCat, LinComb

log = structlog.get_logger(__name__)

TermKey = Tuple[Optional[str], Tuple[str, ...]]


@dataclass(frozen=True, eq=False)
class OmegaForm:
    """An element of Hom(source, target) in the universal DG-semicategory."""

    cat: LinCat
    source: str
    target: str
    terms: Mapping[TermKey, complex]

    @classmethod
    def build(
        cls,
        cat: LinCat,
        source: str,
        target: str,
        terms: Mapping[TermKey, complex],
        drop: float = TOLERANCES.coalesce,
    ) -> "OmegaForm":
        kept = {
            key: complex(value) for key, value in terms.items() if abs(value) > drop
        }
        return cls(cat, source, target, kept)

    @property
    def degree(self) -> int:
        """Letter count; zero forms report 0."""
        degrees = {len(letters) for _, letters in self.terms}
        if len(degrees) > 1:
            raise DegreeMismatchError(min(degrees), max(degrees), "homogeneous form")
        return degrees.pop() if degrees else 0

    def is_zero(self) -> bool:
        return not self.terms

    def scale(self, factor: complex) -> "OmegaForm":
        return OmegaForm.build(
            self.cat,
            self.source,
            self.target,
            {key: factor * value for key, value in self.terms.items()},
        )

    def __add__(self, other: "OmegaForm") -> "OmegaForm":
        if (self.source, self.target) != (other.source, other.target):
            raise ComposabilityError(
                f"{self.target}<-{self.source}",
                f"{other.target}<-{other.source}",
                "sum of forms with different endpoints",
            )
        total: Dict[TermKey, complex] = dict(self.terms)
        for key, value in other.terms.items():
            total[key] = total.get(key, 0j) + value
        return OmegaForm.build(self.cat, self.source, self.target, total)

    def __sub__(self, other: "OmegaForm") -> "OmegaForm":
        return self + other.scale(-1)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for (head, letters), value in sorted(
            self.terms.items(), key=lambda item: (item[0][0] or "", item[0][1])
        ):
            lead = head if head is not None else "1"
            body = " ".join([lead] + [f"d{x}" for x in letters])
            pieces.append(f"({value:g}) {body}")
        return " + ".join(pieces)


def _check_spine(
    cat: LinCat, head: Optional[str], letters: Sequence[str], target: str
) -> str:
    """Validate a term's object spine and return its source object."""
    current = target
    if head is not None:
        morphism = cat.morphism(head)
        if morphism.dst != target:
            raise ComposabilityError(head, target, "head does not end at the target")
        current = morphism.src
    for name in letters:
        morphism = cat.morphism(name)
        if morphism.dst != current:
            raise ComposabilityError(current, name, "letters do not compose")
        current = morphism.src
    return current


def basis_form(cat: LinCat, head: str, letters: Sequence[str] = ()) -> OmegaForm:
    """The normal-form term head d(letters[0]) ... d(letters[-1])."""
    target = cat.morphism(head).dst
    source = _check_spine(cat, head, letters, target)
    return OmegaForm(cat, source, target, {(head, tuple(letters)): 1 + 0j})


def unit_form(
    cat: LinCat, letters: Sequence[str] = (), obj: Optional[str] = None
) -> OmegaForm:
    """The term 1 d(letters[0]) ... with the adjoined unit as head."""
    if letters:
        target = cat.morphism(letters[0]).dst
    elif obj is not None:
        target = obj
    else:
        raise ValueError("An empty unit form needs its object")
    source = _check_spine(cat, None, letters, target)
    return OmegaForm(cat, source, target, {(None, tuple(letters)): 1 + 0j})


def from_lincomb(cat: LinCat, comb: LinComb) -> OmegaForm:
    """A degree-zero form from a linear combination of basis morphisms."""
    if comb.src is None or comb.dst is None:
        if not comb.terms:
            raise ValueError("Zero combination without endpoints")
        first = cat.morphism(comb.terms[0][0])
        src, dst = first.src, first.dst
    else:
        src, dst = comb.src, comb.dst
    terms = {(name, ()): value for name, value in comb.terms}
    return OmegaForm.build(cat, src, dst, terms)


def _right_multiply(
    cat: LinCat, head: Optional[str], letters: Tuple[str, ...], g: str
) -> Dict[TermKey, complex]:
    """Normal form of (head dl1 ... dln) * g for a basis morphism g."""
    if not letters:
        if head is None:
            return {(g, ()): 1 + 0j}
        return {(name, ()): value for name, value in cat.compose_basis(head, g)}
    last = letters[-1]
    result: Dict[TermKey, complex] = {}
    # w dl g = w d(l g) - (w l) dg
    for name, value in cat.compose_basis(last, g):
        key = (head, letters[:-1] + (name,))
        result[key] = result.get(key, 0j) + value
    for (inner_head, inner_letters), value in _right_multiply(
        cat, head, letters[:-1], last
    ).items():
        key = (inner_head, inner_letters + (g,))
        result[key] = result.get(key, 0j) - value
    return result


def compose_forms(a: OmegaForm, b: OmegaForm) -> OmegaForm:
    """
    The product a * b (a after b) reduced to normal form.

    Raises:
        ComposabilityError: If b does not end where a starts
    """
    if b.target != a.source:
        raise ComposabilityError(
            f"form {a.target}<-{a.source}", f"form {b.target}<-{b.source}"
        )
    cat = a.cat
    total: Dict[TermKey, complex] = {}
    for (a_head, a_letters), a_value in a.terms.items():
        for (b_head, b_letters), b_value in b.terms.items():
            if b_head is None:
                pieces: Mapping[TermKey, complex] = {(a_head, a_letters): 1 + 0j}
            else:
                pieces = _right_multiply(cat, a_head, a_letters, b_head)
            for (head, letters), value in pieces.items():
                key = (head, letters + b_letters)
                total[key] = total.get(key, 0j) + a_value * b_value * value
    return OmegaForm.build(cat, b.source, a.target, total)


def compose_all(forms: Sequence[OmegaForm]) -> OmegaForm:
    """Left-to-right product of a composable sequence of forms."""
    return reduce(compose_forms, forms)


def differential(a: OmegaForm) -> OmegaForm:
    """d((f0 + mu) df1 ... dfn) = df0 df1 ... dfn."""
    total: Dict[TermKey, complex] = {}
    for (head, letters), value in a.terms.items():
        if head is None:
            continue
        key = (None, (head,) + letters)
        total[key] = total.get(key, 0j) + value
    return OmegaForm.build(a.cat, a.source, a.target, total)


def trace_eval(phi: Cochain, form: OmegaForm) -> complex:
    """
    T_phi(form): the linear extension of f0 df1 ... dfn -> phi(f0, ..., fn).

    Terms with the adjoined unit as head evaluate to zero.

    Raises:
        DegreeMismatchError: If the form degree differs from the cochain degree
        ComposabilityError: If the form is not an endomorphism
    """
    if form.is_zero():
        return 0j
    if form.degree != phi.degree:
        raise DegreeMismatchError(phi.degree, form.degree, "form")
    if form.source != form.target:
        raise ComposabilityError(
            form.target, form.source, "trace of a non-endomorphism"
        )
    index = phi.complex.index(phi.degree)
    total = 0j
    for (head, letters), value in form.terms.items():
        if head is None:
            continue
        total += value * phi.values[index[(head,) + letters]]
    return complex(total)


def graded_trace_residual(phi: Cochain, a: OmegaForm, b: OmegaForm) -> float:
    """|T(ab) - (-1)^{ij} T(ba)| for forms of degrees i, j with i + j = deg phi."""
    sign = (-1) ** (a.degree * b.degree)
    forward = trace_eval(phi, compose_forms(a, b))
    return abs(forward - sign * trace_eval(phi, compose_forms(b, a)))


def _require_cyclic_cocycle(phi: Cochain, operation: str) -> CocycleStatus:
    status = is_cyclic_cocycle(phi)
    if not status:
        raise PreconditionError(
            operation,
            "input is not a cyclic cocycle",
            max(status.cyclic_residual, status.cocycle_residual),
        )
    return status


def _merged_word(cat: LinCat, chain: ChainKey, i: int) -> OmegaForm:
    """(f0 df1 ... df_{i-1}) (fi f_{i+1}) (1 df_{i+2} ... df_last)."""
    composite = cat.compose_basis(chain[i], chain[i + 1])
    if composite.is_zero():
        source, target = cat.morphism(chain[-1]).src, cat.morphism(chain[0]).dst
        return OmegaForm(cat, source, target, {})
    prefix = basis_form(cat, chain[0], chain[1:i])
    word = compose_forms(prefix, from_lincomb(cat, composite))
    if i + 2 < len(chain):
        word = compose_forms(word, unit_form(cat, chain[i + 2 :]))
    return word


def periodicity_S(phi: Cochain) -> Cochain:
    """
    S(phi) in degree r+2 for a cyclic cocycle phi of degree r.

    S(phi)(f0, ..., f_{r+2}) is the sum over i = 1..r+1 of T_phi applied to
    the word (f0 df1 ... df_{i-1})(fi f_{i+1})(1 df_{i+2} ... df_{r+2}).

    Raises:
        PreconditionError: If phi is not a cyclic cocycle
    """
    _require_cyclic_cocycle(phi, "periodicity_S")
    cat, r = phi.cat, phi.degree

    def value(chain: ChainKey) -> complex:
        return sum(
            (trace_eval(phi, _merged_word(cat, chain, i)) for i in range(1, r + 2)), 0j
        )

    result = Cochain.from_function(phi.complex, r + 2, value)
    log.debug("periodicity_applied", category=cat.name, degree=r)
    return result


def s_coboundary_witness(phi: Cochain) -> Cochain:
    """
    A cochain psi of degree r+1 with b(psi) = S(phi).

    psi(f0, ..., f_{r+1}) = sum_j (-1)^{j-1} T_phi(f0 df1 ... df_{j-1} fj
    df_{j+1} ... df_{r+1}), j = 1..r+1.

    Raises:
        PreconditionError: If phi is not a cyclic cocycle
    """
    _require_cyclic_cocycle(phi, "s_coboundary_witness")
    cat, r = phi.cat, phi.degree

    def value(chain: ChainKey) -> complex:
        total = 0j
        for j in range(1, r + 2):
            prefix = basis_form(cat, chain[0], chain[1:j])
            word = compose_forms(prefix, basis_form(cat, chain[j]))
            if j + 1 < len(chain):
                word = compose_forms(word, unit_form(cat, chain[j + 1 :]))
            total += (-1) ** (j - 1) * trace_eval(phi, word)
        return total

    return Cochain.from_function(phi.complex, r + 1, value)


@dataclass
class SOnBReport:
    """Checks that B(psi) is a cyclic cocycle and S(B psi) - n(n+1) b psi is exact."""

    degree: int
    hypothesis_residual: float
    b_psi_cocycle_residual: float
    b_psi_cyclic_residual: float
    solution: ClassSolution
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.b_psi_cocycle_residual <= self.tolerance
            and self.b_psi_cyclic_residual <= self.tolerance
            and self.solution.member
        )


def check_s_on_B(psi: Cochain, rel_tol: Optional[float] = None) -> SOnBReport:
    """
    Verify S(B psi) = n(n+1) b psi modulo cyclic coboundaries.

    Raises:
        PreconditionError: If (1 - lambda) b psi does not vanish
    """
    rel_tol = TOLERANCES.cocycle if rel_tol is None else rel_tol
    n = psi.degree
    if n < 1:
        raise DegreeMismatchError(1, n, "check_s_on_B input")
    boundary = hochschild_b(psi)
    _, lam = cyclic_ops(boundary)
    hypothesis = (boundary - lam).norm()
    scale = 1 + psi.norm()
    if hypothesis > rel_tol * scale:
        raise PreconditionError("check_s_on_B", "b(psi) is not cyclic", hypothesis)

    phi = op_b(psi)
    status = is_cyclic_cocycle(phi)
    if not status:
        inf = float("inf")
        solution = ClassSolution(False, None, inf, inf, boundary.values)
    else:
        difference = periodicity_S(phi) - boundary.scale(n * (n + 1))
        solution = class_solve(difference)
    report = SOnBReport(
        degree=n,
        hypothesis_residual=hypothesis,
        b_psi_cocycle_residual=status.cocycle_residual,
        b_psi_cyclic_residual=status.cyclic_residual,
        solution=solution,
        tolerance=status.tolerance,
    )
    log.info(
        "check_s_on_B",
        degree=n,
        passed=report.passed,
        residual=solution.relative_residual,
    )
    return report


def admissible_s_on_B_inputs(cx: CochainComplex, n: int) -> np.ndarray:
    """Orthonormal basis (columns) of the degree-n cochains psi with b(psi) cyclic."""
    identity = np.eye(cx.size(n + 1), dtype=np.complex128)
    system = (identity - cx.operator("lambda", n + 1)) @ cx.operator("b", n)
    return np.asarray(scipy.linalg.null_space(system), dtype=np.complex128)


def spines_between(
    cat: LinCat, degree: int, source: str, target: str, with_unit: bool = True
) -> List[TermKey]:
    """Every normal-form term key of the given degree from source to target."""
    keys: List[TermKey] = []

    def walk(current: str, letters: Tuple[str, ...], head: Optional[str]) -> None:
        if len(letters) == degree:
            if current == source:
                keys.append((head, letters))
            return
        for name in cat.hom_into(current):
            walk(cat.morphism(name).src, letters + (name,), head)

    heads: List[Optional[str]] = [None] if with_unit else []
    heads += list(cat.hom_into(target))
    for head in heads:
        start = target if head is None else cat.morphism(head).src
        walk(start, (), head)
    return keys


def random_form(
    cat: LinCat,
    degree: int,
    source: str,
    target: str,
    rng: np.random.Generator,
    with_unit: bool = True,
) -> OmegaForm:
    """A form with independent complex Gaussian coefficients on every term."""
    keys = spines_between(cat, degree, source, target, with_unit)
    coefficients = rng.standard_normal(len(keys)) + 1j * rng.standard_normal(len(keys))
    return OmegaForm.build(cat, source, target, dict(zip(keys, coefficients)))
