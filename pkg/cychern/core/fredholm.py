"""
Even and odd Fredholm modules over a linear category.

A module assigns a finite-dimensional space to every object, a matrix to
every basis morphism and a symmetry F_X with F_X^2 = 1 to every object.
In the even case the spaces are graded, F is odd and morphisms act by
block-diagonal matrices. Characters are obtained by supertracing the
operator words H(f0)[F, f1]...[F, fn].
"""

import threading
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import structlog

from ..config import TOLERANCES
from .cochain import Cochain, cochain_complex, cyclic_ops, hochschild_b
from .exceptions import ComposabilityError
from .lincat import (
    DEFAULT_CHAIN_CAP,
    ChainKey,
    LinCat,
    LinComb,
    ValidationReport,
    compose,
    endpoints,
)
from .numkernel import GradedDims, Mat, graded_commutator, max_abs, schatten_norm, trace
from .omega import periodicity_S, spines_between

log = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class FredholmModule:
    """Shared structure of even and odd modules."""

    cat: LinCat
    symmetry: Mapping[str, Mat]
    rep: Mapping[str, Mat]
    name: str = "module"
    _commutators: Dict[str, Mat] = field(init=False, repr=False, default_factory=dict)
    _lock: Any = field(init=False, repr=False, default_factory=threading.Lock)

    graded = False

    def dim(self, obj: str) -> int:
        raise NotImplementedError

    def F(self, obj: str) -> Mat:
        return self.symmetry[obj]

    def identity(self, obj: str) -> Mat:
        return np.eye(self.dim(obj), dtype=np.complex128)

    def H(self, comb: Union[LinComb, str]) -> Mat:
        """Matrix of a basis morphism or a linear combination."""
        if isinstance(comb, str):
            return self.rep[comb]
        src, dst = comb.src, comb.dst
        if src is None or dst is None:
            if not comb.terms:
                raise ValueError("Zero combination without endpoints")
            first = self.cat.morphism(comb.terms[0][0])
            src, dst = first.src, first.dst
        matrix = np.zeros((self.dim(dst), self.dim(src)), dtype=np.complex128)
        for name, coeff in comb.terms:
            matrix = matrix + coeff * self.rep[name]
        return matrix

    def commutator(self, name: str) -> Mat:
        """[F, H(f)] for a basis morphism, computed once."""
        with self._lock:
            if name not in self._commutators:
                morphism = self.cat.morphism(name)
                value = graded_commutator(
                    self.F(morphism.src),
                    self.F(morphism.dst),
                    self.rep[name],
                    0,
                    self.graded,
                )
                value.setflags(write=False)
                self._commutators[name] = value
            return self._commutators[name]


@dataclass(frozen=True, eq=False)
class EvenModule(FredholmModule):
    """A graded module: F odd, morphisms block-diagonal."""

    dims: Mapping[str, GradedDims] = field(default_factory=dict)

    graded = True

    def dim(self, obj: str) -> int:
        return self.dims[obj].total

    def grading(self, obj: str) -> Mat:
        return self.dims[obj].grading()


@dataclass(frozen=True, eq=False)
class OddModule(FredholmModule):
    """An ungraded module with involutions F_X."""

    dims: Mapping[str, int] = field(default_factory=dict)

    def dim(self, obj: str) -> int:
        return self.dims[obj]


@dataclass(frozen=True)
class OperatorWord:
    """An element (H(f0) + mu)[F, f1]...[F, fj] of the operator DG-semicategory."""

    source: str
    target: str
    degree: int
    matrix: Mat


def evaluate_word(
    mod: FredholmModule,
    head: Optional[LinComb],
    letters: Sequence[str],
    mu: complex = 0j,
    obj: Optional[str] = None,
) -> OperatorWord:
    """
    Matrix of (H(head) + mu) [F, l1] ... [F, lj].

    Args:
        mod: the module
        head: head combination, or None for a pure unit head
        letters: basis morphism names
        mu: coefficient of the identity in the head
        obj: target object, needed only when head is None and letters is empty

    Raises:
        ComposabilityError: If the spine does not compose
    """
    cat = mod.cat
    if head is not None:
        current, target = endpoints(cat, head)
        if current is None or target is None:
            raise ValueError("A zero head needs its endpoints")
        matrix = mod.H(LinComb(head.terms, current, target))
        if mu:
            if current != target:
                raise ComposabilityError(
                    str(head), "unit", "unit added to a non-endomorphism"
                )
            matrix = matrix + mu * mod.identity(target)
    else:
        if letters:
            target = cat.morphism(letters[0]).dst
        elif obj is not None:
            target = obj
        else:
            raise ValueError("A word without head or letters needs its object")
        current = target
        matrix = mu * mod.identity(target)
    for name in letters:
        morphism = cat.morphism(name)
        if morphism.dst != current:
            raise ComposabilityError(current, name, "word letters do not compose")
        matrix = matrix @ mod.commutator(name)
        current = morphism.src
    return OperatorWord(
        source=current, target=target, degree=len(letters), matrix=matrix
    )


def word_product(first: OperatorWord, second: OperatorWord) -> OperatorWord:
    """first after second."""
    if second.target != first.source:
        raise ComposabilityError(first.target, second.target, "words do not compose")
    return OperatorWord(
        source=second.source,
        target=first.target,
        degree=first.degree + second.degree,
        matrix=first.matrix @ second.matrix,
    )


def word_differential(mod: FredholmModule, word: OperatorWord) -> OperatorWord:
    """The word [F, w] of degree deg(w) + 1."""
    matrix = graded_commutator(
        mod.F(word.source), mod.F(word.target), word.matrix, word.degree, mod.graded
    )
    return OperatorWord(word.source, word.target, word.degree + 1, matrix)


def _require_endomorphism(word: OperatorWord) -> None:
    if word.source != word.target:
        raise ComposabilityError(
            word.target, word.source, "supertrace of a non-endomorphism"
        )


def supertrace(mod: EvenModule, word: OperatorWord) -> complex:
    """Tr_s(w) = 1/2 Tr(eps F [F, w])."""
    _require_endomorphism(word)
    obj = word.source
    symmetry = mod.F(obj)
    commutator = graded_commutator(symmetry, symmetry, word.matrix, word.degree, True)
    return 0.5 * trace(mod.grading(obj) @ mod.F(obj) @ commutator)


def trs_odd(mod: OddModule, word: OperatorWord) -> complex:
    """Tr'_s(w) = 1/2 Tr(F (F w - (-1)^deg w F))."""
    _require_endomorphism(word)
    obj = word.source
    symmetry = mod.F(obj)
    commutator = graded_commutator(symmetry, symmetry, word.matrix, word.degree, True)
    return 0.5 * trace(symmetry @ commutator)


def chain_word(mod: FredholmModule, chain: ChainKey) -> OperatorWord:
    """H(f0)[F, f1]...[F, fn] for a chain."""
    return evaluate_word(mod, mod.cat.basis(chain[0]), chain[1:])


def chern_even(mod: EvenModule, m: int, cap: int = DEFAULT_CHAIN_CAP) -> Cochain:
    """The character phi^{2m}(f0, ..., f2m) = Tr_s(H(f0)[F, f1]...[F, f2m])."""
    if m < 0:
        raise ValueError(f"Invalid m: {m}. Must be non-negative.")
    cx = cochain_complex(mod.cat, cap)
    character = Cochain.from_function(
        cx, 2 * m, lambda chain: supertrace(mod, chain_word(mod, chain))
    )
    log.debug("character_computed", module=mod.name, kind="even", degree=2 * m)
    return character


def chern_odd(mod: OddModule, m: int, cap: int = DEFAULT_CHAIN_CAP) -> Cochain:
    """The character phi^{2m-1}(f0, ..., f_{2m-1}) = Tr'_s(H(f0)[F, f1]...)."""
    if m < 1:
        raise ValueError(f"Invalid m: {m}. Odd characters need m >= 1.")
    cx = cochain_complex(mod.cat, cap)
    character = Cochain.from_function(
        cx, 2 * m - 1, lambda chain: trs_odd(mod, chain_word(mod, chain))
    )
    log.debug("character_computed", module=mod.name, kind="odd", degree=2 * m - 1)
    return character


def odd_trace_cochain(
    mod: OddModule, degree: int, cap: int = DEFAULT_CHAIN_CAP
) -> Cochain:
    """Tr'_s of the chain words in any degree; vanishes in even degrees."""
    cx = cochain_complex(mod.cat, cap)
    return Cochain.from_function(
        cx, degree, lambda chain: trs_odd(mod, chain_word(mod, chain))
    )


def summability_report(mod: FredholmModule, p: float) -> Dict[str, float]:
    """Schatten p-norm of [F, H(f)] for every basis morphism."""
    return {
        morphism.name: schatten_norm(mod.commutator(morphism.name), p)
        for morphism in mod.cat.morphisms
    }


def summability_thresholds(kind: str, p: float) -> int:
    """Smallest admissible m for a p-summable module.

    Even modules need 2m >= p - 1, odd modules 2m >= p.
    """
    if kind == "even":
        return max(0, int(np.ceil((p - 1) / 2)))
    if kind == "odd":
        return max(1, int(np.ceil(p / 2)))
    raise ValueError(f"Invalid module kind: {kind}. Must be even or odd.")


def holder_check(
    mod: FredholmModule, head: str, letters: Sequence[str], exponent: int
) -> float:
    """
    Residual of |word|_{exponent/k} <= |H(head)|_op * prod |[F, li]|_exponent.

    Args:
        exponent: n + 1, at least the number k of letters

    Returns:
        Left side minus right side; non-positive when the bound holds
    """
    k = len(letters)
    if k < 1 or exponent < k:
        raise ValueError(f"Need 1 <= k <= exponent, got k={k}, exponent={exponent}")
    word = evaluate_word(mod, mod.cat.basis(head), letters)
    left = schatten_norm(word.matrix, exponent / k)
    right = float(scipy.linalg.norm(mod.H(head), 2))
    for name in letters:
        right *= schatten_norm(mod.commutator(name), exponent)
    return left - right


def validate_even(mod: EvenModule, tol: Optional[float] = None) -> ValidationReport:
    """Check involution, grading, block structure and functor laws."""
    return _validate(mod, TOLERANCES.validation if tol is None else tol)


def validate_odd(mod: OddModule, tol: Optional[float] = None) -> ValidationReport:
    """Check involution and functor laws."""
    return _validate(mod, TOLERANCES.validation if tol is None else tol)


def _validate(mod: FredholmModule, tol: float) -> ValidationReport:
    cat = mod.cat
    report = ValidationReport(subject=mod.name)

    for obj in cat.objects:
        if obj not in mod.symmetry:
            report.add("symmetry", (obj,), detail="missing F")
            continue
        size = mod.dim(obj)
        symmetry = mod.F(obj)
        if symmetry.shape != (size, size):
            detail = f"F is {symmetry.shape}, expected {(size, size)}"
            report.add("shape", (obj,), detail=detail)
            continue
        residual = max_abs(symmetry @ symmetry - mod.identity(obj))
        if residual > tol:
            report.add("involution", (obj,), residual, "F^2 != id")
        if isinstance(mod, EvenModule):
            eps = mod.grading(obj)
            residual = max_abs(eps @ symmetry @ eps + symmetry)
            if residual > tol:
                detail = "F has non-zero diagonal blocks"
                report.add("grading", (obj,), residual, detail)

    for morphism in cat.morphisms:
        if morphism.name not in mod.rep:
            report.add("shape", (morphism.name,), detail="missing matrix")
            continue
        expected = (mod.dim(morphism.dst), mod.dim(morphism.src))
        if mod.rep[morphism.name].shape != expected:
            report.add(
                "shape",
                (morphism.name,),
                detail=f"matrix is {mod.rep[morphism.name].shape}, expected {expected}",
            )
        elif isinstance(mod, EvenModule):
            matrix = mod.rep[morphism.name]
            residual = max_abs(
                mod.grading(morphism.dst) @ matrix @ mod.grading(morphism.src) - matrix
            )
            if residual > tol:
                detail = "H(f) not block-diagonal"
                report.add("grading", (morphism.name,), residual, detail)
    if report.violations:
        return report

    for g in cat.morphisms:
        for f in cat.morphisms:
            if f.dst != g.src:
                continue
            composite = compose(cat, cat.basis(g.name), cat.basis(f.name))
            residual = max_abs(mod.H(g.name) @ mod.H(f.name) - mod.H(composite))
            if residual > tol:
                detail = "H(g)H(f) != H(g o f)"
                report.add("functor", (g.name, f.name), residual, detail)
    for obj in cat.objects:
        residual = max_abs(mod.H(cat.identity(obj)) - mod.identity(obj))
        if residual > tol:
            report.add("functor", (obj,), residual, "H(id) != id")

    log.debug("module_validated", module=mod.name, violations=len(report.violations))
    return report


def direct_S(mod: EvenModule, m: int, cap: int = DEFAULT_CHAIN_CAP) -> Cochain:
    """
    S(phi^{2m}) from merged operator words.

    Sums Tr_s(H(f0)[F, f1]...[F, f_{i-1}] H(fi)H(f_{i+1}) [F, f_{i+2}]...) over
    i = 1..2m+1 on every chain of degree 2m+2.
    """
    cx = cochain_complex(mod.cat, cap)
    degree = 2 * m + 2

    def value(chain: ChainKey) -> complex:
        obj = mod.cat.morphism(chain[0]).dst
        total = 0j
        for i in range(1, degree):
            left = evaluate_word(mod, mod.cat.basis(chain[0]), chain[1:i]).matrix
            tail_obj = mod.cat.morphism(chain[i + 1]).src
            right = evaluate_word(mod, None, chain[i + 2 :], mu=1, obj=tail_obj).matrix
            merged = left @ mod.H(chain[i]) @ mod.H(chain[i + 1]) @ right
            total += supertrace(mod, OperatorWord(obj, obj, 2 * m, merged))
        return total

    return Cochain.from_function(cx, degree, value)


def periodicity_witness(
    mod: EvenModule, m: int, cap: int = DEFAULT_CHAIN_CAP
) -> Cochain:
    """
    The cochain psi of degree 2m+1 with b(psi) = S(phi^{2m}) + (m+1) phi^{2m+2}.

    psi = 1/2 sum_{j=0}^{2m+1} (-1)^{j-1} psi^j with
    psi^j(f0, ...) = Tr(eps F H(fj)[F, f_{j+1}]...[F, f_{2m+1}][F, f0]...[F, f_{j-1}]).
    """
    cx = cochain_complex(mod.cat, cap)
    degree = 2 * m + 1

    def value(chain: ChainKey) -> complex:
        total = 0j
        for j in range(degree + 1):
            rotated = chain[j:] + chain[:j]
            word = chain_word(mod, rotated)
            obj = word.target
            operator = mod.grading(obj) @ mod.F(obj) @ word.matrix
            total += (-1) ** (j - 1) * trace(operator)
        return 0.5 * total

    return Cochain.from_function(cx, degree, value)


@dataclass
class PeriodicityReport:
    """Residuals of S(phi^{2m}) + (m+1) phi^{2m+2} = b(psi)."""

    m: int
    s_agreement: float
    witness_cyclic: float
    identity_residual: float
    worst_chain: Optional[ChainKey]
    tolerance: float
    agreement_tolerance: float
    witness_tolerance: float
    phi_low: Cochain = field(repr=False)
    phi_high: Cochain = field(repr=False)
    witness: Cochain = field(repr=False)

    @property
    def passed(self) -> bool:
        return (
            self.s_agreement <= self.agreement_tolerance
            and self.witness_cyclic <= self.witness_tolerance
            and self.identity_residual <= self.tolerance
        )

    @property
    def max_residual(self) -> float:
        return max(self.s_agreement, self.witness_cyclic, self.identity_residual)


def periodicity_check(
    mod: EvenModule, m: int, tol: Optional[float] = None, cap: int = DEFAULT_CHAIN_CAP
) -> PeriodicityReport:
    """
    Verify the periodicity identity with its explicit witness.

    Computes S(phi^{2m}) symbolically and from merged words, the witness psi,
    and the residual of S(phi^{2m}) + (m+1) phi^{2m+2} - b(psi) per chain.
    """
    tol = TOLERANCES.periodicity if tol is None else tol
    phi_low = chern_even(mod, m, cap)
    phi_high = chern_even(mod, m + 1, cap)
    symbolic = periodicity_S(phi_low)
    direct = direct_S(mod, m, cap)
    witness = periodicity_witness(mod, m, cap)
    _, lam = cyclic_ops(witness)
    residual = symbolic + phi_high.scale(m + 1) - hochschild_b(witness)
    worst = None
    if residual.values.size:
        worst = residual.chains[int(np.argmax(np.abs(residual.values)))]
    report = PeriodicityReport(
        m=m,
        s_agreement=(symbolic - direct).norm(),
        witness_cyclic=(witness - lam).norm(),
        identity_residual=residual.norm(),
        worst_chain=worst,
        tolerance=tol,
        agreement_tolerance=min(tol, TOLERANCES.cocycle),
        witness_tolerance=TOLERANCES.cocycle,
        phi_low=phi_low,
        phi_high=phi_high,
        witness=witness,
    )
    log.info(
        "periodicity_checked",
        module=mod.name,
        m=m,
        passed=report.passed,
        max_residual=report.max_residual,
    )
    return report


def random_unitary(size: int, rng: np.random.Generator) -> Mat:
    """Haar-distributed unitary from the QR decomposition of a Gaussian matrix."""
    shape = (size, size)
    gaussian = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    q, r = scipy.linalg.qr(gaussian)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def randomize_module(mod: EvenModule, rng: np.random.Generator) -> EvenModule:
    """Conjugate an even module by random block-diagonal unitaries."""
    unitaries = {
        obj: scipy.linalg.block_diag(
            random_unitary(dims.d_plus, rng), random_unitary(dims.d_minus, rng)
        )
        if dims.d_plus and dims.d_minus
        else random_unitary(dims.total, rng)
        for obj, dims in mod.dims.items()
    }
    symmetry = {obj: u @ mod.F(obj) @ u.conj().T for obj, u in unitaries.items()}
    rep = {
        morphism.name: unitaries[morphism.dst]
        @ mod.rep[morphism.name]
        @ unitaries[morphism.src].conj().T
        for morphism in mod.cat.morphisms
    }
    return EvenModule(
        cat=mod.cat, symmetry=symmetry, rep=rep, name=f"{mod.name}*U", dims=mod.dims
    )


def random_word(
    mod: FredholmModule,
    degree: int,
    source: str,
    target: str,
    rng: np.random.Generator,
    terms: int = 2,
) -> OperatorWord:
    """A random linear combination of chain-shaped words between two objects."""
    keys = spines_between(mod.cat, degree, source, target, with_unit=False)
    matrix = np.zeros((mod.dim(target), mod.dim(source)), dtype=np.complex128)
    if keys:
        picks = rng.choice(len(keys), size=min(terms, len(keys)), replace=False)
        for position in picks:
            head, letters = keys[int(position)]
            coeff = complex(rng.standard_normal(), rng.standard_normal())
            assert head is not None
            word = evaluate_word(mod, mod.cat.basis(head), letters)
            matrix = matrix + coeff * word.matrix
    return OperatorWord(source=source, target=target, degree=degree, matrix=matrix)


def parity_residual(mod: EvenModule, word: OperatorWord) -> float:
    """Distance of a word from the block pattern its degree requires."""
    eps_source, eps_target = mod.grading(word.source), mod.grading(word.target)
    sign = (-1) ** word.degree
    return max_abs(eps_target @ word.matrix @ eps_source - sign * word.matrix)


