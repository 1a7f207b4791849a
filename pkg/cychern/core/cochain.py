"""
The cochain complex CN^*(C) and its simplicial and cyclic operators.

Cochains are dense complex vectors over the chain basis returned by
`enumerate_chains`. The operators b, b', tau, lambda, A, B0 and B are
materialized as dense matrices once per degree and cached on the
`CochainComplex` of the category.
"""

import threading
import weakref
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg
import structlog

from ..config import TOLERANCES
from .exceptions import DegreeMismatchError, PreconditionError
from .lincat import DEFAULT_CHAIN_CAP, ChainKey, LinCat, enumerate_chains
from .numkernel import max_abs

log = structlog.get_logger(__name__)


class CochainComplex:
    """
    Chain bases and operator matrices of one category.

    Matrices map degree-n coefficient vectors to degree n+1 (b, b'), to
    degree n (tau, lambda, A) or to degree n-1 (B0, B). Every entry is
    written once under a lock and then shared by all readers.
    """

    def __init__(self, cat: LinCat, cap: int = DEFAULT_CHAIN_CAP):
        if cap < 1:
            raise ValueError(f"Invalid cap: {cap}. Must be a positive integer.")
        self.cat = cat
        self.cap = cap
        self._chains: Dict[int, List[ChainKey]] = {}
        self._index: Dict[int, Dict[ChainKey, int]] = {}
        self._operators: Dict[Tuple[str, int], np.ndarray] = {}
        self._lock = threading.RLock()

    def chains(self, n: int) -> List[ChainKey]:
        with self._lock:
            if n not in self._chains:
                chains = enumerate_chains(self.cat, n, self.cap)
                self._chains[n] = chains
                self._index[n] = {chain: k for k, chain in enumerate(chains)}
            return self._chains[n]

    def index(self, n: int) -> Dict[ChainKey, int]:
        self.chains(n)
        return self._index[n]

    def size(self, n: int) -> int:
        return len(self.chains(n))

    def operator(self, name: str, n: int) -> np.ndarray:
        """Cached matrix of the named operator acting on degree n."""
        builders: Dict[str, Callable[[int], np.ndarray]] = {
            "b": lambda k: self._build_face_matrix(k, wrap=True),
            "bprime": lambda k: self._build_face_matrix(k, wrap=False),
            "tau": self._build_tau,
            "lambda": lambda k: (-1) ** k * self.operator("tau", k),
            "A": self._build_a,
            "B0": self._build_b0,
            "B": lambda k: self.operator("A", k - 1) @ self.operator("B0", k),
            "cyclic": self._build_cyclic_basis,
        }
        if name not in builders:
            raise KeyError(f"Unknown operator {name}")
        key = (name, n)
        with self._lock:
            if key not in self._operators:
                matrix = builders[name](n)
                matrix.setflags(write=False)
                self._operators[key] = matrix
                log.debug(
                    "operator_built",
                    category=self.cat.name,
                    operator=name,
                    degree=n,
                    shape=matrix.shape,
                )
            return self._operators[key]

    def _build_face_matrix(self, n: int, wrap: bool) -> np.ndarray:
        rows, columns = self.chains(n + 1), self.index(n)
        matrix = np.zeros((len(rows), len(columns)), dtype=np.complex128)
        for row, chain in enumerate(rows):
            for i in range(n + 1):
                sign = (-1) ** i
                for name, coeff in self.cat.compose_basis(chain[i], chain[i + 1]):
                    face = chain[:i] + (name,) + chain[i + 2 :]
                    matrix[row, columns[face]] += sign * coeff
            if wrap:
                sign = (-1) ** (n + 1)
                for name, coeff in self.cat.compose_basis(chain[n + 1], chain[0]):
                    face = (name,) + chain[1 : n + 1]
                    matrix[row, columns[face]] += sign * coeff
        return matrix

    def _build_tau(self, n: int) -> np.ndarray:
        chains, columns = self.chains(n), self.index(n)
        matrix = np.zeros((len(chains), len(chains)), dtype=np.complex128)
        for row, chain in enumerate(chains):
            matrix[row, columns[chain[-1:] + chain[:-1]]] = 1.0
        return matrix

    def _build_a(self, n: int) -> np.ndarray:
        lam = self.operator("lambda", n)
        power = np.eye(lam.shape[0], dtype=np.complex128)
        total = power.copy()
        for _ in range(n):
            power = lam @ power
            total += power
        return total

    def _build_b0(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError(f"B0 acts on degree >= 1, got {n}")
        rows, columns = self.chains(n - 1), self.index(n)
        sign = (-1) ** n
        matrix = np.zeros((len(rows), len(columns)), dtype=np.complex128)
        for row, chain in enumerate(rows):
            base = self.cat.morphism(chain[0]).dst
            for name, coeff in self.cat.identity(base):
                matrix[row, columns[(name,) + chain]] += coeff
                matrix[row, columns[chain + (name,)]] -= sign * coeff
        return matrix

    def _build_cyclic_basis(self, n: int) -> np.ndarray:
        lam = self.operator("lambda", n)
        identity = np.eye(lam.shape[0], dtype=np.complex128)
        return np.asarray(scipy.linalg.null_space(identity - lam), dtype=np.complex128)


_REGISTRY: "weakref.WeakKeyDictionary[LinCat, Dict[int, CochainComplex]]" = (
    weakref.WeakKeyDictionary()
)
_REGISTRY_LOCK = threading.Lock()


def cochain_complex(cat: LinCat, cap: int = DEFAULT_CHAIN_CAP) -> CochainComplex:
    """The shared cochain complex of a category for the given chain cap."""
    with _REGISTRY_LOCK:
        by_cap = _REGISTRY.setdefault(cat, {})
        if cap not in by_cap:
            by_cap[cap] = CochainComplex(cat, cap)
        return by_cap[cap]


@dataclass(frozen=True, eq=False)
class Cochain:
    """An element of CN^n(C) in the enumerated chain basis."""

    complex: CochainComplex
    degree: int
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128)
        expected = self.complex.size(self.degree)
        if values.shape != (expected,):
            raise ValueError(
                f"Cochain of degree {self.degree} needs {expected} values, "
                f"got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def cat(self) -> LinCat:
        return self.complex.cat

    @property
    def chains(self) -> List[ChainKey]:
        return self.complex.chains(self.degree)

    @classmethod
    def zeros(cls, cx: CochainComplex, degree: int) -> "Cochain":
        return cls(cx, degree, np.zeros(cx.size(degree), dtype=np.complex128))

    @classmethod
    def random(
        cls, cx: CochainComplex, degree: int, rng: np.random.Generator
    ) -> "Cochain":
        size = cx.size(degree)
        values = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        return cls(cx, degree, values)

    @classmethod
    def from_function(
        cls, cx: CochainComplex, degree: int, fn: Callable[[ChainKey], complex]
    ) -> "Cochain":
        return cls(cx, degree, np.array([fn(chain) for chain in cx.chains(degree)]))

    @classmethod
    def from_mapping(
        cls, cx: CochainComplex, degree: int, values: Mapping[ChainKey, complex]
    ) -> "Cochain":
        return cls.from_function(cx, degree, lambda chain: values.get(chain, 0j))

    def at(self, *chain: str) -> complex:
        """Value on one chain; chains outside the basis raise KeyError."""
        return complex(self.values[self.complex.index(self.degree)[tuple(chain)]])

    def norm(self) -> float:
        return max_abs(self.values)

    def scale(self, factor: complex) -> "Cochain":
        return Cochain(self.complex, self.degree, factor * self.values)

    def _check_compatible(self, other: "Cochain") -> None:
        if other.complex is not self.complex:
            raise ValueError("Cochains live over different categories")
        if other.degree != self.degree:
            raise DegreeMismatchError(self.degree, other.degree)

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check_compatible(other)
        return Cochain(self.complex, self.degree, self.values + other.values)

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._check_compatible(other)
        return Cochain(self.complex, self.degree, self.values - other.values)

    def __neg__(self) -> "Cochain":
        return self.scale(-1)

    def as_dict(self) -> Dict[ChainKey, complex]:
        return {chain: complex(value) for chain, value in zip(self.chains, self.values)}


def _apply(name: str, phi: Cochain, target_degree: int) -> Cochain:
    matrix = phi.complex.operator(name, phi.degree)
    return Cochain(phi.complex, target_degree, matrix @ phi.values)


def hochschild_b(phi: Cochain) -> Cochain:
    """The Hochschild coboundary, degree n -> n+1."""
    return _apply("b", phi, phi.degree + 1)


def hochschild_bprime(phi: Cochain) -> Cochain:
    """The coboundary without the wrap-around face."""
    return _apply("bprime", phi, phi.degree + 1)


def cyclic_ops(phi: Cochain) -> Tuple[Cochain, Cochain]:
    """(tau phi, lambda phi)."""
    return _apply("tau", phi, phi.degree), _apply("lambda", phi, phi.degree)


def op_a(phi: Cochain) -> Cochain:
    return _apply("A", phi, phi.degree)


def op_b0(phi: Cochain) -> Cochain:
    """Identity insertion at both ends, degree n+1 -> n."""
    if phi.degree < 1:
        raise DegreeMismatchError(1, phi.degree, "B0 input")
    return _apply("B0", phi, phi.degree - 1)


def op_b(phi: Cochain) -> Cochain:
    """B = A B0, degree n+1 -> n."""
    if phi.degree < 1:
        raise DegreeMismatchError(1, phi.degree, "B input")
    return _apply("B", phi, phi.degree - 1)


@dataclass
class CocycleStatus:
    """Outcome of the cyclic and cocycle tests."""

    cyclic: bool
    cocycle: bool
    cyclic_residual: float
    cocycle_residual: float
    tolerance: float

    def __bool__(self) -> bool:
        return self.cyclic and self.cocycle


def is_cyclic_cocycle(phi: Cochain, rel_tol: Optional[float] = None) -> CocycleStatus:
    """Test phi in Ker(1 - lambda) and Ker(b) against tol * (1 + |phi|)."""
    rel_tol = TOLERANCES.cocycle if rel_tol is None else rel_tol
    tol = rel_tol * (1 + phi.norm())
    _, lam = cyclic_ops(phi)
    cyclic_residual = (phi - lam).norm()
    cocycle_residual = hochschild_b(phi).norm()
    return CocycleStatus(
        cyclic=cyclic_residual <= tol,
        cocycle=cocycle_residual <= tol,
        cyclic_residual=cyclic_residual,
        cocycle_residual=cocycle_residual,
        tolerance=tol,
    )


def is_cyclic(phi: Cochain, rel_tol: Optional[float] = None) -> bool:
    rel_tol = TOLERANCES.cocycle if rel_tol is None else rel_tol
    _, lam = cyclic_ops(phi)
    return (phi - lam).norm() <= rel_tol * (1 + phi.norm())


def cyclic_basis(cx: CochainComplex, n: int) -> np.ndarray:
    """Orthonormal basis (columns) of the cyclic cochains of degree n."""
    return cx.operator("cyclic", n)


@dataclass
class ClassSolution:
    """Result of deciding membership in the cyclic coboundaries."""

    member: bool
    witness: Optional[Cochain]
    residual: float
    relative_residual: float
    residual_vector: np.ndarray = field(repr=False)
    cyclic_dimension: int = 0

    def worst_chain(self, target: Cochain) -> Optional[ChainKey]:
        if not self.residual_vector.size:
            return None
        return target.chains[int(np.argmax(np.abs(self.residual_vector)))]


def class_solve(target: Cochain, rel_tol: Optional[float] = None) -> ClassSolution:
    """
    Least-squares solve of b(w) = target over cyclic w of degree n-1.

    The relative residual is |b(w) - target|_2 / (1 + |target|_2); the
    target is a cyclic coboundary when it is at most rel_tol.
    """
    rel_tol = TOLERANCES.class_relative if rel_tol is None else rel_tol
    n = target.degree
    if n < 1:
        raise DegreeMismatchError(1, n, "class_solve target")
    cx = target.complex
    basis = cyclic_basis(cx, n - 1)
    target_norm = float(np.linalg.norm(target.values))

    if basis.shape[1] == 0:
        log.warning("class_solve_degenerate", degree=n, cyclic_dimension=0)
        coefficients = np.zeros(0, dtype=np.complex128)
        residual_vector = -target.values
    else:
        system = cx.operator("b", n - 1) @ basis
        coefficients, *_ = scipy.linalg.lstsq(system, target.values)
        residual_vector = system @ coefficients - target.values

    residual = float(np.linalg.norm(residual_vector))
    relative = residual / (1 + target_norm)
    witness_values = (
        basis @ coefficients
        if basis.shape[1]
        else np.zeros(cx.size(n - 1), dtype=np.complex128)
    )
    return ClassSolution(
        member=relative <= rel_tol,
        witness=Cochain(cx, n - 1, witness_values),
        residual=residual,
        relative_residual=relative,
        residual_vector=residual_vector,
        cyclic_dimension=basis.shape[1],
    )


def eta(cat: LinCat, name: str) -> complex:
    """
    The normalized functional with eta(id_X) = 1 for every object.

    Supported on the End-basis terms of each identity decomposition, with
    eta(e_k) = conj(c_k) / sum |c_j|^2; zero on every other basis morphism.
    """
    morphism = cat.morphism(name)
    if morphism.src != morphism.dst:
        return 0j
    decomposition = cat.identity(morphism.src).as_dict()
    weight = sum(abs(value) ** 2 for value in decomposition.values())
    if name not in decomposition or weight == 0:
        return 0j
    return complex(np.conj(decomposition[name]) / weight)


def preimage_under_B(phi: Cochain, rel_tol: Optional[float] = None) -> Cochain:
    """
    A cochain psi of degree n+1 with B(psi) = 2(n+1) phi for cyclic phi.

    Raises:
        PreconditionError: If phi is not cyclic
    """
    if not is_cyclic(phi, rel_tol):
        _, lam = cyclic_ops(phi)
        raise PreconditionError(
            "preimage_under_B", "input is not cyclic", (phi - lam).norm()
        )
    cat, cx, n = phi.cat, phi.complex, phi.degree
    values = phi.complex.index(n)
    lookup = phi.values

    def value(chain: ChainKey) -> complex:
        position = values.get(chain)
        return 0j if position is None else complex(lookup[position])

    def psi(chain: ChainKey) -> complex:
        head, tail = chain[0], chain[-1]
        eta_head, eta_tail = eta(cat, head), eta(cat, tail)
        total = 0j
        if eta_head:
            total += eta_head * value(chain[1:])
        if eta_tail:
            total += (-1) ** n * value(chain[:-1]) * eta_tail
        if eta_head and eta_tail:
            base = cat.morphism(chain[1]).dst if n >= 1 else cat.morphism(head).src
            correction = sum(
                coeff * value((unit,) + chain[1:-1])
                for unit, coeff in cat.identity(base)
            )
            total -= (-1) ** n * eta_head * correction * eta_tail
        return total

    return Cochain.from_function(cx, n + 1, psi)


def cyclic_cohomology_dims(
    cat: LinCat, max_degree: int, cap: int = DEFAULT_CHAIN_CAP
) -> List[int]:
    """dim H^n_lambda for n = 0..max_degree from ranks of b on cyclic subspaces."""
    cx = cochain_complex(cat, cap)
    dims = []
    previous_rank = 0
    for n in range(max_degree + 1):
        basis = cyclic_basis(cx, n)
        restricted = cx.operator("b", n) @ basis
        rank = _rank(restricted)
        dims.append(basis.shape[1] - rank - previous_rank)
        previous_rank = rank
    log.info("cyclic_cohomology_dims", category=cat.name, dims=dims)
    return dims


def hochschild_cohomology_dims(
    cat: LinCat, max_degree: int, cap: int = DEFAULT_CHAIN_CAP
) -> List[int]:
    """dim HH^n for n = 0..max_degree from ranks of the full b matrices."""
    cx = cochain_complex(cat, cap)
    dims = []
    previous_rank = 0
    for n in range(max_degree + 1):
        rank = _rank(cx.operator("b", n))
        dims.append(cx.size(n) - rank - previous_rank)
        previous_rank = rank
    return dims


def _rank(matrix: np.ndarray) -> int:
    if not matrix.size:
        return 0
    return int(np.linalg.matrix_rank(matrix, tol=1e-9 * max(1.0, np.abs(matrix).max())))


@dataclass
class KernelACheck:
    """Ker(A) in Im(1 - lambda) for one input."""

    in_kernel: bool
    kernel_residual: float
    solve_residual: float
    passed: bool


def kernel_A_in_image_check(
    w: Cochain, rel_tol: Optional[float] = None
) -> KernelACheck:
    """Solve (1 - lambda) x = w when A w vanishes and report the residual."""
    rel_tol = TOLERANCES.class_relative if rel_tol is None else rel_tol
    cx, n = w.complex, w.degree
    kernel_residual = op_a(w).norm()
    in_kernel = kernel_residual <= TOLERANCES.cocycle * (1 + w.norm())
    if not in_kernel:
        return KernelACheck(False, kernel_residual, float("nan"), False)
    system = np.eye(cx.size(n)) - cx.operator("lambda", n)
    solution, *_ = scipy.linalg.lstsq(system, w.values)
    residual = float(np.linalg.norm(system @ solution - w.values)) / (
        1 + float(np.linalg.norm(w.values))
    )
    return KernelACheck(True, kernel_residual, residual, residual <= rel_tol)


def project_to_kernel_A(w: Cochain) -> Cochain:
    """Orthogonal projection of w onto Ker(A)."""
    matrix = w.complex.operator("A", w.degree)
    kernel = scipy.linalg.null_space(matrix)
    return Cochain(w.complex, w.degree, kernel @ (kernel.conj().T @ w.values))
