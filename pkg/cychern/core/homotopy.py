"""
One-parameter families of doubled modules and the invariance of their
Chern classes.

A family is sampled on a grid t_0 = 0 < ... < t_K = 1. Derivatives are
second-order finite differences taken separately on every segment between
breakpoints, so the left and right derivatives at a breakpoint may differ.
The transgression cochain psi_t is integrated with composite Simpson
quadrature segment by segment.
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.integrate import simpson

from ..config import TOLERANCES
from .cochain import ClassSolution, Cochain, class_solve, cochain_complex, op_b0
from .exceptions import (
    DimensionError,
    InsufficientSamplesError,
    OffGridError,
    PreconditionError,
    QuadratureError,
)
from .fredholm import EvenModule, chern_even, summability_report, validate_even
from .lincat import (
    DEFAULT_CHAIN_CAP,
    ChainKey,
    LinCat,
    LinComb,
    ValidationReport,
    compose,
    endpoints,
)
from .numkernel import GradedDims, Mat, block_diag, max_abs, swap_symmetry
from .omega import periodicity_S

log = structlog.get_logger(__name__)

GRID_TOL = 1e-12
Side = Optional[str]


@dataclass(frozen=True)
class QPData:
    """Undoubled samples and the conjugating maps Q_t, P_t per object."""

    rho_plus: Sequence[Mapping[str, Mat]]
    rho_minus: Sequence[Mapping[str, Mat]]
    Q: Sequence[Mapping[str, Mat]]
    P: Sequence[Mapping[str, Mat]]


@dataclass(frozen=True, eq=False)
class HomotopyFamily:
    """
    Sampled path t -> H_t of functors into doubled spaces H(X) + H(X).

    `samples[k][name]` is the 2d x 2d matrix of a basis morphism at grid[k].
    """

    cat: LinCat
    base_dims: Mapping[str, int]
    grid: Tuple[float, ...]
    samples: Sequence[Mapping[str, Mat]]
    breakpoints: Tuple[float, ...] = ()
    name: str = "family"
    qp: Optional[QPData] = None
    _derivatives: Dict[Tuple[str, int], np.ndarray] = field(
        init=False, repr=False, default_factory=dict
    )
    _lock: Any = field(init=False, repr=False, default_factory=threading.Lock)

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError(f"{self.name}: grid needs at least two samples")
        if np.any(np.diff(grid) <= 0):
            raise ValueError(f"{self.name}: grid must be strictly increasing")
        if abs(grid[0]) > GRID_TOL or abs(grid[-1] - 1.0) > GRID_TOL:
            raise ValueError(f"{self.name}: grid must start at 0 and end at 1")
        if len(self.samples) != grid.size:
            raise ValueError(
                f"{self.name}: {len(self.samples)} samples for {grid.size} grid points"
            )
        for point in self.breakpoints:
            self.index_of(point)
        for k, sample in enumerate(self.samples):
            for morphism in self.cat.morphisms:
                if morphism.name not in sample:
                    raise DimensionError(
                        "family", f"sample {k} has no matrix for {morphism.name}"
                    )
                expected = (
                    2 * self.base_dims[morphism.dst],
                    2 * self.base_dims[morphism.src],
                )
                if np.shape(sample[morphism.name]) != expected:
                    raise DimensionError(
                        "family",
                        f"{morphism.name} at t={grid[k]} is "
                        f"{np.shape(sample[morphism.name])}, expected {expected}",
                    )

    @classmethod
    def from_function(
        cls,
        cat: LinCat,
        base_dims: Mapping[str, int],
        grid: Sequence[float],
        sample: Callable[[float], Mapping[str, Mat]],
        breakpoints: Sequence[float] = (),
        name: str = "family",
    ) -> "HomotopyFamily":
        points = tuple(float(t) for t in grid)
        return cls(
            cat=cat,
            base_dims=dict(base_dims),
            grid=points,
            samples=[dict(sample(t)) for t in points],
            breakpoints=tuple(breakpoints),
            name=name,
        )

    def index_of(self, t: float) -> int:
        grid = np.asarray(self.grid)
        position = int(np.argmin(np.abs(grid - t)))
        if abs(grid[position] - t) > GRID_TOL:
            raise OffGridError(t)
        return position

    def segments(self) -> List[Tuple[int, int]]:
        """Inclusive index ranges between consecutive breakpoints."""
        interior = {self.index_of(t) for t in self.breakpoints}
        cuts = sorted({0, len(self.grid) - 1} | interior)
        return list(zip(cuts[:-1], cuts[1:]))

    def segment_for(self, k: int, side: Side = None) -> int:
        """Segment used for derivatives at grid index k."""
        segments = self.segments()
        last = len(self.grid) - 1
        if side is None:
            side = "left" if k == last else "right"
        for position, (start, stop) in enumerate(segments):
            if start < k < stop:
                return position
            if side == "right" and k == start and k != last:
                return position
            if side == "left" and k == stop and k != 0:
                return position
        raise ValueError(f"No {side} segment at grid index {k}")

    def H(self, k: int, comb: LinComb) -> Mat:
        src, dst = endpoints(self.cat, comb)
        matrix = np.zeros(
            (2 * self.base_dims[dst], 2 * self.base_dims[src]), dtype=np.complex128
        )
        for name, coeff in comb.terms:
            matrix = matrix + coeff * self.samples[k][name]
        return matrix

    def segment_derivative(self, name: str, segment: int) -> np.ndarray:
        """d/dt of one morphism over a whole segment, shape (samples, rows, cols)."""
        key = (name, segment)
        with self._lock:
            if key not in self._derivatives:
                start, stop = self.segments()[segment]
                points = np.asarray(self.grid[start : stop + 1])
                if points.size < 3:
                    raise InsufficientSamplesError(
                        tuple(points), 3, "a second-order difference stencil"
                    )
                stack = np.stack(
                    [self.samples[k][name] for k in range(start, stop + 1)]
                )
                derivative = np.gradient(stack, points, axis=0, edge_order=2)
                derivative.setflags(write=False)
                self._derivatives[key] = derivative
            return self._derivatives[key]


def doubled_module_at(fam: HomotopyFamily, t: float) -> EvenModule:
    """The even module (H_t, swap) with grading (d, d) on every object."""
    k = fam.index_of(t)
    return EvenModule(
        cat=fam.cat,
        symmetry={obj: swap_symmetry(d) for obj, d in fam.base_dims.items()},
        rep=dict(fam.samples[k]),
        name=f"{fam.name}@{fam.grid[k]:.6g}",
        dims={obj: GradedDims(d, d) for obj, d in fam.base_dims.items()},
    )


def qp_module_at(fam: HomotopyFamily, t: float) -> EvenModule:
    """
    The unconjugated module (diag(rho+, rho-), F_t = [[0, Q_t], [P_t, 0]]).

    Raises:
        PreconditionError: If the family carries no Q/P data
    """
    if fam.qp is None:
        raise PreconditionError("qp_module_at", "family has no Q/P data")
    k = fam.index_of(t)
    qp = fam.qp
    symmetry = {}
    for obj, d in fam.base_dims.items():
        zero = np.zeros((d, d), dtype=np.complex128)
        symmetry[obj] = np.block([[zero, qp.Q[k][obj]], [qp.P[k][obj], zero]])
    rep = {
        morphism.name: block_diag(
            qp.rho_plus[k][morphism.name], qp.rho_minus[k][morphism.name]
        )
        for morphism in fam.cat.morphisms
    }
    return EvenModule(
        cat=fam.cat,
        symmetry=symmetry,
        rep=rep,
        name=f"{fam.name}@{fam.grid[k]:.6g}(QP)",
        dims={obj: GradedDims(d, d) for obj, d in fam.base_dims.items()},
    )


def delta_at(fam: HomotopyFamily, f: LinComb, t: float, side: Side = None) -> Mat:
    """
    Finite-difference derivative of H_t(f) at a grid sample.

    Central differences inside a segment, second-order one-sided
    differences at segment ends; `side` picks the segment at a breakpoint.
    """
    k = fam.index_of(t)
    segment = fam.segment_for(k, side)
    start, _ = fam.segments()[segment]
    src, dst = endpoints(fam.cat, f)
    shape = (2 * fam.base_dims[dst], 2 * fam.base_dims[src])
    result = np.zeros(shape, dtype=np.complex128)
    for name, coeff in f.terms:
        result = result + coeff * fam.segment_derivative(name, segment)[k - start]
    return result


def leibniz_residual(fam: HomotopyFamily, t: float, side: Side = None) -> float:
    """max |delta(g f) - H(g) delta(f) - delta(g) H(f)| over composable basis pairs."""
    cat = fam.cat
    k = fam.index_of(t)
    worst = 0.0
    for g in cat.morphisms:
        for f in cat.morphisms:
            if f.dst != g.src:
                continue
            g_comb, f_comb = cat.basis(g.name), cat.basis(f.name)
            composite = compose(cat, g_comb, f_comb)
            product_rule = (
                fam.H(k, g_comb) @ delta_at(fam, f_comb, t, side)
                + delta_at(fam, g_comb, t, side) @ fam.H(k, f_comb)
            )
            residual = max_abs(delta_at(fam, composite, t, side) - product_rule)
            worst = max(worst, residual)
    return worst


@dataclass
class RefinementTrend:
    """Leibniz residuals on nested grids and the ratios between them."""

    sizes: List[int]
    residuals: List[float]

    @property
    def ratios(self) -> List[float]:
        return [
            coarse / fine if fine > 0 else float("inf")
            for coarse, fine in zip(self.residuals, self.residuals[1:])
        ]

    def passed(self, minimum_ratio: float = TOLERANCES.leibniz_ratio) -> bool:
        return all(ratio >= minimum_ratio for ratio in self.ratios)


def leibniz_refinement(
    builder: Callable[[int], HomotopyFamily], sizes: Sequence[int], t: float
) -> RefinementTrend:
    """Leibniz residual at t for families built on grids of the given sizes."""
    residuals = [leibniz_residual(builder(size), t) for size in sizes]
    trend = RefinementTrend(list(sizes), residuals)
    log.info("leibniz_refinement", sizes=list(sizes), residuals=residuals)
    return trend


def psi_at(
    fam: HomotopyFamily,
    t: float,
    m: int,
    side: Side = None,
    cap: int = DEFAULT_CHAIN_CAP,
) -> Cochain:
    """
    The transgression cochain psi_t of degree 2m+1.

    psi_t(f0, ..., f_{p+1}) = sum_{j=1}^{p+1} (-1)^{j-1}
    Tr(eps H_t(f0)[F, f1]...[F, f_{j-1}] delta_t(fj) [F, f_{j+1}]...[F, f_{p+1}])
    with p = 2m.
    """
    mod = doubled_module_at(fam, t)
    cx = cochain_complex(fam.cat, cap)
    cat = fam.cat
    degree = 2 * m + 1

    def value(chain: ChainKey) -> complex:
        obj = cat.morphism(chain[0]).dst
        prefixes = [mod.H(chain[0])]
        for name in chain[1:]:
            prefixes.append(prefixes[-1] @ mod.commutator(name))
        suffix = mod.identity(cat.morphism(chain[-1]).src)
        total = 0j
        for j in range(degree, 0, -1):
            derivative = delta_at(fam, cat.basis(chain[j]), t, side)
            word = prefixes[j - 1] @ derivative @ suffix
            total += (-1) ** (j - 1) * np.trace(mod.grading(obj) @ word)
            suffix = mod.commutator(chain[j]) @ suffix
        return complex(total)

    return Cochain.from_function(cx, degree, value)


def _map(fn: Callable[[Any], Any], items: Sequence[Any], threads: int) -> List[Any]:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class InvarianceReport:
    """Residuals of the transgression identity between t1 and t2."""

    t1: float
    t2: float
    m: int
    transgression_residual: float
    quadrature_tolerance: float
    worst_chain: Optional[ChainKey]
    class_solution: ClassSolution
    class_tolerance: float
    integral: Cochain = field(repr=False)

    @property
    def transgression_passed(self) -> bool:
        return self.transgression_residual <= self.quadrature_tolerance

    @property
    def class_passed(self) -> bool:
        return self.class_solution.relative_residual <= self.class_tolerance

    @property
    def passed(self) -> bool:
        return self.transgression_passed and self.class_passed


def integrate_invariance(
    fam: HomotopyFamily,
    t1: float,
    t2: float,
    m: int,
    threads: int = 1,
    tol: Optional[float] = None,
    cap: int = DEFAULT_CHAIN_CAP,
) -> InvarianceReport:
    """
    Integrate psi_t over [t1, t2] and check B0(psi) = phi_{t2} - phi_{t1} and
    that S(phi_{t2}) - S(phi_{t1}) is a cyclic coboundary.

    Raises:
        ValueError: If t1 >= t2
        InsufficientSamplesError: If a segment piece has an even sample count
    """
    tol = TOLERANCES.homotopy if tol is None else tol
    if not t1 < t2:
        raise ValueError(f"Invalid window [{t1}, {t2}]. Need t1 < t2.")
    k1, k2 = fam.index_of(t1), fam.index_of(t2)
    cx = cochain_complex(fam.cat, cap)
    integral = np.zeros(cx.size(2 * m + 1), dtype=np.complex128)
    widest_step = 0.0
    scale = 0.0

    for position, (start, stop) in enumerate(fam.segments()):
        lo, hi = max(start, k1), min(stop, k2)
        if lo >= hi:
            continue
        indices = list(range(lo, hi + 1))
        points = np.asarray([fam.grid[k] for k in indices])
        if points.size < 3:
            raise InsufficientSamplesError(tuple(points), 3, "composite Simpson")
        if points.size % 2 == 0:
            raise QuadratureError(
                tuple(points), "composite Simpson with an odd sample count"
            )

        def sample(k: int, start: int = start) -> np.ndarray:
            side = "right" if k == start else "left"
            return psi_at(fam, fam.grid[k], m, side, cap).values

        values = np.stack(_map(sample, indices, threads))
        real = simpson(values.real, x=points, axis=0)
        imag = simpson(values.imag, x=points, axis=0)
        integral += real + 1j * imag
        widest_step = max(widest_step, float(np.max(np.diff(points))))
        scale = max(scale, float(np.max(np.abs(values))) if values.size else 0.0)
        log.debug("segment_integrated", segment=position, samples=len(indices))

    psi = Cochain(cx, 2 * m + 1, integral)
    phi_1 = chern_even(doubled_module_at(fam, t1), m, cap)
    phi_2 = chern_even(doubled_module_at(fam, t2), m, cap)
    transgression = op_b0(psi) - (phi_2 - phi_1)
    worst = None
    if transgression.values.size:
        worst = transgression.chains[int(np.argmax(np.abs(transgression.values)))]
    heuristic = widest_step**4 * (t2 - t1) * scale
    solution = class_solve(periodicity_S(phi_2) - periodicity_S(phi_1))
    report = InvarianceReport(
        t1=t1,
        t2=t2,
        m=m,
        transgression_residual=transgression.norm(),
        quadrature_tolerance=max(tol, heuristic),
        worst_chain=worst,
        class_solution=solution,
        class_tolerance=tol,
        integral=psi,
    )
    log.info(
        "invariance_checked",
        family=fam.name,
        m=m,
        transgression_residual=report.transgression_residual,
        class_residual=solution.relative_residual,
        passed=report.passed,
    )
    return report


@dataclass(frozen=True)
class RawFamily:
    """Undoubled samples rho_t^+, rho_t^- with conjugating maps Q_t, P_t."""

    cat: LinCat
    base_dims: Mapping[str, int]
    grid: Tuple[float, ...]
    rho_plus: Sequence[Mapping[str, Mat]]
    rho_minus: Sequence[Mapping[str, Mat]]
    Q: Sequence[Mapping[str, Mat]]
    P: Sequence[Mapping[str, Mat]]
    breakpoints: Tuple[float, ...] = ()
    name: str = "family"


def build_from_QP(raw: RawFamily, tol: Optional[float] = None) -> HomotopyFamily:
    """
    Conjugate by T_t = diag(1, Q_t): H_t(f) = diag(rho+(f), Q_t rho-(f) P_t), F = swap.

    Raises:
        PreconditionError: If Q_t P_t differs from the identity
    """
    tol = TOLERANCES.validation if tol is None else tol
    samples: List[Dict[str, Mat]] = []
    for k, t in enumerate(raw.grid):
        for obj, d in raw.base_dims.items():
            residual = max_abs(raw.Q[k][obj] @ raw.P[k][obj] - np.eye(d))
            if residual > tol:
                raise PreconditionError(
                    "build_from_QP", f"Q_t P_t != id for {obj} at t={t}", residual
                )
        sample = {}
        for morphism in raw.cat.morphisms:
            lower = (
                raw.Q[k][morphism.dst]
                @ raw.rho_minus[k][morphism.name]
                @ raw.P[k][morphism.src]
            )
            sample[morphism.name] = block_diag(raw.rho_plus[k][morphism.name], lower)
        samples.append(sample)
    return HomotopyFamily(
        cat=raw.cat,
        base_dims=dict(raw.base_dims),
        grid=tuple(raw.grid),
        samples=samples,
        breakpoints=tuple(raw.breakpoints),
        name=raw.name,
        qp=QPData(raw.rho_plus, raw.rho_minus, raw.Q, raw.P),
    )


@dataclass
class ChernPath:
    """Characters along the grid and class residuals between neighbours."""

    m: int
    characters: List[Tuple[float, Cochain]]
    residuals: List[float]
    worst_pair: Optional[Tuple[float, float]]
    worst_chain: Optional[ChainKey]

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def chern_path(
    fam: HomotopyFamily, m: int, threads: int = 1, cap: int = DEFAULT_CHAIN_CAP
) -> ChernPath:
    """
    Characters phi^{2m}_t at every sample; consecutive S-images are compared
    modulo cyclic coboundaries.
    """
    points = list(fam.grid)
    characters = _map(
        lambda t: chern_even(doubled_module_at(fam, t), m, cap), points, threads
    )
    images = _map(periodicity_S, characters, threads)
    residuals: List[float] = []
    worst_pair: Optional[Tuple[float, float]] = None
    worst_chain: Optional[ChainKey] = None
    worst = -1.0
    for k in range(len(points) - 1):
        difference = images[k + 1] - images[k]
        solution = class_solve(difference)
        residuals.append(solution.relative_residual)
        if solution.relative_residual > worst:
            worst = solution.relative_residual
            worst_pair = (points[k], points[k + 1])
            worst_chain = solution.worst_chain(difference)
    log.info(
        "chern_path",
        family=fam.name,
        m=m,
        max_residual=max(residuals, default=0.0),
    )
    return ChernPath(
        m=m,
        characters=list(zip(points, characters)),
        residuals=residuals,
        worst_pair=worst_pair,
        worst_chain=worst_chain,
    )


def sampled_summability(fam: HomotopyFamily, p: float) -> Dict[str, List[float]]:
    """Schatten p-norms of [F, H_t(f)] along the grid, per basis morphism."""
    norms: Dict[str, List[float]] = {m.name: [] for m in fam.cat.morphisms}
    for t in fam.grid:
        for name, value in summability_report(doubled_module_at(fam, t), p).items():
            norms[name].append(value)
    return norms


def validate_family(
    fam: HomotopyFamily, tol: Optional[float] = None
) -> ValidationReport:
    """Validate every sampled doubled module and the Q/P inverse condition."""
    tol = TOLERANCES.validation if tol is None else tol
    report = ValidationReport(subject=fam.name)
    for t in fam.grid:
        for violation in validate_even(doubled_module_at(fam, t), tol).violations:
            where = (f"t={t:.6g}",) + violation.where
            report.add(violation.kind, where, violation.residual)
    if fam.qp is not None:
        for k, t in enumerate(fam.grid):
            for obj, d in fam.base_dims.items():
                residual = max_abs(fam.qp.Q[k][obj] @ fam.qp.P[k][obj] - np.eye(d))
                if residual > tol:
                    report.add("qp-inverse", (f"t={t:.6g}", obj), residual)
    return report
