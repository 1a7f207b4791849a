"""
Finitely presented small C-linear categories.

A category is given by its objects, a basis of each hom-space, the
structure constants of composition and a decomposition of every identity
in the End-basis. Composition is extended bilinearly; an absent table
entry means the composite is zero.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

import numpy as np
import structlog

from .exceptions import CategoryError, CombinatorialBlowupError, ComposabilityError

log = structlog.get_logger(__name__)

DEFAULT_CHAIN_CAP = 10**6
COEFF_DROP = 1e-14

ChainKey = Tuple[str, ...]


@dataclass(frozen=True)
class Morphism:
    """A basis morphism name: src -> dst."""

    name: str
    src: str
    dst: str


@dataclass(frozen=True)
class LinComb:
    """
    Linear combination of basis morphisms sharing one (src, dst) pair.

    An empty combination is the zero morphism; it still remembers its
    endpoints when they are known.
    """

    terms: Tuple[Tuple[str, complex], ...] = ()
    src: Optional[str] = None
    dst: Optional[str] = None

    @classmethod
    def of(
        cls,
        coefficients: Mapping[str, complex],
        src: Optional[str] = None,
        dst: Optional[str] = None,
    ) -> "LinComb":
        terms = tuple(
            (name, complex(value))
            for name, value in coefficients.items()
            if abs(value) > COEFF_DROP
        )
        return cls(terms=terms, src=src, dst=dst)

    def as_dict(self) -> Dict[str, complex]:
        return dict(self.terms)

    def coefficient(self, name: str) -> complex:
        return self.as_dict().get(name, 0j)

    def is_zero(self) -> bool:
        return not self.terms

    def scale(self, factor: complex) -> "LinComb":
        return LinComb.of(
            {name: factor * value for name, value in self.terms}, self.src, self.dst
        )

    def __add__(self, other: "LinComb") -> "LinComb":
        total = self.as_dict()
        for name, value in other.terms:
            total[name] = total.get(name, 0j) + value
        return LinComb.of(total, self.src or other.src, self.dst or other.dst)

    def __sub__(self, other: "LinComb") -> "LinComb":
        return self + other.scale(-1)

    def __iter__(self) -> Iterator[Tuple[str, complex]]:
        return iter(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({value:g})*{name}" for name, value in self.terms)


@dataclass
class Violation:
    """One failed check in a validation report."""

    kind: str
    where: Tuple[str, ...]
    residual: float
    detail: str = ""

    def __str__(self) -> str:
        location = ", ".join(self.where)
        text = f"{self.kind} at ({location})"
        if self.residual:
            text = f"{text}: residual {self.residual:.3e}"
        if self.detail:
            text = f"{text} [{self.detail}]"
        return text


@dataclass
class ValidationReport:
    """Violations found by a validator; empty means valid."""

    subject: str
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(
        self,
        kind: str,
        where: Iterable[str],
        residual: float = 0.0,
        detail: str = "",
    ) -> None:
        self.violations.append(Violation(kind, tuple(where), residual, detail))

    def kinds(self) -> List[str]:
        return [violation.kind for violation in self.violations]

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "violations": [str(violation) for violation in self.violations],
        }


@dataclass(frozen=True, eq=False)
class LinCat:
    """
    A finitely presented C-linear category.

    Basis order within every hom-space follows the declaration order of
    `morphisms`; chain enumeration and all operator matrices inherit it.
    `source` is the resolved path of the file the category was read from.
    """

    objects: Tuple[str, ...]
    morphisms: Tuple[Morphism, ...]
    compose_table: Mapping[Tuple[str, str], LinComb]
    identity_decomp: Mapping[str, LinComb]
    name: str = "category"
    source: Optional[str] = field(default=None, repr=False)
    _index: Dict[str, int] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        names = [morphism.name for morphism in self.morphisms]
        if len(set(names)) != len(names):
            raise CategoryError(f"{self.name}: duplicate morphism names")
        if len(set(self.objects)) != len(self.objects):
            raise CategoryError(f"{self.name}: duplicate object names")
        for morphism in self.morphisms:
            if morphism.src not in self.objects or morphism.dst not in self.objects:
                raise CategoryError(
                    f"{self.name}: morphism {morphism.name} has unknown endpoint"
                )
        for position, morphism in enumerate(self.morphisms):
            self._index[morphism.name] = position

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise CategoryError(f"{self.name}: unknown morphism {name}") from None

    def morphism(self, name: str) -> Morphism:
        return self.morphisms[self.index(name)]

    def hom(self, src: str, dst: str) -> Tuple[str, ...]:
        """Basis names of Hom(src, dst)."""
        return tuple(
            morphism.name
            for morphism in self.morphisms
            if morphism.src == src and morphism.dst == dst
        )

    def end(self, obj: str) -> Tuple[str, ...]:
        return self.hom(obj, obj)

    def hom_into(self, dst: str) -> Tuple[str, ...]:
        """Basis names of every morphism ending at dst."""
        return tuple(m.name for m in self.morphisms if m.dst == dst)

    def basis(self, name: str) -> LinComb:
        """A basis morphism as a one-term combination."""
        morphism = self.morphism(name)
        return LinComb(((name, 1 + 0j),), morphism.src, morphism.dst)

    def identity(self, obj: str) -> LinComb:
        try:
            decomposition = self.identity_decomp[obj]
        except KeyError:
            raise CategoryError(f"{self.name}: no identity for object {obj}") from None
        return LinComb(decomposition.terms, obj, obj)

    def compose_basis(self, g: str, f: str) -> LinComb:
        """g after f for basis morphisms."""
        g_mor, f_mor = self.morphism(g), self.morphism(f)
        if f_mor.dst != g_mor.src:
            raise ComposabilityError(g, f, f"{f_mor.dst} != {g_mor.src}")
        result = self.compose_table.get((g, f))
        if result is None:
            return LinComb((), f_mor.src, g_mor.dst)
        return LinComb(result.terms, f_mor.src, g_mor.dst)

    def dim_matrix(self) -> np.ndarray:
        """Integer matrix whose (i, j) entry is dim Hom(objects[j], objects[i])."""
        position = {obj: k for k, obj in enumerate(self.objects)}
        counts = np.zeros((len(self.objects), len(self.objects)), dtype=object)
        for morphism in self.morphisms:
            counts[position[morphism.dst], position[morphism.src]] += 1
        return counts


def endpoints(cat: LinCat, comb: LinComb) -> Tuple[Optional[str], Optional[str]]:
    """(src, dst) of a combination, read from its terms when not recorded."""
    if comb.src is not None and comb.dst is not None:
        return comb.src, comb.dst
    if comb.terms:
        first = cat.morphism(comb.terms[0][0])
        return first.src, first.dst
    return comb.src, comb.dst


def compose(cat: LinCat, g: LinComb, f: LinComb) -> LinComb:
    """
    Bilinear composite g after f.

    Raises:
        ComposabilityError: If dst(f) differs from src(g)
    """
    f_src, f_dst = endpoints(cat, f)
    g_src, g_dst = endpoints(cat, g)
    if f_dst is not None and g_src is not None and f_dst != g_src:
        raise ComposabilityError(str(g), str(f), f"{f_dst} != {g_src}")
    total: Dict[str, complex] = {}
    for g_name, g_coeff in g.terms:
        for f_name, f_coeff in f.terms:
            for name, value in cat.compose_basis(g_name, f_name).terms:
                total[name] = total.get(name, 0j) + g_coeff * f_coeff * value
    return LinComb.of(total, f_src, g_dst)


def validate_category(cat: LinCat, tol: float = 1e-12) -> ValidationReport:
    """
    Check typing, associativity and unit laws of a presentation.

    Every violated associativity triple, identity failure and typing error
    is recorded; an empty report means the category is valid.
    """
    report = ValidationReport(subject=cat.name)

    for (g, f), result in cat.compose_table.items():
        try:
            g_mor, f_mor = cat.morphism(g), cat.morphism(f)
        except CategoryError as err:
            report.add("typing", (g, f), detail=err.msg)
            continue
        if f_mor.dst != g_mor.src:
            report.add("typing", (g, f), detail="table entry for non-composable pair")
            continue
        for name, _ in result.terms:
            if name not in cat.hom(f_mor.src, g_mor.dst):
                hom = f"Hom({f_mor.src}, {g_mor.dst})"
                report.add("typing", (g, f), detail=f"{name} not in {hom}")
    if report.violations:
        return report

    for h_mor in cat.morphisms:
        for g_mor in cat.morphisms:
            if g_mor.dst != h_mor.src:
                continue
            for f_mor in cat.morphisms:
                if f_mor.dst != g_mor.src:
                    continue
                h = cat.basis(h_mor.name)
                g = cat.basis(g_mor.name)
                f = cat.basis(f_mor.name)
                left = compose(cat, compose(cat, h, g), f)
                right = compose(cat, h, compose(cat, g, f))
                residual = _comb_distance(left, right)
                if residual > tol:
                    report.add(
                        "associativity", (h_mor.name, g_mor.name, f_mor.name), residual
                    )

    for obj in cat.objects:
        if obj not in cat.identity_decomp:
            report.add("identity", (obj,), detail="missing identity decomposition")
            continue
        identity = cat.identity(obj)
        for name, _ in identity.terms:
            if name not in cat.end(obj):
                report.add("identity", (obj, name), detail="term outside End-basis")
        for morphism in cat.morphisms:
            basis = cat.basis(morphism.name)
            if morphism.dst == obj:
                residual = _comb_distance(compose(cat, identity, basis), basis)
                if residual > tol:
                    where = (obj, morphism.name)
                    report.add("identity", where, residual, "left unit law")
            if morphism.src == obj:
                residual = _comb_distance(compose(cat, basis, identity), basis)
                if residual > tol:
                    where = (morphism.name, obj)
                    report.add("identity", where, residual, "right unit law")

    log.debug(
        "category_validated", category=cat.name, violations=len(report.violations)
    )
    return report


def _comb_distance(left: LinComb, right: LinComb) -> float:
    difference = left - right
    return max((abs(value) for _, value in difference.terms), default=0.0)


def unitalize(cat: LinCat) -> LinCat:
    """
    Adjoin a formal unit to every End-space.

    Hom(X, Y) for X != Y is unchanged. The adjoined units are strict
    two-sided identities and become the identities of the new category.
    """
    taken = {morphism.name for morphism in cat.morphisms}
    units: Dict[str, str] = {}
    for obj in cat.objects:
        candidate = f"1_{obj}"
        while candidate in taken:
            candidate = f"{candidate}'"
        taken.add(candidate)
        units[obj] = candidate

    adjoined = tuple(Morphism(units[obj], obj, obj) for obj in cat.objects)
    morphisms = cat.morphisms + adjoined
    table: Dict[Tuple[str, str], LinComb] = dict(cat.compose_table)
    for obj, unit in units.items():
        table[(unit, unit)] = LinComb(((unit, 1 + 0j),))
        for morphism in cat.morphisms:
            if morphism.dst == obj:
                table[(unit, morphism.name)] = LinComb(((morphism.name, 1 + 0j),))
            if morphism.src == obj:
                table[(morphism.name, unit)] = LinComb(((morphism.name, 1 + 0j),))
    identities = {
        obj: LinComb(((unit, 1 + 0j),), obj, obj) for obj, unit in units.items()
    }
    return LinCat(
        objects=cat.objects,
        morphisms=morphisms,
        compose_table=table,
        identity_decomp=identities,
        name=f"{cat.name}~",
    )


def chain_count(cat: LinCat, n: int) -> int:
    """Exact number of cyclically composable chains of degree n."""
    counts = cat.dim_matrix()
    power = np.identity(len(cat.objects), dtype=object)
    for _ in range(n + 1):
        power = power.dot(counts)
    return int(sum(power[k, k] for k in range(len(cat.objects))))


def enumerate_chains(
    cat: LinCat, n: int, cap: int = DEFAULT_CHAIN_CAP
) -> List[ChainKey]:
    """
    All chains (f0, ..., fn) with fi in Hom(X_{i+1}, X_i), indices mod n+1.

    Ordered lexicographically by basis declaration order.

    Raises:
        ValueError: If n is negative
        CombinatorialBlowupError: If the chain count exceeds cap
    """
    if n < 0:
        raise ValueError(f"Invalid degree: {n}. Must be non-negative.")
    estimated = chain_count(cat, n)
    if estimated > cap:
        raise CombinatorialBlowupError(n, estimated, cap)

    by_dst: Dict[str, List[Morphism]] = {obj: [] for obj in cat.objects}
    for morphism in cat.morphisms:
        by_dst[morphism.dst].append(morphism)

    chains: List[ChainKey] = []

    def extend(prefix: List[Morphism]) -> None:
        if len(prefix) == n + 1:
            if prefix[-1].src == prefix[0].dst:
                chains.append(tuple(morphism.name for morphism in prefix))
            return
        for morphism in by_dst[prefix[-1].src]:
            prefix.append(morphism)
            extend(prefix)
            prefix.pop()

    for first in cat.morphisms:
        extend([first])

    log.debug("chains_enumerated", category=cat.name, degree=n, count=len(chains))
    return chains


def spine(cat: LinCat, chain: ChainKey) -> Tuple[str, ...]:
    """Objects (X0, ..., Xn) with fi in Hom(X_{i+1}, X_i)."""
    return tuple(cat.morphism(name).dst for name in chain)


def is_cyclic_chain(cat: LinCat, chain: ChainKey) -> bool:
    morphisms = [cat.morphism(name) for name in chain]
    size = len(morphisms)
    return all(morphisms[i].src == morphisms[(i + 1) % size].dst for i in range(size))
