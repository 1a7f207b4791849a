"""
Shipped categories, modules and families.

Every fixture is addressable by name (`fixture:FIX_NIL` in any file
reference) and rebuilt on demand; builders are cheap.
"""

from typing import Callable, Dict, Iterable, Mapping, Tuple, Union

import numpy as np

from .core.fredholm import EvenModule, OddModule
from .core.homotopy import HomotopyFamily, RawFamily, build_from_QP
from .core.lincat import LinCat, LinComb, Morphism
from .core.numkernel import GradedDims, Mat, block_diag, swap_symmetry

ROTATION_SAMPLES = 65
CONJUGATOR = np.array([[2.0, 1.0], [1.0, 1.0]], dtype=np.complex128)
CONJUGATOR_INVERSE = np.array([[1.0, -1.0], [-1.0, 2.0]], dtype=np.complex128)

Fixture = Union[LinCat, EvenModule, OddModule, HomotopyFamily]


def presented(
    name: str,
    objects: Iterable[str],
    morphisms: Iterable[Tuple[str, str, str]],
    table: Mapping[Tuple[str, str], Mapping[str, complex]],
    identities: Mapping[str, Mapping[str, complex]],
) -> LinCat:
    """Build a category from (name, src, dst) triples and {(g, f): {h: c}} tables."""
    return LinCat(
        objects=tuple(objects),
        morphisms=tuple(Morphism(*triple) for triple in morphisms),
        compose_table={key: LinComb.of(value) for key, value in table.items()},
        identity_decomp={
            obj: LinComb.of(value, obj, obj) for obj, value in identities.items()
        },
        name=name,
    )


def fix_pt() -> LinCat:
    """The category C: one object, End = C."""
    return presented(
        "FIX_PT", ["*"], [("1", "*", "*")], {("1", "1"): {"1": 1}}, {"*": {"1": 1}}
    )


def fix_dual() -> LinCat:
    """Dual numbers C[x]/(x^2)."""
    return presented(
        "FIX_DUAL",
        ["*"],
        [("1", "*", "*"), ("x", "*", "*")],
        {("1", "1"): {"1": 1}, ("1", "x"): {"x": 1}, ("x", "1"): {"x": 1}},
        {"*": {"1": 1}},
    )


def fix_nil() -> LinCat:
    """Two objects with u: X -> Y, v: Y -> X, u v = e and every other product zero."""
    return presented(
        "FIX_NIL",
        ["X", "Y"],
        [
            ("id_X", "X", "X"),
            ("id_Y", "Y", "Y"),
            ("u", "X", "Y"),
            ("v", "Y", "X"),
            ("e", "Y", "Y"),
        ],
        {
            ("id_X", "id_X"): {"id_X": 1},
            ("id_Y", "id_Y"): {"id_Y": 1},
            ("id_Y", "u"): {"u": 1},
            ("u", "id_X"): {"u": 1},
            ("id_X", "v"): {"v": 1},
            ("v", "id_Y"): {"v": 1},
            ("id_Y", "e"): {"e": 1},
            ("e", "id_Y"): {"e": 1},
            ("u", "v"): {"e": 1},
        },
        {"X": {"id_X": 1}, "Y": {"id_Y": 1}},
    )


def fix_proj() -> LinCat:
    """C x C: orthogonal idempotents p, q with p + q = 1."""
    return presented(
        "FIX_PROJ",
        ["*"],
        [("p", "*", "*"), ("q", "*", "*")],
        {("p", "p"): {"p": 1}, ("q", "q"): {"q": 1}},
        {"*": {"p": 1, "q": 1}},
    )


def fix_m2() -> LinCat:
    """The matrix units of M_2(C)."""
    units = [f"E{i}{j}" for i in (1, 2) for j in (1, 2)]
    table = {
        (f"E{i}{j}", f"E{j}{k}"): {f"E{i}{k}": 1}
        for i in (1, 2)
        for j in (1, 2)
        for k in (1, 2)
    }
    return presented(
        "FIX_M2",
        ["*"],
        [(name, "*", "*") for name in units],
        table,
        {"*": {"E11": 1, "E22": 1}},
    )


def matrix_unit(i: int, j: int, size: int = 2) -> Mat:
    unit = np.zeros((size, size), dtype=np.complex128)
    unit[i - 1, j - 1] = 1
    return unit


def fix_proj_even() -> EvenModule:
    """H(p) = diag(E11, 0), H(q) = diag(E22, I) on C^2 + C^2 with F the swap."""
    identity = np.eye(2, dtype=np.complex128)
    zero = np.zeros((2, 2), dtype=np.complex128)
    return EvenModule(
        cat=fix_proj(),
        symmetry={"*": swap_symmetry(2)},
        rep={
            "p": block_diag(matrix_unit(1, 1), zero),
            "q": block_diag(matrix_unit(2, 2), identity),
        },
        name="FIX_PROJ_EVEN",
        dims={"*": GradedDims(2, 2)},
    )


def fix_m2_even() -> EvenModule:
    """Standard representation against its conjugate by diag(1, 2)."""
    conjugator = np.diag([1.0, 2.0]).astype(np.complex128)
    inverse = np.linalg.inv(conjugator)
    rep = {}
    for i in (1, 2):
        for j in (1, 2):
            unit = matrix_unit(i, j)
            rep[f"E{i}{j}"] = block_diag(unit, conjugator @ unit @ inverse)
    return EvenModule(
        cat=fix_m2(),
        symmetry={"*": swap_symmetry(2)},
        rep=rep,
        name="FIX_M2_EVEN",
        dims={"*": GradedDims(2, 2)},
    )


def fix_m2_odd() -> OddModule:
    """Standard representation of M_2(C) with F = diag(1, -1)."""
    return OddModule(
        cat=fix_m2(),
        symmetry={"*": np.diag([1.0, -1.0]).astype(np.complex128)},
        rep={f"E{i}{j}": matrix_unit(i, j) for i in (1, 2) for j in (1, 2)},
        name="FIX_M2ODD",
        dims={"*": 2},
    )


def rotation(angle: float) -> Mat:
    cos, sin = np.cos(angle), np.sin(angle)
    return np.array([[cos, -sin], [sin, cos]], dtype=np.complex128)


def rotated_projection_sample(angle: float) -> Dict[str, Mat]:
    """Doubled FIX_PROJ sample with rho+(p) = R E11 R^-1 and constant rho-."""
    turn = rotation(angle)
    upper = turn @ matrix_unit(1, 1) @ turn.T
    identity = np.eye(2, dtype=np.complex128)
    return {
        "p": block_diag(upper, np.zeros((2, 2), dtype=np.complex128)),
        "q": block_diag(identity - upper, identity),
    }


def rotation_family(samples: int = ROTATION_SAMPLES) -> HomotopyFamily:
    """FIX_PROJ doubled, rotated by pi t / 2 on a uniform grid."""
    return HomotopyFamily.from_function(
        fix_proj(),
        {"*": 2},
        np.linspace(0.0, 1.0, samples),
        lambda t: rotated_projection_sample(np.pi * t / 2),
        name="FIX_ROTATION",
    )


def accelerated_rotation_family(samples: int = ROTATION_SAMPLES) -> HomotopyFamily:
    """As `rotation_family` with angle pi t^2 / 2."""
    return HomotopyFamily.from_function(
        fix_proj(),
        {"*": 2},
        np.linspace(0.0, 1.0, samples),
        lambda t: rotated_projection_sample(np.pi * t * t / 2),
        name="FIX_ROTATION_ACCEL",
    )


def conjugated_rotation_raw(
    samples: int = ROTATION_SAMPLES,
    Q: Mat = CONJUGATOR,
    P: Mat = CONJUGATOR_INVERSE,
) -> RawFamily:
    """Rotating rho+ against rho- = (E22, E11), with constant Q_t, P_t."""
    grid = tuple(float(t) for t in np.linspace(0.0, 1.0, samples))
    rho_plus = []
    for t in grid:
        upper = rotated_projection_sample(np.pi * t / 2)
        rho_plus.append({name: matrix[:2, :2] for name, matrix in upper.items()})
    return RawFamily(
        cat=fix_proj(),
        base_dims={"*": 2},
        grid=grid,
        rho_plus=rho_plus,
        rho_minus=[{"p": matrix_unit(2, 2), "q": matrix_unit(1, 1)} for _ in grid],
        Q=[{"*": Q} for _ in grid],
        P=[{"*": P} for _ in grid],
        name="FIX_ROTATION_QP",
    )


def conjugated_rotation_family(samples: int = ROTATION_SAMPLES) -> HomotopyFamily:
    return build_from_QP(conjugated_rotation_raw(samples))


FIXTURES: Dict[str, Callable[[], Fixture]] = {
    "FIX_PT": fix_pt,
    "FIX_DUAL": fix_dual,
    "FIX_NIL": fix_nil,
    "FIX_PROJ": fix_proj,
    "FIX_M2": fix_m2,
    "FIX_PROJ_EVEN": fix_proj_even,
    "FIX_M2_EVEN": fix_m2_even,
    "FIX_M2ODD": fix_m2_odd,
    "FIX_ROTATION": rotation_family,
    "FIX_ROTATION_ACCEL": accelerated_rotation_family,
    "FIX_ROTATION_QP": conjugated_rotation_family,
}


def fixture(name: str) -> Fixture:
    """Look up a shipped fixture by name."""
    try:
        return FIXTURES[name]()
    except KeyError:
        known = ", ".join(sorted(FIXTURES))
        raise KeyError(f"Unknown fixture {name}. Known fixtures: {known}") from None
