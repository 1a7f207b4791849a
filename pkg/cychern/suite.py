"""
The acceptance run: every structural identity and golden value checked in
one report.
"""

from typing import Callable, List, Tuple

import numpy as np
import structlog

from .config import Tolerances
from .core.cochain import (
    Cochain,
    cochain_complex,
    cyclic_basis,
    cyclic_cohomology_dims,
    is_cyclic_cocycle,
    op_b,
    preimage_under_B,
)
from .core.fredholm import (
    FredholmModule,
    OperatorWord,
    chern_even,
    chern_odd,
    periodicity_check,
    random_word,
    supertrace,
    trs_odd,
    word_differential,
    word_product,
)
from .core.homotopy import integrate_invariance, leibniz_refinement
from .core.lincat import LinCat
from .core.omega import admissible_s_on_B_inputs, check_s_on_B, periodicity_S
from .fixtures import (
    accelerated_rotation_family,
    fix_m2_even,
    fix_m2_odd,
    fix_nil,
    fix_proj,
    fix_proj_even,
    fix_pt,
    rotation_family,
)
from .report import Report

log = structlog.get_logger(__name__)

IDENTITY_SAMPLES = 100
IMAGE_SAMPLES = 50
WORD_PAIRS = 100
S_ON_B_SAMPLES = 20
MAX_IDENTITY_DEGREE = 4
MAX_IMAGE_DEGREE = 3
REFINEMENT_SIZES = (33, 65, 129)
REFINEMENT_POINT = 0.5

EVEN_GOLDENS: List[Tuple[Tuple[str, ...], complex]] = [
    (("p",), 1),
    (("q",), -1),
    (("p", "p", "p"), -1),
    (("p", "q", "p"), 1),
]
ODD_GOLDENS: List[Tuple[Tuple[str, ...], complex]] = [
    (("E12", "E21"), -2),
    (("E21", "E12"), 2),
]
PT_S_GOLDEN = 2


def _complex_normal(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _relative(residual: np.ndarray, inputs: np.ndarray) -> float:
    worst = np.max(np.abs(residual), axis=0) / (1 + np.max(np.abs(inputs), axis=0))
    return float(np.max(worst)) if worst.size else 0.0


def check_cochain_identities(
    report: Report, cat: LinCat, rng: np.random.Generator, tol: Tolerances
) -> None:
    """b^2, b'^2, bA - Ab', bB + Bb and the B0 homotopy on random cochains."""
    cx = cochain_complex(cat)
    op = cx.operator
    for n in range(MAX_IDENTITY_DEGREE + 1):
        size = cx.size(n)
        phi = _complex_normal(rng, (size, IDENTITY_SAMPLES))
        if n == 0:
            b_B = b_prime_B0 = np.zeros_like(phi)
        else:
            b_B = op("b", n - 1) @ op("B", n) @ phi
            b_prime_B0 = op("bprime", n - 1) @ op("B0", n) @ phi
        checks = {
            "b^2": op("b", n + 1) @ op("b", n) @ phi,
            "b'^2": op("bprime", n + 1) @ op("bprime", n) @ phi,
            "bA-Ab'": op("b", n) @ op("A", n) @ phi
            - op("A", n + 1) @ op("bprime", n) @ phi,
            "bB+Bb": b_B + op("B", n + 1) @ op("b", n) @ phi,
            "B0b+b'B0": op("B0", n + 1) @ op("b", n) @ phi
            + b_prime_B0
            - (phi - op("lambda", n) @ phi),
        }
        for label, residual in checks.items():
            name = f"{cat.name}.{label}.deg{n}"
            report.check(name, _relative(residual, phi), tol.cocycle)


def check_cyclic_dims_of_c(report: Report) -> None:
    dims = cyclic_cohomology_dims(fix_pt(), 4)
    expected = [1, 0, 1, 0, 1]
    mismatch = float(sum(abs(a - b) for a, b in zip(dims, expected)))
    report.check("FIX_PT.cyclic_dims", mismatch, 0.0, f"dims {dims}")


def check_image_of_B(report: Report, rng: np.random.Generator, tol: Tolerances) -> None:
    cat = fix_nil()
    cx = cochain_complex(cat)
    for n in range(MAX_IMAGE_DEGREE + 1):
        basis = cyclic_basis(cx, n)
        worst = 0.0
        for _ in range(IMAGE_SAMPLES if basis.shape[1] else 0):
            coefficients = _complex_normal(rng, (basis.shape[1],))
            phi = Cochain(cx, n, basis @ coefficients)
            psi = preimage_under_B(phi)
            worst = max(worst, (op_b(psi) - phi.scale(2 * (n + 1))).norm())
        report.check(f"FIX_NIL.B_image.deg{n}", worst, tol.preimage)


def check_even_goldens(report: Report, tol: Tolerances) -> None:
    mod = fix_proj_even()
    characters = {m: chern_even(mod, m) for m in (0, 1)}
    for chain, expected in EVEN_GOLDENS:
        phi = characters[(len(chain) - 1) // 2]
        name = f"FIX_PROJ.phi{len(chain) - 1}{chain}"
        report.golden(name, expected, phi.at(*chain), tol.golden)
    for m, phi in characters.items():
        status = is_cyclic_cocycle(phi)
        prefix = f"FIX_PROJ.phi{2 * m}"
        report.check(f"{prefix}.cocycle", status.cocycle_residual, tol.cocycle)
        report.check(f"{prefix}.cyclic", status.cyclic_residual, tol.cocycle)


def check_periodicity(report: Report, tol: Tolerances) -> None:
    for mod in (fix_proj_even(), fix_m2_even()):
        result = periodicity_check(mod, 0, tol.periodicity)
        where = f" worst chain {result.worst_chain}" if result.worst_chain else ""
        report.check(
            f"{mod.name}.periodicity", result.identity_residual, tol.periodicity, where
        )
        report.check(f"{mod.name}.witness_cyclic", result.witness_cyclic, tol.cocycle)
        report.check(f"{mod.name}.S_routes_agree", result.s_agreement, tol.cocycle)


def check_odd_goldens(
    report: Report, rng: np.random.Generator, tol: Tolerances
) -> None:
    mod = fix_m2_odd()
    phi = chern_odd(mod, 1)
    for chain, expected in ODD_GOLDENS:
        report.golden(f"FIX_M2ODD.phi1{chain}", expected, phi.at(*chain), tol.golden)
    worst = 0.0
    for k in range(IDENTITY_SAMPLES):
        word = random_word(mod, 2 * (k % 3), "*", "*", rng)
        worst = max(worst, abs(trs_odd(mod, word)))
    report.check("FIX_M2ODD.trs_even_words", worst, tol.golden)
    status = is_cyclic_cocycle(phi)
    report.check("FIX_M2ODD.phi1.cocycle", status.cocycle_residual, tol.cocycle)
    report.check("FIX_M2ODD.phi1.cyclic", status.cyclic_residual, tol.cocycle)


def _graded_trace_laws(
    report: Report,
    mod: FredholmModule,
    trace: Callable[[OperatorWord], complex],
    total_degree: int,
    rng: np.random.Generator,
    tol: Tolerances,
) -> None:
    closure = 0.0
    commutativity = 0.0
    for _ in range(WORD_PAIRS):
        i = int(rng.integers(0, total_degree + 1))
        j = total_degree - i
        first = random_word(mod, i, "*", "*", rng)
        second = random_word(mod, j, "*", "*", rng)
        exchanged = trace(word_product(first, second)) - (-1) ** (i * j) * trace(
            word_product(second, first)
        )
        commutativity = max(commutativity, abs(exchanged))
        lower = random_word(mod, total_degree - 1, "*", "*", rng)
        closure = max(closure, abs(trace(word_differential(mod, lower))))
    report.check(f"{mod.name}.trace_closed", closure, tol.cocycle)
    report.check(f"{mod.name}.trace_graded", commutativity, tol.cocycle)


def check_graded_trace_laws(
    report: Report, rng: np.random.Generator, tol: Tolerances
) -> None:
    even = fix_proj_even()
    odd = fix_m2_odd()
    _graded_trace_laws(report, even, lambda w: supertrace(even, w), 2, rng, tol)
    _graded_trace_laws(report, odd, lambda w: trs_odd(odd, w), 1, rng, tol)


def check_homotopy(report: Report, tol: Tolerances, threads: int = 1) -> None:
    result = integrate_invariance(rotation_family(), 0.0, 1.0, 0, threads=threads)
    where = f" worst chain {result.worst_chain}" if result.worst_chain else ""
    report.check(
        "FIX_ROTATION.transgression",
        result.transgression_residual,
        tol.homotopy,
        where,
    )
    report.check(
        "FIX_ROTATION.class_constant",
        result.class_solution.relative_residual,
        tol.homotopy,
    )
    trend = leibniz_refinement(
        accelerated_rotation_family, REFINEMENT_SIZES, REFINEMENT_POINT
    )
    for sizes, ratio in zip(zip(trend.sizes, trend.sizes[1:]), trend.ratios):
        report.flag(
            f"FIX_ROTATION_ACCEL.leibniz_ratio.{sizes[0]}-{sizes[1]}",
            ratio >= tol.leibniz_ratio,
            f"ratio {ratio:.3f} (minimum {tol.leibniz_ratio})",
        )


def check_s_normalization(report: Report, tol: Tolerances) -> None:
    cx = cochain_complex(fix_pt())
    generator = Cochain.from_mapping(cx, 2, {("1", "1", "1"): 1})
    image = periodicity_S(generator)
    value = image.at("1", "1", "1", "1", "1")
    report.golden("FIX_PT.S(psi)(1,1,1,1,1)", PT_S_GOLDEN, value, tol.golden)


def check_s_on_B_samples(
    report: Report, rng: np.random.Generator, tol: Tolerances
) -> None:
    cx = cochain_complex(fix_pt())
    for n in (2, 3):
        inputs = admissible_s_on_B_inputs(cx, n)
        worst_cocycle = 0.0
        worst_class = 0.0
        for _ in range(S_ON_B_SAMPLES):
            coefficients = _complex_normal(rng, (inputs.shape[1],))
            result = check_s_on_B(Cochain(cx, n, inputs @ coefficients))
            worst_cocycle = max(
                worst_cocycle,
                result.b_psi_cocycle_residual,
                result.b_psi_cyclic_residual,
            )
            worst_class = max(worst_class, result.solution.relative_residual)
        report.check(f"FIX_PT.S_on_B.deg{n}.cocycle", worst_cocycle, tol.cocycle)
        report.check(f"FIX_PT.S_on_B.deg{n}.class", worst_class, tol.class_relative)


def run_suite(tol: Tolerances, seed: int = 0, threads: int = 1) -> Report:
    """Run every acceptance check with a seeded generator."""
    rng = np.random.default_rng(seed)
    report = Report(command="suite")
    with report.timed("cochain_identities"):
        for cat in (fix_nil(), fix_proj()):
            check_cochain_identities(report, cat, rng, tol)
    with report.timed("cyclic_dims"):
        check_cyclic_dims_of_c(report)
    with report.timed("image_of_B"):
        check_image_of_B(report, rng, tol)
    with report.timed("even_goldens"):
        check_even_goldens(report, tol)
    with report.timed("periodicity"):
        check_periodicity(report, tol)
    with report.timed("odd_goldens"):
        check_odd_goldens(report, rng, tol)
    with report.timed("graded_trace"):
        check_graded_trace_laws(report, rng, tol)
    with report.timed("homotopy"):
        check_homotopy(report, tol, threads)
    with report.timed("S_normalization"):
        check_s_normalization(report, tol)
    with report.timed("S_on_B"):
        check_s_on_B_samples(report, rng, tol)
    log.info("suite_finished", passed=report.passed, records=len(report.records))
    return report
