"""
Command-line surface.

Every command produces a Report; the process exits 0 when it passes, 1 when
a check fails and 2 when an input cannot be loaded.
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import structlog

from . import __version__
from .config import COMMANDS, OUTPUT_FORMATS, RunConfig, threads_from_env
from .core.cochain import class_solve, is_cyclic_cocycle
from .core.exceptions import CychernException
from .core.fredholm import (
    EvenModule,
    OddModule,
    chern_even,
    chern_odd,
    periodicity_check,
    summability_thresholds,
    validate_even,
    validate_odd,
)
from .core.homotopy import (
    HomotopyFamily,
    chern_path,
    integrate_invariance,
    leibniz_residual,
    sampled_summability,
    validate_family,
)
from .core.lincat import LinCat, ValidationReport, validate_category
from .fixtures import fixture
from .io.codec import (
    detect_kind,
    load,
    load_category,
    load_cochain,
    load_family,
    load_module,
    to_json,
    write_json,
)
from .io.exceptions import (
    EXIT_CHECK_FAILED,
    EXIT_LOAD_FAILED,
    EXIT_OK,
    LoadError,
    exit_code_for,
)
from .logging import configure_logging
from .report import Report
from .suite import run_suite

log = structlog.get_logger(__name__)

SUMMABILITY_EXPONENT = 1.0
OVERRIDABLE = (
    "tol",
    "cap",
    "out",
    "output_format",
    "seed",
    "m",
    "t1",
    "t2",
    "category",
)


def _record_validation(report: Report, result: ValidationReport) -> None:
    if result.ok:
        report.flag(f"{result.subject}.valid", True)
    for violation in result.violations:
        report.flag(f"{result.subject}.{violation.kind}", False, str(violation))


def cmd_validate(config: RunConfig) -> Report:
    report = Report(command="validate")
    tol = config.tolerances.validation
    for reference in config.inputs:
        kind = detect_kind(reference)
        value = load(reference, kind)
        if isinstance(value, LinCat):
            _record_validation(report, validate_category(value, tol))
        elif isinstance(value, EvenModule):
            _record_validation(report, validate_category(value.cat, tol))
            _record_validation(report, validate_even(value, tol))
        elif isinstance(value, OddModule):
            _record_validation(report, validate_category(value.cat, tol))
            _record_validation(report, validate_odd(value, tol))
        elif isinstance(value, HomotopyFamily):
            _record_validation(report, validate_family(value, tol))
        else:
            report.flag(f"{reference}.cochain_shape", True)
    return report


def _artifact_dir(config: RunConfig) -> Path:
    """Directory that emitted files, and category references inside them, live in."""
    return Path(config.out).resolve().parent if config.out else Path.cwd()


def cmd_chern(config: RunConfig) -> Report:
    report = Report(command="chern")
    mod = load_module(config.inputs[0])
    kind = "even" if isinstance(mod, EvenModule) else "odd"
    with report.timed("character"):
        if isinstance(mod, EvenModule):
            phi = chern_even(mod, config.m, config.cap)
        else:
            phi = chern_odd(mod, config.m, config.cap)
    status = is_cyclic_cocycle(phi, config.tolerances.cocycle)
    prefix = f"{mod.name}.phi{phi.degree}"
    report.check(f"{prefix}.cocycle", status.cocycle_residual, status.tolerance)
    report.check(f"{prefix}.cyclic", status.cyclic_residual, status.tolerance)
    report.artifacts["minimal_m"] = summability_thresholds(kind, SUMMABILITY_EXPONENT)
    if config.out is not None:
        write_json(to_json(phi, _artifact_dir(config)), config.out)
    else:
        report.artifacts["cochain"] = to_json(phi)
    return report


def cmd_periodicity(config: RunConfig) -> Report:
    report = Report(command="periodicity")
    mod = load_module(config.inputs[0])
    if not isinstance(mod, EvenModule):
        raise ValueError("periodicity needs an even module")
    tol = config.tolerances
    with report.timed("periodicity"):
        result = periodicity_check(mod, config.m, tol.periodicity, config.cap)
    where = f"worst chain {result.worst_chain}" if result.worst_chain else ""
    name = mod.name
    report.check(
        f"{name}.periodicity", result.identity_residual, result.tolerance, where
    )
    report.check(
        f"{name}.witness_cyclic", result.witness_cyclic, result.witness_tolerance
    )
    report.check(
        f"{name}.S_routes_agree", result.s_agreement, result.agreement_tolerance
    )
    return report


def _cochain_category(config: RunConfig) -> Optional[LinCat]:
    return load_category(config.category) if config.category else None


def cmd_cocycle(config: RunConfig) -> Report:
    report = Report(command="cocycle")
    phi = load_cochain(
        config.inputs[0], cat=_cochain_category(config), cap=config.cap
    )
    status = is_cyclic_cocycle(phi, config.tolerances.cocycle)
    report.check(f"phi{phi.degree}.cocycle", status.cocycle_residual, status.tolerance)
    report.check(f"phi{phi.degree}.cyclic", status.cyclic_residual, status.tolerance)
    return report


def cmd_class_solve(config: RunConfig) -> Report:
    report = Report(command="class-solve")
    target = load_cochain(
        config.inputs[0], cat=_cochain_category(config), cap=config.cap
    )
    tol = config.tolerances.class_relative
    solution = class_solve(target, tol)
    worst = solution.worst_chain(target)
    report.check(
        f"phi{target.degree}.coboundary",
        solution.relative_residual,
        tol,
        f"worst chain {worst}" if worst else "",
    )
    if solution.witness is not None:
        report.artifacts["witness"] = to_json(solution.witness, _artifact_dir(config))
    return report


def cmd_homotopy(config: RunConfig) -> Report:
    report = Report(command="homotopy")
    fam = load_family(config.inputs[0])
    tol = config.tolerances
    with report.timed("invariance"):
        result = integrate_invariance(
            fam,
            config.t1,
            config.t2,
            config.m,
            config.threads,
            tol.homotopy,
            config.cap,
        )
    where = f"worst chain {result.worst_chain}" if result.worst_chain else ""
    report.check(
        f"{fam.name}.transgression",
        result.transgression_residual,
        result.quadrature_tolerance,
        where,
    )
    report.check(
        f"{fam.name}.class_constant",
        result.class_solution.relative_residual,
        tol.homotopy,
    )
    with report.timed("path"):
        path = chern_path(fam, config.m, config.threads, config.cap)
    report.check(
        f"{fam.name}.path",
        path.max_residual,
        tol.homotopy,
        f"worst pair {path.worst_pair}",
    )
    report.artifacts["leibniz_residual"] = leibniz_residual(fam, config.t1)
    report.artifacts["schatten_norms"] = sampled_summability(fam, SUMMABILITY_EXPONENT)
    return report


def cmd_suite(config: RunConfig) -> Report:
    return run_suite(config.tolerances, config.seed, config.threads)


def cmd_fixture(config: RunConfig) -> Report:
    report = Report(command="fixture")
    for name in config.inputs:
        try:
            value = fixture(name)
        except KeyError as err:
            raise LoadError(f"fixture:{name}", str(err.args[0])) from err
        write_json(to_json(value), config.out)
        report.flag(f"{name}.emitted", True)
    return report


HANDLERS: Dict[str, Callable[[RunConfig], Report]] = {
    "validate": cmd_validate,
    "chern": cmd_chern,
    "periodicity": cmd_periodicity,
    "cocycle": cmd_cocycle,
    "class-solve": cmd_class_solve,
    "homotopy": cmd_homotopy,
    "suite": cmd_suite,
    "fixture": cmd_fixture,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="override every residual tolerance")
    common.add_argument("--cap", type=int, help="chain basis size limit")
    common.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS)
    common.add_argument("--out", help="write the artifact or report to this path")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--log-level", default="WARNING")
    common.add_argument("--log-json", action="store_true")
    common.add_argument(
        "--config", help="JSON run file; flags given here take precedence"
    )

    parser = argparse.ArgumentParser(prog="cychern", description=__doc__)
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", parents=[common], help="validate input files")
    validate.add_argument("inputs", nargs="+")

    chern = sub.add_parser("chern", parents=[common], help="emit a Chern character")
    chern.add_argument("inputs", nargs=1, metavar="MODULE")
    chern.add_argument("--m", type=int)

    periodicity = sub.add_parser(
        "periodicity", parents=[common], help="check periodicity"
    )
    periodicity.add_argument("inputs", nargs=1, metavar="MODULE")
    periodicity.add_argument("--m", type=int)

    for name, help_text in (
        ("cocycle", "test a cyclic cocycle"),
        ("class-solve", "solve b(w) = phi"),
    ):
        command = sub.add_parser(name, parents=[common], help=help_text)
        command.add_argument("inputs", nargs=1, metavar="COCHAIN")
        command.add_argument("--category", help="category reference for the cochain")

    homotopy = sub.add_parser(
        "homotopy", parents=[common], help="check homotopy invariance"
    )
    homotopy.add_argument("inputs", nargs=1, metavar="FAMILY")
    homotopy.add_argument("--m", type=int)
    homotopy.add_argument("--t1", type=float)
    homotopy.add_argument("--t2", type=float)

    sub.add_parser("suite", parents=[common], help="run the acceptance suite")

    fixture_parser = sub.add_parser(
        "fixture", parents=[common], help="dump a shipped fixture"
    )
    fixture_parser.add_argument("inputs", nargs=1, metavar="NAME")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        base = RunConfig.from_file(args.config)
    else:
        base = RunConfig(command=args.command)
    threads = args.threads
    if threads is None:
        threads = threads_from_env(base.threads)
    overrides = {
        "command": args.command,
        "inputs": list(getattr(args, "inputs", []) or base.inputs),
        "threads": threads,
    }
    for key in OVERRIDABLE:
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    return base.update(**overrides)


def emit(report: Report, config: RunConfig) -> None:
    # chern and fixture write their artifact to --out; the report goes to stdout
    out = None if config.command in ("chern", "fixture") else config.out
    if config.command == "fixture" and report.passed:
        return
    if config.output_format == "text":
        text = report.to_text() + "\n"
        if out is None:
            sys.stdout.write(text)
        else:
            Path(out).write_text(text, encoding="utf-8")
        return
    write_json(report.to_dict(), out)


def run(config: RunConfig) -> int:
    """Dispatch one command and return the process exit status."""
    if config.command not in COMMANDS:
        raise ValueError(f"Unknown command {config.command}")
    log.info("command_started", command=config.command, inputs=config.inputs)
    try:
        report = HANDLERS[config.command](config)
    except CychernException as err:
        log.error(
            "command_failed", command=config.command, error=err.msg, code=err.code
        )
        sys.stderr.write(f"cychern {config.command}: {err.msg}\n")
        return exit_code_for(err)
    emit(report, config)
    log.info("command_finished", command=config.command, passed=report.passed)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, args.log_json)
    try:
        config = config_from_args(args)
    except ValueError as err:
        sys.stderr.write(f"cychern: {err}\n")
        return EXIT_LOAD_FAILED
    try:
        return run(config)
    except ValueError as err:
        sys.stderr.write(f"cychern {config.command}: {err}\n")
        return EXIT_CHECK_FAILED


def entrypoint(argv: Optional[List[str]] = None) -> None:
    """Console script: run `main` and exit with its status."""
    try:
        status = main(argv)
    except KeyboardInterrupt:
        log.info("run_interrupted")
        status = EXIT_CHECK_FAILED
    except Exception as error:
        log.error("fatal_error", error=str(error))
        status = EXIT_CHECK_FAILED
    sys.exit(status)


if __name__ == "__main__":
    entrypoint()
