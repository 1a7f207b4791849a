"""
Configuration management for cychern runs.

This module provides type-safe run configuration and the numerical
tolerances shared by every check, with validation.
"""

import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

THREADS_ENV = "CYCHERN_THREADS"

COMMANDS = (
    "validate",
    "chern",
    "periodicity",
    "cocycle",
    "class-solve",
    "homotopy",
    "suite",
    "fixture",
)
OUTPUT_FORMATS = ("json", "text")


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used by the checks; all residuals are sup-norms unless noted."""

    cocycle: float = 1e-10
    class_relative: float = 1e-8
    periodicity: float = 1e-9
    preimage: float = 1e-9
    homotopy: float = 1e-6
    leibniz_ratio: float = 3.5
    coalesce: float = 1e-14
    validation: float = 1e-10
    golden: float = 1e-12

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(
                    f"Invalid tolerance {name}: {value}. Must be positive."
                )

    def scaled(self, override: Optional[float]) -> "Tolerances":
        """Replace every residual threshold by an explicit override."""
        if override is None:
            return self
        return replace(
            self,
            cocycle=override,
            class_relative=override,
            periodicity=override,
            preimage=override,
            homotopy=override,
            validation=override,
            golden=override,
        )


TOLERANCES = Tolerances()


def threads_from_env(default: int = 1) -> int:
    """Worker count from CYCHERN_THREADS."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return default
    try:
        threads = int(raw)
    except ValueError as err:
        raise ValueError(
            f"Invalid {THREADS_ENV}: {raw!r}. Must be an integer."
        ) from err
    if threads < 1:
        raise ValueError(f"Invalid {THREADS_ENV}: {threads}. Must be at least 1.")
    return threads


@dataclass
class RunConfig:
    """Configuration of a single command-line run."""

    command: str = "suite"
    inputs: List[str] = field(default_factory=list)
    degree: Optional[int] = None
    m: int = 0
    tol: Optional[float] = None
    cap: int = 10**6
    out: Optional[str] = None
    output_format: str = "json"
    threads: int = 1
    seed: int = 0
    t1: float = 0.0
    t2: float = 1.0
    category: Optional[str] = None

    def __post_init__(self) -> None:
        """Validate configuration after initialization."""
        if self.command not in COMMANDS:
            known = ", ".join(COMMANDS)
            raise ValueError(
                f"Invalid command: {self.command}. Must be one of {known}."
            )
        if self.tol is not None and not self.tol > 0:
            raise ValueError(f"Invalid tol: {self.tol}. Must be positive.")
        if not isinstance(self.cap, int) or self.cap < 1:
            raise ValueError(f"Invalid cap: {self.cap}. Must be a positive integer.")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(
                f"Invalid output_format: {self.output_format}. Must be json or text."
            )
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ValueError(f"Invalid threads: {self.threads}. Must be at least 1.")
        if self.m < 0:
            raise ValueError(f"Invalid m: {self.m}. Must be non-negative.")
        if self.degree is not None and self.degree < 0:
            raise ValueError(f"Invalid degree: {self.degree}. Must be non-negative.")
        if not 0.0 <= self.t1 < self.t2 <= 1.0:
            raise ValueError(
                f"Invalid window [{self.t1}, {self.t2}]. Need 0 <= t1 < t2 <= 1."
            )

    @property
    def tolerances(self) -> Tolerances:
        return TOLERANCES.scaled(self.tol)

    @classmethod
    def from_file(cls, filepath: str) -> "RunConfig":
        """Load configuration from JSON file."""
        if not filepath or not filepath.strip():
            raise ValueError("Filepath must be a non-empty string")

        try:
            data = json.loads(Path(filepath).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ValueError(f"Failed to load config from {filepath}: {err}") from err

        defaults = cls()
        return cls(
            command=data.get("command", defaults.command),
            inputs=list(data.get("inputs", defaults.inputs)),
            degree=data.get("degree", defaults.degree),
            m=data.get("m", defaults.m),
            tol=data.get("tol", defaults.tol),
            cap=data.get("cap", defaults.cap),
            out=data.get("out", defaults.out),
            output_format=data.get("outputFormat", defaults.output_format),
            threads=data.get("threads", threads_from_env(defaults.threads)),
            seed=data.get("seed", defaults.seed),
            t1=data.get("t1", defaults.t1),
            t2=data.get("t2", defaults.t2),
            category=data.get("category", defaults.category),
        )

    def update(self, **kwargs: Union[str, int, float, List[str], None]) -> "RunConfig":
        """Create a copy with updated values."""
        current = asdict(self)
        current.update(kwargs)
        return RunConfig(**current)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dict for serialization."""
        return {
            "command": self.command,
            "inputs": list(self.inputs),
            "degree": self.degree,
            "m": self.m,
            "tol": self.tol,
            "cap": self.cap,
            "out": self.out,
            "outputFormat": self.output_format,
            "threads": self.threads,
            "seed": self.seed,
            "t1": self.t1,
            "t2": self.t2,
            "category": self.category,
        }
