"""Verification reports: per-check records, golden comparisons and timings."""

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List

from .io.schemas import CheckRecordModel, GoldenModel, ReportFile


@dataclass
class CheckRecord:
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    @classmethod
    def bound(
        cls, name: str, residual: float, tolerance: float, detail: str = ""
    ) -> "CheckRecord":
        """A record that passes when residual <= tolerance."""
        passed = residual <= tolerance
        return cls(name, float(residual), float(tolerance), passed, detail)


@dataclass
class GoldenComparison:
    name: str
    expected: complex
    actual: complex
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.actual - self.expected) <= self.tolerance


@dataclass
class Report:
    """Outcome of one command; passes iff every record and golden passes."""

    command: str
    records: List[CheckRecord] = field(default_factory=list)
    goldens: List[GoldenComparison] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    artifacts: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        records = all(r.passed for r in self.records)
        return records and all(g.passed for g in self.goldens)

    def check(
        self, name: str, residual: float, tolerance: float, detail: str = ""
    ) -> CheckRecord:
        record = CheckRecord.bound(name, residual, tolerance, detail)
        self.records.append(record)
        return record

    def flag(self, name: str, passed: bool, detail: str = "") -> CheckRecord:
        record = CheckRecord(name, 0.0, 0.0, passed, detail)
        self.records.append(record)
        return record

    def golden(
        self, name: str, expected: complex, actual: complex, tolerance: float
    ) -> None:
        self.goldens.append(
            GoldenComparison(name, complex(expected), complex(actual), tolerance)
        )

    def extend(self, other: "Report") -> None:
        self.records.extend(other.records)
        self.goldens.extend(other.goldens)
        self.timings.update(other.timings)

    @contextmanager
    def timed(self, label: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[label] = time.perf_counter() - start

    def to_dict(self) -> Dict[str, Any]:
        model = ReportFile(
            command=self.command,
            passed=self.passed,
            records=[
                CheckRecordModel(
                    check=r.name,
                    residual=r.residual,
                    tolerance=r.tolerance,
                    passed=r.passed,
                    detail=r.detail,
                )
                for r in self.records
            ],
            goldens=[
                GoldenModel(
                    name=g.name,
                    expected=(g.expected.real, g.expected.imag),
                    actual=(g.actual.real, g.actual.imag),
                    tolerance=g.tolerance,
                    passed=g.passed,
                )
                for g in self.goldens
            ],
            timings=dict(self.timings),
            artifacts=dict(self.artifacts),
        )
        return model.model_dump(by_alias=True)

    def to_text(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'}"]
        for r in self.records:
            mark = "ok  " if r.passed else "FAIL"
            line = (
                f"  [{mark}] {r.name}: residual {r.residual:.3e}"
                f" (tol {r.tolerance:.1e})"
            )
            if r.detail:
                line = f"{line} {r.detail}"
            lines.append(line)
        for g in self.goldens:
            mark = "ok  " if g.passed else "FAIL"
            lines.append(
                f"  [{mark}] {g.name}: {g.actual:.12g} (expected {g.expected:.12g})"
            )
        for label, seconds in self.timings.items():
            lines.append(f"  time {label}: {seconds:.3f}s")
        return "\n".join(lines)
