"""
pydantic models of the JSON artifacts.

Complex numbers are two-element arrays [re, im]; matrices are lists of
rows of such pairs.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

ComplexPair = Tuple[float, float]
MatrixData = List[List[ComplexPair]]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MorphismEntry(StrictModel):
    name: str
    src: str
    dst: str


class Term(StrictModel):
    mor: str
    coeff: ComplexPair


class ComposeEntry(StrictModel):
    g: str
    f: str
    result: List[Term]


class CategoryFile(StrictModel):
    """Objects, hom bases, structure constants and identity decompositions."""

    name: str = "category"
    objects: List[str]
    morphisms: List[MorphismEntry]
    compose: List[ComposeEntry] = Field(default_factory=list)
    identities: Dict[str, List[Term]]

    @model_validator(mode="after")
    def check_references(self) -> "CategoryFile":
        names = {entry.name for entry in self.morphisms}
        for entry in self.compose:
            for name in [entry.g, entry.f] + [term.mor for term in entry.result]:
                if name not in names:
                    raise ValueError(
                        f"compose entry ({entry.g}, {entry.f}) names unknown {name}"
                    )
        for obj in self.objects:
            if obj not in self.identities:
                raise ValueError(f"no identity given for object {obj}")
        return self


class GradedDimsEntry(StrictModel):
    plus: int = Field(ge=0)
    minus: int = Field(ge=0)

    @model_validator(mode="after")
    def check_nonempty(self) -> "GradedDimsEntry":
        if self.plus + self.minus < 1:
            raise ValueError("graded dimensions must have plus + minus >= 1")
        return self


class PlainDimsEntry(StrictModel):
    dim: int = Field(ge=1)


class ModuleFile(StrictModel):
    category: str
    kind: Literal["even", "odd"]
    name: str = "module"
    dims: Dict[str, Union[GradedDimsEntry, PlainDimsEntry]]
    F: Dict[str, MatrixData]
    H: Dict[str, MatrixData]

    @model_validator(mode="after")
    def check_dims_kind(self) -> "ModuleFile":
        wanted = GradedDimsEntry if self.kind == "even" else PlainDimsEntry
        for obj, entry in self.dims.items():
            if not isinstance(entry, wanted):
                raise ValueError(f"dims of {obj} do not match a {self.kind} module")
        return self


class SampleEntry(StrictModel):
    t: float
    H: Dict[str, MatrixData]


class FamilyFile(StrictModel):
    """
    Sampled doubled family.

    With Q and P present, H holds the unconjugated diag(rho+, rho-) and Q, P
    are given per sample and object.
    """

    category: str
    name: str = "family"
    dims: Dict[str, int]
    grid: List[float]
    breakpoints: List[float] = Field(default_factory=list)
    samples: List[SampleEntry]
    Q: Optional[List[Dict[str, MatrixData]]] = None
    P: Optional[List[Dict[str, MatrixData]]] = None

    @model_validator(mode="after")
    def check_alignment(self) -> "FamilyFile":
        if len(self.samples) != len(self.grid):
            raise ValueError(
                f"{len(self.samples)} samples for {len(self.grid)} grid points"
            )
        for t, sample in zip(self.grid, self.samples):
            if sample.t != t:
                raise ValueError(
                    f"sample at t={sample.t} does not match grid point {t}"
                )
        if (self.Q is None) != (self.P is None):
            raise ValueError("Q and P must be given together")
        if self.Q is not None and self.P is not None:
            if len(self.Q) != len(self.grid) or len(self.P) != len(self.grid):
                raise ValueError("Q and P need one entry per grid point")
        return self


class CochainFile(StrictModel):
    category: Optional[str] = None
    degree: int = Field(ge=0)
    values: List[ComplexPair]
    chains: Optional[List[List[str]]] = None


class CheckRecordModel(StrictModel):
    check: str
    residual: float
    tolerance: float
    passed: bool = Field(alias="pass")
    detail: str = ""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class GoldenModel(StrictModel):
    name: str
    expected: ComplexPair
    actual: ComplexPair
    tolerance: float
    passed: bool = Field(alias="pass")

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class ReportFile(StrictModel):
    command: str
    passed: bool = Field(alias="pass")
    records: List[CheckRecordModel]
    goldens: List[GoldenModel] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    artifacts: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


SCHEMAS = {
    "category": CategoryFile,
    "module": ModuleFile,
    "family": FamilyFile,
    "cochain": CochainFile,
}
