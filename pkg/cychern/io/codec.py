"""
Loading and emission of categories, modules, families and cochains.

File references are either paths (relative references inside a file are
resolved against that file's directory) or `fixture:NAME`.
"""

import json
import os
import sys
from pathlib import Path
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    Mapping,
    Optional,
    Tuple,
    Type,
    TypeVar,
    Union,
)

import numpy as np
import structlog
from pydantic import BaseModel, ValidationError

from .. import fixtures
from ..core.cochain import Cochain, cochain_complex
from ..core.fredholm import EvenModule, OddModule
from ..core.homotopy import HomotopyFamily, RawFamily, build_from_QP
from ..core.lincat import DEFAULT_CHAIN_CAP, LinCat, LinComb, Morphism
from ..core.numkernel import GradedDims, Mat, block_diag
from .exceptions import LoadError, SchemaError, ShapeError
from .schemas import (
    SCHEMAS,
    CategoryFile,
    CochainFile,
    ComplexPair,
    FamilyFile,
    GradedDimsEntry,
    MatrixData,
    ModuleFile,
    Term,
)

log = structlog.get_logger(__name__)

FIXTURE_PREFIX = "fixture:"
KINDS = tuple(SCHEMAS)

Model = TypeVar("Model", bound=BaseModel)
Loaded = Union[LinCat, EvenModule, OddModule, HomotopyFamily, Cochain]


def read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise LoadError(str(path), f"cannot read file: {err.strerror or err}") from err
    except json.JSONDecodeError as err:
        raise SchemaError(
            str(path), f"line {err.lineno}, column {err.colno}", err.msg
        ) from err


def parse(model: Type[Model], data: Any, path: str) -> Model:
    """Validate raw JSON against a schema; the first error becomes a SchemaError."""
    try:
        return model.model_validate(data)
    except ValidationError as err:
        first = err.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise SchemaError(path, location, first["msg"]) from err


def to_complex(pair: ComplexPair) -> complex:
    return complex(pair[0], pair[1])


def to_matrix(data: MatrixData, path: str, name: str, expected: Tuple[int, int]) -> Mat:
    widths = {len(row) for row in data}
    if len(widths) > 1:
        raise SchemaError(path, name, "matrix rows have different lengths")
    rows, cols = len(data), (widths.pop() if widths else 0)
    if (rows, cols) != expected:
        raise ShapeError(path, name, expected, (rows, cols))
    matrix = np.zeros(expected, dtype=np.complex128)
    for i, row in enumerate(data):
        for j, pair in enumerate(row):
            matrix[i, j] = to_complex(pair)
    return matrix


def _lincomb(terms: Iterable[Term]) -> Dict[str, complex]:
    combined: Dict[str, complex] = {}
    for term in terms:
        combined[term.mor] = combined.get(term.mor, 0j) + to_complex(term.coeff)
    return combined


def _split(
    reference: str, base: Optional[Path]
) -> Tuple[Optional[str], Optional[Path]]:
    if reference.startswith(FIXTURE_PREFIX):
        return reference[len(FIXTURE_PREFIX) :], None
    path = Path(reference)
    if base is not None and not path.is_absolute():
        path = base / path
    return None, path


def _fixture(name: str, expected: Tuple[type, ...], reference: str) -> Any:
    try:
        value = fixtures.fixture(name)
    except KeyError as err:
        raise LoadError(reference, str(err.args[0])) from err
    if not isinstance(value, expected):
        raise LoadError(reference, f"fixture {name} is a {type(value).__name__}")
    return value


def category_from_file(
    data: CategoryFile, source: Optional[str] = None
) -> LinCat:
    table = {
        (entry.g, entry.f): LinComb.of(_lincomb(entry.result))
        for entry in data.compose
    }
    return LinCat(
        objects=tuple(data.objects),
        morphisms=tuple(Morphism(m.name, m.src, m.dst) for m in data.morphisms),
        compose_table=table,
        identity_decomp={
            obj: LinComb.of(_lincomb(terms), obj, obj)
            for obj, terms in data.identities.items()
        },
        name=data.name,
        source=source,
    )


def load_category(reference: str, base: Optional[Path] = None) -> LinCat:
    name, path = _split(reference, base)
    if name is not None:
        return _fixture(name, (LinCat,), reference)
    assert path is not None
    data = parse(CategoryFile, read_json(path), str(path))
    cat = category_from_file(data, source=str(path.resolve()))
    log.debug("category_loaded", path=str(path), category=cat.name)
    return cat


def load_module(
    reference: str, base: Optional[Path] = None
) -> Union[EvenModule, OddModule]:
    name, path = _split(reference, base)
    if name is not None:
        return _fixture(name, (EvenModule, OddModule), reference)
    assert path is not None
    data = parse(ModuleFile, read_json(path), str(path))
    cat = load_category(data.category, path.parent)
    where = str(path)

    dims: Dict[str, int] = {}
    graded: Dict[str, GradedDims] = {}
    plain: Dict[str, int] = {}
    for obj in cat.objects:
        if obj not in data.dims:
            raise SchemaError(where, f"dims.{obj}", "missing dimensions")
        entry = data.dims[obj]
        if isinstance(entry, GradedDimsEntry):
            graded[obj] = GradedDims(entry.plus, entry.minus)
            dims[obj] = graded[obj].total
        else:
            plain[obj] = entry.dim
            dims[obj] = entry.dim

    symmetry = {}
    for obj in cat.objects:
        if obj not in data.F:
            raise SchemaError(where, f"F.{obj}", "missing symmetry")
        shape = (dims[obj], dims[obj])
        symmetry[obj] = to_matrix(data.F[obj], where, f"F.{obj}", shape)
    known = {morphism.name for morphism in cat.morphisms}
    for key in data.H:
        if key not in known:
            raise SchemaError(where, f"H.{key}", "unknown morphism")
    rep = {}
    for morphism in cat.morphisms:
        if morphism.name not in data.H:
            raise SchemaError(where, f"H.{morphism.name}", "missing matrix")
        rep[morphism.name] = to_matrix(
            data.H[morphism.name],
            where,
            morphism.name,
            (dims[morphism.dst], dims[morphism.src]),
        )
    if data.kind == "even":
        return EvenModule(
            cat=cat, symmetry=symmetry, rep=rep, name=data.name, dims=graded
        )
    return OddModule(cat=cat, symmetry=symmetry, rep=rep, name=data.name, dims=plain)


def load_family(reference: str, base: Optional[Path] = None) -> HomotopyFamily:
    name, path = _split(reference, base)
    if name is not None:
        return _fixture(name, (HomotopyFamily,), reference)
    assert path is not None
    data = parse(FamilyFile, read_json(path), str(path))
    cat = load_category(data.category, path.parent)
    where = str(path)
    for obj in cat.objects:
        if obj not in data.dims:
            raise SchemaError(where, f"dims.{obj}", "missing dimension")

    samples: List[Dict[str, Mat]] = []
    for k, sample in enumerate(data.samples):
        matrices = {}
        for morphism in cat.morphisms:
            if morphism.name not in sample.H:
                location = f"samples.{k}.H.{morphism.name}"
                raise SchemaError(where, location, "missing matrix")
            shape = (2 * data.dims[morphism.dst], 2 * data.dims[morphism.src])
            matrices[morphism.name] = to_matrix(
                sample.H[morphism.name],
                where,
                f"{morphism.name} at t={sample.t}",
                shape,
            )
        samples.append(matrices)

    if data.Q is None or data.P is None:
        try:
            return HomotopyFamily(
                cat=cat,
                base_dims=dict(data.dims),
                grid=tuple(data.grid),
                samples=samples,
                breakpoints=tuple(data.breakpoints),
                name=data.name,
            )
        except ValueError as err:
            raise SchemaError(where, "grid", str(err)) from err

    def square(
        entries: List[Dict[str, MatrixData]], label: str
    ) -> List[Dict[str, Mat]]:
        result = []
        for k, entry in enumerate(entries):
            matrices = {}
            for obj, d in data.dims.items():
                if obj not in entry:
                    raise SchemaError(where, f"{label}.{k}.{obj}", "missing matrix")
                location = f"{label}.{k}.{obj}"
                matrices[obj] = to_matrix(entry[obj], where, location, (d, d))
            result.append(matrices)
        return result

    plus: List[Dict[str, Mat]] = []
    minus: List[Dict[str, Mat]] = []
    for sample in samples:
        plus.append({})
        minus.append({})
        for morphism in cat.morphisms:
            rows, cols = data.dims[morphism.dst], data.dims[morphism.src]
            matrix = sample[morphism.name]
            plus[-1][morphism.name] = matrix[:rows, :cols]
            minus[-1][morphism.name] = matrix[rows:, cols:]
    raw = RawFamily(
        cat=cat,
        base_dims=dict(data.dims),
        grid=tuple(data.grid),
        rho_plus=plus,
        rho_minus=minus,
        Q=square(data.Q, "Q"),
        P=square(data.P, "P"),
        breakpoints=tuple(data.breakpoints),
        name=data.name,
    )
    try:
        return build_from_QP(raw)
    except ValueError as err:
        raise SchemaError(where, "grid", str(err)) from err


def load_cochain(
    reference: str,
    base: Optional[Path] = None,
    cat: Optional[LinCat] = None,
    cap: int = DEFAULT_CHAIN_CAP,
) -> Cochain:
    _, path = _split(reference, base)
    if path is None:
        raise LoadError(reference, "cochains are not shipped as fixtures")
    data = parse(CochainFile, read_json(path), str(path))
    if cat is None:
        if data.category is None:
            raise SchemaError(str(path), "category", "no category given")
        cat = load_category(data.category, path.parent)
    cx = cochain_complex(cat, cap)
    expected = cx.size(data.degree)
    if len(data.values) != expected:
        raise ShapeError(str(path), "values", (expected,), (len(data.values),))
    if data.chains is not None:
        listed = [tuple(chain) for chain in data.chains]
        if listed != cx.chains(data.degree):
            raise SchemaError(
                str(path), "chains", "chain order differs from enumeration"
            )
    values = np.array([to_complex(pair) for pair in data.values], dtype=np.complex128)
    return Cochain(cx, data.degree, values)


LOADERS = {
    "category": load_category,
    "module": load_module,
    "family": load_family,
    "cochain": load_cochain,
}


def detect_kind(reference: str) -> str:
    """Infer the file kind from its top-level keys or from the fixture type."""
    name, path = _split(reference, None)
    if name is not None:
        kinds = (LinCat, EvenModule, OddModule, HomotopyFamily)
        value = _fixture(name, kinds, reference)
        if isinstance(value, LinCat):
            return "category"
        if isinstance(value, HomotopyFamily):
            return "family"
        return "module"
    assert path is not None
    data = read_json(path)
    if not isinstance(data, dict):
        raise SchemaError(str(path), "", "top level must be an object")
    if "samples" in data:
        return "family"
    if "kind" in data:
        return "module"
    if "morphisms" in data:
        return "category"
    if "values" in data:
        return "cochain"
    raise SchemaError(str(path), "", "cannot tell which kind of file this is")


def load(reference: str, kind: Optional[str] = None) -> Loaded:
    """Load any artifact; the kind is detected when not given."""
    kind = detect_kind(reference) if kind is None else kind
    if kind not in LOADERS:
        raise ValueError(f"Invalid kind: {kind}. Must be one of {', '.join(KINDS)}.")
    return LOADERS[kind](reference)  # type: ignore[operator]


def pair(value: complex) -> List[float]:
    value = complex(value)
    return [value.real, value.imag]


def matrix_to_json(matrix: Mat) -> List[List[List[float]]]:
    return [[pair(entry) for entry in row] for row in np.asarray(matrix)]


def _terms_to_json(comb: LinComb) -> List[Dict[str, Any]]:
    return [{"mor": name, "coeff": pair(coeff)} for name, coeff in comb.terms]


def category_to_json(cat: LinCat) -> Dict[str, Any]:
    return {
        "name": cat.name,
        "objects": list(cat.objects),
        "morphisms": [
            {"name": m.name, "src": m.src, "dst": m.dst} for m in cat.morphisms
        ],
        "compose": [
            {"g": g, "f": f, "result": _terms_to_json(result)}
            for (g, f), result in cat.compose_table.items()
        ],
        "identities": {
            obj: _terms_to_json(cat.identity(obj)) for obj in cat.objects
        },
    }


def category_reference(cat: LinCat, relative_to: Optional[Path] = None) -> str:
    """
    How an emitted file should point at its category.

    A category read from a file is referenced by that file, relative to
    `relative_to` (the directory the emitted file goes to, default the
    working directory). Shipped categories become `fixture:NAME`; any other
    category falls back to `NAME.json`.
    """
    if cat.source is not None:
        base = Path.cwd() if relative_to is None else Path(relative_to).resolve()
        return os.path.relpath(cat.source, base)
    if cat.name in fixtures.FIXTURES:
        return f"{FIXTURE_PREFIX}{cat.name}"
    return f"{cat.name}.json"


def module_to_json(
    mod: Union[EvenModule, OddModule],
    category: Optional[str] = None,
    relative_to: Optional[Path] = None,
) -> Dict[str, Any]:
    if isinstance(mod, EvenModule):
        kind = "even"
        dims: Dict[str, Any] = {
            obj: {"plus": d.d_plus, "minus": d.d_minus} for obj, d in mod.dims.items()
        }
    else:
        kind = "odd"
        dims = {obj: {"dim": d} for obj, d in mod.dims.items()}
    return {
        "category": category or category_reference(mod.cat, relative_to),
        "kind": kind,
        "name": mod.name,
        "dims": dims,
        "F": {obj: matrix_to_json(matrix) for obj, matrix in mod.symmetry.items()},
        "H": {name: matrix_to_json(matrix) for name, matrix in mod.rep.items()},
    }


def family_to_json(
    fam: HomotopyFamily,
    category: Optional[str] = None,
    relative_to: Optional[Path] = None,
) -> Dict[str, Any]:
    if fam.qp is None:
        matrices: List[Mapping[str, Mat]] = list(fam.samples)
    else:
        matrices = [
            {
                m.name: block_diag(
                    fam.qp.rho_plus[k][m.name], fam.qp.rho_minus[k][m.name]
                )
                for m in fam.cat.morphisms
            }
            for k in range(len(fam.grid))
        ]
    data: Dict[str, Any] = {
        "category": category or category_reference(fam.cat, relative_to),
        "name": fam.name,
        "dims": dict(fam.base_dims),
        "grid": [float(t) for t in fam.grid],
        "breakpoints": [float(t) for t in fam.breakpoints],
        "samples": [
            {
                "t": float(t),
                "H": {name: matrix_to_json(m) for name, m in sample.items()},
            }
            for t, sample in zip(fam.grid, matrices)
        ],
    }
    if fam.qp is not None:
        data["Q"] = [{obj: matrix_to_json(m) for obj, m in q.items()} for q in fam.qp.Q]
        data["P"] = [{obj: matrix_to_json(m) for obj, m in p.items()} for p in fam.qp.P]
    return data


def cochain_to_json(
    phi: Cochain,
    category: Optional[str] = None,
    relative_to: Optional[Path] = None,
) -> Dict[str, Any]:
    return {
        "category": category or category_reference(phi.cat, relative_to),
        "degree": phi.degree,
        "chains": [list(chain) for chain in phi.chains],
        "values": [pair(value) for value in phi.values],
    }


def to_json(value: Loaded, relative_to: Optional[Path] = None) -> Dict[str, Any]:
    """JSON form of any artifact, with category references relative to `relative_to`."""
    if isinstance(value, LinCat):
        return category_to_json(value)
    if isinstance(value, (EvenModule, OddModule)):
        return module_to_json(value, relative_to=relative_to)
    if isinstance(value, HomotopyFamily):
        return family_to_json(value, relative_to=relative_to)
    return cochain_to_json(value, relative_to=relative_to)


def dump_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2)


def write_json(data: Any, out: Optional[str] = None) -> None:
    """Write to `out`, or to stdout when no path is given."""
    text = dump_json(data) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    log.info("artifact_written", path=out)
