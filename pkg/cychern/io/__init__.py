"""Reading and writing the JSON artifacts."""

from .codec import (
    detect_kind,
    dump_json,
    load,
    load_category,
    load_cochain,
    load_family,
    load_module,
    to_json,
    write_json,
)
from .exceptions import LoadError, SchemaError, ShapeError, exit_code_for

__all__ = [
    "LoadError",
    "SchemaError",
    "ShapeError",
    "detect_kind",
    "dump_json",
    "exit_code_for",
    "load",
    "load_category",
    "load_cochain",
    "load_family",
    "load_module",
    "to_json",
    "write_json",
]
