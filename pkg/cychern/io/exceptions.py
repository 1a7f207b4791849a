"""
File loading exceptions.

Every error raised while reading an input file derives from LoadError so
the command line can report it with the parse-failure exit status.
"""

from typing import Sequence, Tuple, Union

from ..core.exceptions import CychernErrorCode, CychernException

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_LOAD_FAILED = 2


class LoadError(CychernException):
    """An input file could not be read or interpreted."""

    def __init__(self, path: str, detail: str, code: int = CychernErrorCode.SCHEMA):
        super().__init__(f"{path}: {detail}", code=code, module="io")
        self.path = path


class SchemaError(LoadError):
    """The file does not match its schema; `location` is the dotted field path."""

    def __init__(self, path: str, location: str, detail: str):
        super().__init__(path, f"{location}: {detail}" if location else detail)
        self.location = location


class ShapeError(LoadError):
    """A matrix whose shape does not fit the declared dimensions."""

    def __init__(
        self,
        path: str,
        name: str,
        expected: Union[Tuple[int, ...], Sequence[int]],
        actual: Union[Tuple[int, ...], Sequence[int]],
    ):
        super().__init__(
            path,
            f"matrix for {name} has shape {tuple(actual)}, expected {tuple(expected)}",
            code=CychernErrorCode.SHAPE,
        )
        self.name = name


def exit_code_for(exc: BaseException) -> int:
    """Process exit status for an error escaping a command."""
    if isinstance(exc, LoadError):
        return EXIT_LOAD_FAILED
    return EXIT_CHECK_FAILED
