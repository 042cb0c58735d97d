"""Exception hierarchy shared by the numerical modules and the CLI.

Every error carries a machine-readable ``code`` and a distinct process exit
status so the command-line front-end can report failures without parsing
messages.
"""

from __future__ import annotations

from typing import Any


class GeometryError(ValueError):
    """Base class for all domain errors raised by this package."""

    code = "GEOMETRY_ERROR"
    exit_code = 1

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_record(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


class NotHermitian(GeometryError):
    code = "NOT_HERMITIAN"
    exit_code = 2


class DegenerateSpectrum(GeometryError):
    code = "DEGENERATE_SPECTRUM"
    exit_code = 3


class NotPSD(GeometryError):
    code = "NOT_PSD"
    exit_code = 4


class TraceNotOne(GeometryError):
    code = "TRACE_NOT_ONE"
    exit_code = 5


class NotSquare(GeometryError):
    code = "NOT_SQUARE"
    exit_code = 6


class NotUnitary(GeometryError):
    code = "NOT_UNITARY"
    exit_code = 7


class DimensionMismatch(GeometryError):
    code = "DIMENSION_MISMATCH"
    exit_code = 8


class RankMismatch(GeometryError):
    code = "RANK_MISMATCH"
    exit_code = 9


class SingularOverlap(GeometryError):
    """The overlap matrix has no unique unitary polar factor."""

    code = "SINGULAR_OVERLAP"
    exit_code = 10


class ZeroOverlapOnMatch(GeometryError):
    """A permutation-matched eigenvector overlap vanishes, so its phase is undefined."""

    code = "ZERO_OVERLAP_ON_MATCH"
    exit_code = 11


class AntipodalVertices(GeometryError):
    code = "ANTIPODAL_VERTICES"
    exit_code = 12


class ParseError(GeometryError):
    code = "PARSE_ERROR"
    exit_code = 13


class IoError(GeometryError):
    code = "IO_ERROR"
    exit_code = 14
