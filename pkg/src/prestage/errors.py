"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class PrestageError(Exception):
    """Base class for data errors (CLI exit status 2)."""


class IndexBuildError(PrestageError):
    pass


class InvalidRecord(IndexBuildError, ValueError):
    """A value violates a type invariant (bbox order, negative counts, ...)."""


class DuplicateFips(IndexBuildError):
    pass


class MalformedFips(IndexBuildError, ValueError):
    pass


class EmptyInput(IndexBuildError):
    pass


class GeometryOutOfBbox(IndexBuildError):
    pass


class DanglingReference(IndexBuildError):
    """A block (or county) whose parent entity is missing."""


class BundleError(PrestageError):
    pass


class BundleSyntaxError(BundleError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SchemaError(BundleError):
    def __init__(self, message: str, kind: str | None = None, fips: str | None = None):
        where = ""
        if kind is not None:
            where = f" [{kind}" + (f" {fips}" if fips else "") + "]"
        super().__init__(message + where)
        self.kind = kind
        self.fips = fips


class VersionError(BundleError):
    pass


class CapacityError(PrestageError):
    pass


class DomainError(PrestageError, ValueError):
    pass


class RangeError(PrestageError, ValueError):
    pass


class EmptyCounty(PrestageError):
    pass


class GeometryError(PrestageError):
    pass


class FormulaError(PrestageError):
    pass


class OutputRootUnwritable(PrestageError):
    pass
