"""Exception hierarchy shared by every workbench module."""

from __future__ import annotations

from typing import Tuple


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class InvalidInputError(WorkbenchError):
    """An operation was called outside its precondition."""


class GroupoidAxiomError(WorkbenchError):
    """Raised by groupoid validation with the failed axiom and witnessing arrows."""

    def __init__(self, axiom: str, witnesses: Tuple = (), detail: str = "") -> None:
        self.axiom = axiom
        self.witnesses = tuple(witnesses)
        self.detail = detail
        msg = f"groupoid axiom '{axiom}' violated"
        if self.witnesses:
            msg += f" by {self.witnesses!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class GuardExceeded(WorkbenchError):
    """A configured size guard refused an enumeration or search."""

    def __init__(self, what: str, count: int | None, limit: int) -> None:
        self.what = what
        self.count = count
        self.limit = limit
        exact = f"{count}" if count is not None else "unknown"
        super().__init__(f"{what}: count {exact} exceeds guard {limit}")


class VerificationError(WorkbenchError):
    """An identity that must hold was found to fail."""

    def __init__(self, identity: str, detail: str = "") -> None:
        self.identity = identity
        self.detail = detail
        super().__init__(f"{identity} failed" + (f": {detail}" if detail else ""))


class SpecFileError(WorkbenchError):
    """Syntax or reference error in a spec file, with its location when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
