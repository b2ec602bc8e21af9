"""Exception types shared across the solver."""

from __future__ import annotations


class InvalidStateError(ValueError):
    """A field array violates a physical precondition (e.g. negative depth)."""


class InsufficientDataError(ValueError):
    """A diagnostic fit was requested on data that cannot support it."""


class NumericalFailureError(RuntimeError):
    """The time integration cannot continue.

    Carries enough context to report where and why the run died.
    """

    def __init__(self, kind: str, time: float, cell: int | None = None,
                 detail: str = ""):
        self.kind = kind
        self.time = time
        self.cell = cell
        self.detail = detail
        where = f" in cell {cell}" if cell is not None else ""
        msg = f"numerical failure ({kind}) at t={time:.6g}{where}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
