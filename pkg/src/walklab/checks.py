"""Outcome records for inequality and identity checks, plus CSV output."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

DEFAULT_SLACK = 1e-9
CSV_COLUMNS = ("name", "graph_label", "x", "t", "lhs", "rhs", "margin", "pass")


def fmt(value) -> str:
    """Float formatting used in every CSV report (12 significant digits)."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.12g}"


@dataclass(frozen=True)
class BoundCheck:
    """A single ``lhs <= rhs`` (or ``lhs == rhs``) evaluation.

    ``gating`` is False for comparison bounds that are only reported.
    """

    name: str
    lhs: float
    rhs: float
    relation: str = "le"
    tol: float = DEFAULT_SLACK
    context: str = ""
    x: int | None = None
    t: int | None = None
    gating: bool = True

    @classmethod
    def le(cls, name, lhs, rhs, **kw) -> "BoundCheck":
        return cls(name, float(lhs), float(rhs), "le", **kw)

    @classmethod
    def eq(cls, name, lhs, rhs, tol, **kw) -> "BoundCheck":
        return cls(name, float(lhs), float(rhs), "eq", tol=tol, **kw)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        if self.relation == "eq":
            return abs(self.margin) <= self.tol
        return self.margin >= -self.tol

    def row(self) -> list[str]:
        return [self.name, self.context, fmt(self.x), fmt(self.t), fmt(self.lhs),
                fmt(self.rhs), fmt(self.margin), fmt(self.passed)]

    def sort_key(self):
        return (self.context, self.name, -1 if self.x is None else self.x, -1 if self.t is None else self.t)


def checks_to_csv(checks: Iterable[BoundCheck]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for c in checks:
        w.writerow(c.row())
    return buf.getvalue()


def failures(checks: Iterable[BoundCheck]) -> list[BoundCheck]:
    return [c for c in checks if c.gating and not c.passed]
