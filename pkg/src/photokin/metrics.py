"""Error measures, diagnostic series and field audits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GridError
from .model import ValidatedProblem
from .simulation import SolutionField

__all__ = [
    "NORMALIZATIONS",
    "AuditSummary",
    "ConvergenceReport",
    "ConvergenceRow",
    "audit_field",
    "coincident_values",
    "eoc",
    "format_float",
    "mean_space_error_series",
    "mean_spacetime_error",
    "min_concentration_series",
    "total_reduction_series",
    "write_csv",
]

# "nodes": mean over all (Nx+1)(Nt+1) compared nodes
# "printed": the same sum divided by Nx*Nt
NORMALIZATIONS = ("nodes", "printed")


def _values(f) -> np.ndarray:
    return np.asarray(f.values if isinstance(f, SolutionField) else f, dtype=float)


def coincident_values(field_vals, reference) -> np.ndarray:
    """Reference values at the nodes of ``field_vals``.

    The reference grid must be an integer refinement of the field grid in
    both directions, with the same factor.
    """
    a = _values(field_vals)
    r = _values(reference)
    nt, nx = a.shape[0] - 1, a.shape[1] - 1
    rt, rx = r.shape[0] - 1, r.shape[1] - 1
    if nx < 1 or rx % nx:
        raise GridError(f"reference with {rx} space intervals does not refine {nx}")
    k = rx // nx
    if nt == 0:
        return r[:1, ::k]
    if rt != k * nt:
        raise GridError(f"reference with {rt} time intervals is not a {k}-fold refinement of {nt}")
    return r[::k, ::k]


def _normalize(total: float, nx: int, nt: int, n_nodes: int, normalization: str) -> float:
    if normalization == "nodes":
        return total / n_nodes
    if normalization == "printed":
        return total / (nx * nt)
    raise DomainError(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")


def mean_spacetime_error(field_vals, reference, normalization: str = "nodes") -> float:
    """Mean absolute deviation from ``reference`` over the field's nodes.

    Parameters
    ----------
    normalization : {"nodes", "printed"}
        ``"nodes"`` divides by the number of compared nodes
        ``(Nx+1)(Nt+1)``; ``"printed"`` divides by ``Nx Nt``.
    """
    a = _values(field_vals)
    ref = coincident_values(a, reference)
    diff = np.abs(a - ref)
    total = math.fsum(diff.ravel().tolist())
    nt, nx = a.shape[0] - 1, a.shape[1] - 1
    return _normalize(total, nx, max(nt, 1), diff.size, normalization)


def eoc(e_coarse: float, e_fine: float) -> float:
    """Experimental order ``log2(e_coarse / e_fine)`` of one halving."""
    if not (e_coarse > 0 and e_fine > 0):
        raise DomainError(f"errors must be positive, got {e_coarse!r}, {e_fine!r}")
    return math.log2(e_coarse / e_fine)


def min_concentration_series(field_vals) -> np.ndarray:
    """``min_j c_j^n`` for every time level."""
    return np.min(_values(field_vals), axis=1)


def total_reduction_series(field_vals, problem: ValidatedProblem) -> np.ndarray:
    """Trapezoid integral of each row over ``[0, L]`` divided by ``C0(L)``."""
    C0L = float(problem.C0(problem.L))
    if not C0L > 0:
        raise DomainError(f"C0(L) must be positive, got {C0L!r}")
    a = _values(field_vals)
    nx = a.shape[1] - 1
    dx = problem.L / nx
    out = np.empty(a.shape[0])
    for n, row in enumerate(a.tolist()):
        out[n] = 0.5 * dx * math.fsum([row[0], row[-1]] + [2.0 * v for v in row[1:-1]]) / C0L
    return out


def mean_space_error_series(field_vals, reference, normalization: str = "printed") -> np.ndarray:
    """Per-level mean absolute deviation ``sum_j |c_j^n - ref_j^n| / Nx``.

    ``normalization="nodes"`` divides by ``Nx + 1`` instead.
    """
    a = _values(field_vals)
    ref = coincident_values(a, reference)
    nx = a.shape[1] - 1
    denom = {"printed": nx, "nodes": nx + 1}.get(normalization)
    if denom is None:
        raise DomainError(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")
    return np.array([math.fsum(r) / denom for r in np.abs(a - ref).tolist()])


@dataclass(frozen=True)
class AuditSummary:
    """Qualitative properties of a field.

    ``within_box`` is ``None`` when the field carries no box.
    """

    all_positive: bool
    columnwise_monotone: bool
    within_box: bool | None
    conservation_residual: float
    first_nonpositive: tuple[int, int] | None = None
    first_increase: tuple[int, int] | None = None

    def guarantees_hold(self, scheme: str | None) -> bool:
        """Whether the properties the scheme promises are all present.

        Every scheme is held to positivity and columnwise monotonicity; DQ
        fields must also lie in their box.
        """
        ok = self.all_positive and self.columnwise_monotone
        if scheme == "dq" and self.within_box is not None:
            ok = ok and self.within_box
        return ok

    def to_dict(self) -> dict:
        return {
            "all_positive": self.all_positive,
            "columnwise_monotone": self.columnwise_monotone,
            "within_box": self.within_box,
            "conservation_residual": self.conservation_residual,
            "first_nonpositive": self.first_nonpositive,
            "first_increase": self.first_increase,
        }


def audit_field(field_vals, c0=None, box: tuple[float, float] | None = None) -> AuditSummary:
    """Check positivity, columnwise monotonicity, box confinement and conservation."""
    if isinstance(field_vals, SolutionField):
        c0 = field_vals.c0 if c0 is None else c0
        box = field_vals.box if box is None else box
    a = _values(field_vals)
    c0 = a[0] if c0 is None else np.asarray(c0, dtype=float)
    bad = np.argwhere(~(a > 0))
    inc = np.argwhere(a[1:] > a[:-1])
    within = None
    if box is not None:
        within = bool(np.all((a >= box[0]) & (a <= box[1])))
    cB = c0[None, :] - a
    cons = float(np.max(np.abs(a + cB - c0[None, :]))) if a.size else 0.0
    return AuditSummary(
        all_positive=bad.size == 0,
        columnwise_monotone=inc.size == 0,
        within_box=within,
        conservation_residual=cons,
        first_nonpositive=tuple(int(v) for v in bad[0]) if bad.size else None,
        first_increase=(int(inc[0][0]) + 1, int(inc[0][1])) if inc.size else None,
    )


@dataclass(frozen=True)
class ConvergenceRow:
    theta: float
    error: float
    order: float | None


@dataclass(frozen=True)
class ConvergenceReport:
    """Errors and experimental orders of one scheme over decreasing steps."""

    scheme: str
    rows: tuple[ConvergenceRow, ...]
    reference: str
    normalization: str = "nodes"
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_errors(cls, scheme: str, thetas: Sequence[float], errors: Sequence[float], reference: str, **kw):
        order = sorted(range(len(thetas)), key=lambda i: -thetas[i])
        rows = []
        prev = None
        for i in order:
            p = eoc(prev, errors[i]) if prev is not None and prev > 0 and errors[i] > 0 else None
            rows.append(ConvergenceRow(float(thetas[i]), float(errors[i]), p))
            prev = errors[i]
        return cls(scheme, tuple(rows), reference, **kw)

    @property
    def errors(self) -> list[float]:
        return [r.error for r in self.rows]

    @property
    def orders(self) -> list[float | None]:
        return [r.order for r in self.rows]

    def to_rows(self) -> list[list]:
        return [[r.theta, r.error, r.order] for r in self.rows]

    def write_csv(self, path) -> Path:
        return write_csv(path, ["theta", "E", "eoc"], self.to_rows())


def format_float(v) -> str:
    """Round-trip-safe text for a number; ``None`` becomes an empty cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a header row and data rows with :func:`format_float` cells."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else format_float(c) for c in row])
    return path
