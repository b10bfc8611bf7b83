"""Direct-quadrature (DQ) scheme on the integrated form of the model.

Integrating the rate equation in time gives, at every node,

    c(x_j, t_n) = c0(x_j) exp(-f(x_j) int_0^{t_n} S(x_j, s) ds)

where ``S`` is the wavelength integral of the light response.  The DQ scheme
replaces the time, wavelength and space integrals with rows of one Gregory
family, which makes each new time level the fixed point of

    G(c)_j = c0_j exp(-dt f_j (h_j + psi_n S_j(c))),   j >= n0

with ``h_j = sum_{p<n} psi_p S_j(c^p)`` the already known history and
``psi`` the time row over ``n + 1`` nodes.  The first ``n0`` time levels and
the first ``n0`` spatial nodes at every level come from a lower-order
bootstrap field on the same grid: the predictor-corrector for the two-step
rule, the two-step DQ for the three-step rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError
from .explicit import default_gamma, denominator_phi, pc_step
from .grid import Discretization, GridSpec
from .quadrature import WeightScheme, assemble_row, cumulative_space_integrals, make_weight_scheme, row_sums
from .solver import SolveReport, solve_fixed_point

__all__ = [
    "DQ_LABELS",
    "DQResult",
    "dq_field",
    "dq_fixed_point_map",
    "dq_log_residual",
    "dq_lower_bound",
    "dq_rates",
    "dq_solve_step",
    "generate_starting_values",
    "starting_refinement",
]

DQ_LABELS = ("gregory-1", "gregory-2")

Refinement = Union[int, str]


def dq_lower_bound(disc: Discretization, W: float) -> float:
    """Lower edge of the box guaranteed to contain every DQ value.

    ``min c0 * exp(-dt (Nt + 1) dl (Nl + 1) W^2 R F)``
    """
    g = disc.grid
    expo = disc.dt * (g.nt + 1) * disc.dl * (g.nl + 1) * W * W * disc.problem.R * disc.problem.F
    return float(np.min(disc.c0)) * math.exp(-expo)


def dq_rates(c, disc: Discretization, scheme: WeightScheme) -> np.ndarray:
    """Wavelength integral ``S_j(c)`` at every node, Gregory rows in ``x`` and ``lambda``."""
    X = cumulative_space_integrals(c, scheme, disc.dx)
    weights = assemble_row(scheme, disc.grid.nl)
    return disc.dl * row_sums(disc.rho_matrix(X) * weights[None, :])


@dataclass
class _History:
    """Rates ``S(c^p)`` of every accepted level, kept for the time convolution."""

    scheme: WeightScheme
    rates: list = field(default_factory=list)

    def weighted(self, n: int) -> tuple[np.ndarray, float]:
        """``(h, psi_n)`` for the new level ``n``."""
        psi = assemble_row(self.scheme, n)
        S = np.asarray(self.rates[:n])
        terms = psi[:n, None] * S
        h = np.array([math.fsum(col) for col in terms.T.tolist()])
        return h, float(psi[n])


def dq_fixed_point_map(
    x,
    history_sum,
    psi_n: float,
    disc: Discretization,
    scheme: WeightScheme,
    fixed,
) -> np.ndarray:
    """Evaluate ``G(x)`` for one time level.

    Parameters
    ----------
    x : ndarray
        Current iterate for the full row.
    history_sum : ndarray
        ``h_j``, the time convolution of earlier levels.
    psi_n : float
        Weight of the new level in the time row.
    fixed : ndarray
        Values of the first ``n0`` nodes, copied into the result unchanged.
    """
    x = np.asarray(x, dtype=float)
    S = dq_rates(x, disc, scheme)
    g = disc.c0 * np.exp(-disc.dt * disc.fx * (history_sum + psi_n * S))
    k = len(fixed)
    g[:k] = fixed
    return g


def dq_log_residual(c, history_sum, psi_n: float, disc: Discretization, scheme: WeightScheme) -> float:
    """``max_j |log(c_j / c0_j) + dt f_j (h_j + psi_n S_j(c))|`` over ``j >= n0``."""
    c = np.asarray(c, dtype=float)
    S = dq_rates(c, disc, scheme)
    r = np.log(c / disc.c0) + disc.dt * disc.fx * (history_sum + psi_n * S)
    r = r[scheme.n0 :]
    return float(np.max(np.abs(r))) if r.size else 0.0


def dq_solve_step(
    previous,
    history_sum,
    psi_n: float,
    disc: Discretization,
    scheme: WeightScheme,
    fixed,
    box: tuple[float, float],
    tol: float = 1e-14,
) -> tuple[np.ndarray, SolveReport]:
    """Solve one DQ level for the nodes ``j >= n0``.

    The initial iterate is ``previous`` (the last accepted row) clamped into
    ``box``.
    """
    k = len(fixed)
    lo, hi = box

    def sub_map(y):
        full = np.concatenate([fixed, y])
        return dq_fixed_point_map(full, history_sum, psi_n, disc, scheme, fixed)[k:]

    y, report = solve_fixed_point(sub_map, np.asarray(previous, dtype=float)[k:], (lo, hi), tol=tol)
    return np.concatenate([fixed, y]), report


def starting_refinement(dt: float, n0: int, refinement: Refinement) -> int:
    """Time-refinement factor of the bootstrap run.

    ``"auto"`` picks the smallest ``r`` with ``(dt / r)^(n0) <= dt^(n0 + 1)``,
    i.e. ``ceil(dt^(-1/n0))``, so the bootstrap's local error matches the
    order the DQ rule needs; an integer is used as given.
    """
    if refinement == "auto":
        return max(1, math.ceil(dt ** (-1.0 / n0) - 1e-12))
    r = int(refinement)
    if r < 1:
        raise DomainError(f"refinement factor must be at least 1, got {refinement!r}")
    return r


def _pc_field(disc: Discretization, phi: float) -> np.ndarray:
    rows = [np.array(disc.c0)]
    for _ in range(disc.grid.nt):
        rows.append(pc_step(rows[-1], disc, phi)[0])
    return np.array(rows)


def generate_starting_values(
    disc: Discretization,
    n0: int,
    start_phi: str = "phi2",
    gamma: float | None = None,
    refinement: Refinement = 1,
    tol: float = 1e-14,
) -> np.ndarray:
    """Bootstrap field on ``disc``'s grid, shape ``(Nt + 1, Nx + 1)``.

    For ``n0 = 2`` this is the predictor-corrector (NSFD predictor with
    denominator ``start_phi``); for ``n0 = 3`` the two-step DQ, which is
    itself bootstrapped by the predictor-corrector.  With ``refinement > 1``
    the bootstrap runs ``r`` times finer in time and is sampled back.
    """
    if n0 not in (2, 3):
        raise DomainError(f"starting values are defined for n0 in (2, 3), got {n0}")
    if disc.grid.nt == 0:
        return np.array(disc.c0)[None, :]
    r = starting_refinement(disc.dt, n0, refinement)
    g = disc.grid
    fine = disc if r == 1 else Discretization(disc.problem, GridSpec(g.nx, g.nt * r, g.nl))
    if gamma is None:
        gamma = default_gamma(disc.problem.F)
    if n0 == 2:
        phi = denominator_phi(start_phi, fine.dt, gamma if start_phi != "phi1" else None)
        boot = _pc_field(fine, phi)
    else:
        boot = dq_field(fine, "gregory-1", start_phi=start_phi, gamma=gamma, refinement=1, tol=tol).values
    return boot[::r]


@dataclass(frozen=True)
class DQResult:
    """Raw output of :func:`dq_field`."""

    values: np.ndarray
    reports: tuple
    residuals: tuple
    lower_bound: float
    upper_bound: float
    bootstrap: np.ndarray


def dq_field(
    disc: Discretization,
    label: str = "gregory-2",
    start_phi: str = "phi2",
    gamma: float | None = None,
    refinement: Refinement = 1,
    tol: float = 1e-14,
) -> DQResult:
    """Run the DQ scheme over all time levels of ``disc``."""
    if label not in DQ_LABELS:
        raise DomainError(f"DQ weights must be one of {DQ_LABELS}, got {label!r}")
    scheme = make_weight_scheme(label)
    n0 = scheme.n0
    boot = generate_starting_values(disc, n0, start_phi, gamma, refinement, tol)
    nt = disc.grid.nt
    lo = dq_lower_bound(disc, scheme.W)
    hi = float(np.max(disc.c0))
    values = np.empty((nt + 1, disc.grid.nx + 1))
    values[0] = disc.c0
    hist = _History(scheme)
    first = min(n0, nt + 1)
    for m in range(1, first):
        values[m] = boot[m]
    for m in range(first):
        hist.rates.append(dq_rates(values[m], disc, scheme))
    reports = []
    residuals = []
    for n in range(n0, nt + 1):
        h, psi_n = hist.weighted(n)
        fixed = boot[n, :n0]
        row, rep = dq_solve_step(values[n - 1], h, psi_n, disc, scheme, fixed, (lo, hi), tol)
        values[n] = row
        reports.append(rep)
        residuals.append(dq_log_residual(row, h, psi_n, disc, scheme))
        hist.rates.append(dq_rates(row, disc, scheme))
    return DQResult(values, tuple(reports), tuple(residuals), lo, hi, boot)
