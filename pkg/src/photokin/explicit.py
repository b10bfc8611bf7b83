"""One-step explicit schemes: NSFD, RQ, FTRQ and the predictor-corrector.

Every step maps the concentration row at one time level to the next.  The
non-local rate at node ``x_j`` is

    S_j = dl * sum_l w_l rho(iota(lam_l, C0(x_j), X_j))

with ``X_j`` a quadrature of the current row over ``[0, x_j]``.  NSFD, RQ and
FTRQ use left-rectangle sums in both ``x`` and ``lambda``; the corrector of
the predictor-corrector step uses trapezoid sums in both.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, SchemeError
from .grid import Discretization
from .quadrature import assemble_row, cumulative_space_integrals, make_weight_scheme, row_sums

__all__ = [
    "PHI_KINDS",
    "default_gamma",
    "denominator_phi",
    "ftrq_step",
    "nsfd_step",
    "pc_step",
    "rate_sums",
    "rq_step",
]

PHI_KINDS = ("phi1", "phi2", "phi3")

_RECT = make_weight_scheme("rectangular")
_TRAP = make_weight_scheme("trapezoidal")


def denominator_phi(kind: str, dt: float, gamma: float | None = None) -> float:
    """Denominator function replacing ``dt`` in the NSFD difference quotient.

    ``phi1 = dt``, ``phi2 = dt (1 + gamma dt)``,
    ``phi3 = (1 - exp(-gamma dt)) / gamma``.  All are ``dt + O(dt^2)``.
    """
    if not dt > 0:
        raise DomainError(f"time step must be positive, got {dt!r}")
    if kind == "phi1":
        return float(dt)
    if gamma is None or not gamma > 0:
        raise DomainError(f"{kind} needs a positive gamma, got {gamma!r}")
    if kind == "phi2":
        return dt * (1.0 + gamma * dt)
    if kind == "phi3":
        return -math.expm1(-gamma * dt) / gamma
    raise DomainError(f"unknown denominator kind {kind!r}; expected one of {PHI_KINDS}")


def default_gamma(F: float) -> float:
    """``max f`` as the phi2/phi3 parameter, or 1 when ``f`` vanishes identically."""
    return float(F) if F > 0 else 1.0


def _check_positive(c):
    c = np.asarray(c, dtype=float)
    if not np.all(c > 0):
        j = int(np.flatnonzero(~(c > 0))[0])
        raise SchemeError(f"nonpositive input row at node j={j} (value {c[j]!r})")
    return c


def rate_sums(c, disc: Discretization, rule: str = "rectangular") -> np.ndarray:
    """``S_j`` for every node, without the ``f(x_j)`` factor.

    ``rule`` selects the quadrature used in both ``x`` and ``lambda``:
    ``"rectangular"`` (left sums) or ``"trapezoidal"``.
    """
    scheme = {"rectangular": _RECT, "trapezoidal": _TRAP}[rule]
    X = cumulative_space_integrals(c, scheme, disc.dx)
    weights = assemble_row(scheme, disc.grid.nl)
    return disc.dl * row_sums(disc.rho_matrix(X) * weights[None, :])


def nsfd_step(c, disc: Discretization, phi: float) -> np.ndarray:
    """``c_j / (1 + phi f_j S_j)`` with left-rectangle sums."""
    c = _check_positive(c)
    return c / (1.0 + phi * disc.fx * rate_sums(c, disc))


def rq_step(c, disc: Discretization) -> np.ndarray:
    """``c_j exp(-dt f_j S_j)`` with left-rectangle sums."""
    c = _check_positive(c)
    return c * np.exp(-disc.dt * disc.fx * rate_sums(c, disc))


def ftrq_step(c, disc: Discretization) -> np.ndarray:
    """Forward-Euler update ``c_j (1 - dt f_j S_j)``; may turn negative.

    Once a row has gone negative the formula is still applied as written;
    the light-response argument stays nonnegative because it is an
    exponential.
    """
    c = np.asarray(c, dtype=float)
    return c * (1.0 - disc.dt * disc.fx * rate_sums(c, disc))


def pc_step(c, disc: Discretization, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Predictor-corrector step.

    The predictor ``p`` is one NSFD step; the corrector averages the
    trapezoid rates of the old row and of ``p``:

        c_new = c exp(-(dt/2) f (S_trap(c) + S_trap(p)))

    Returns
    -------
    c_new, p : ndarray
    """
    c = _check_positive(c)
    p = c / (1.0 + phi * disc.fx * rate_sums(c, disc))
    total = rate_sums(c, disc, "trapezoidal") + rate_sums(p, disc, "trapezoidal")
    return c * np.exp(-0.5 * disc.dt * disc.fx * total), p
