"""Box-constrained fixed-point solver with a Newton fallback."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = ["SolveReport", "solve_fixed_point"]

_SQRT_EPS = float(np.sqrt(np.finfo(float).eps))


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one :func:`solve_fixed_point` call.

    Attributes
    ----------
    iterations : int
        Map evaluations after the initial one, Newton Jacobian columns included.
    residual : float
        ``max |x - map(x)|`` at the returned point.
    method : str
        ``"fixed-point"`` or ``"newton-fallback"``.
    clamp_events : int
        Number of components pulled back into the box over the whole solve.
    """

    iterations: int
    residual: float
    method: str
    clamp_events: int
    converged: bool = True


def solve_fixed_point(
    fmap: Callable[[np.ndarray], np.ndarray],
    x0,
    box: tuple,
    tol: float = 1e-14,
    max_iter: int = 200,
    newton_iter: int = 50,
) -> tuple[np.ndarray, SolveReport]:
    """Solve ``x = fmap(x)`` inside the box ``[lo, hi]``.

    Runs the damped iteration ``x <- (1 - theta) x + theta fmap(x)`` starting
    from ``theta = 1`` and halving ``theta`` whenever the residual grows.
    If that has not met ``tol`` after ``max_iter`` map evaluations, Newton's
    method on ``x - fmap(x)`` with a forward-difference Jacobian takes over.
    Iterates and map values leaving the box are clamped back componentwise.

    Parameters
    ----------
    fmap : callable
        Map from a 1-D array to an array of the same shape.
    x0 : array_like
        Initial iterate. Clamped into the box if needed.
    box : (lo, hi)
        Scalars or arrays broadcastable to ``x0``.
    tol : float
        Max-norm residual target.

    Returns
    -------
    x : ndarray
    report : SolveReport

    Raises
    ------
    ConvergenceError
        If neither phase reaches ``tol``; ``err.report`` holds the diagnostics.
    """
    x = np.array(x0, dtype=float, copy=True)
    lo = np.broadcast_to(np.asarray(box[0], dtype=float), x.shape)
    hi = np.broadcast_to(np.asarray(box[1], dtype=float), x.shape)
    if np.any(lo > hi):
        raise DomainError("box lower bound exceeds upper bound")
    clamps = 0

    def clamp(v):
        nonlocal clamps
        out = np.clip(v, lo, hi)
        clamps += int(np.count_nonzero(out != v))
        return out

    def evaluate(v):
        g = np.asarray(fmap(v), dtype=float)
        if g.shape != v.shape:
            raise DomainError(f"map returned shape {g.shape}, expected {v.shape}")
        return clamp(g)

    x = clamp(x)
    g = evaluate(x)
    res = float(np.max(np.abs(g - x))) if x.size else 0.0
    evals = 1
    theta = 1.0
    while res > tol and evals < max_iter:
        trial = clamp((1.0 - theta) * x + theta * g) if theta < 1.0 else g
        g_trial = evaluate(trial)
        evals += 1
        res_trial = float(np.max(np.abs(g_trial - trial)))
        if res_trial > res and theta > 1e-6:
            theta *= 0.5
            continue
        x, g, res = trial, g_trial, res_trial
    if res <= tol:
        return x, SolveReport(evals - 1, res, "fixed-point", clamps)

    # Newton on F(x) = x - fmap(x)
    n = x.size
    for k in range(newton_iter):
        F = x - g
        J = np.eye(n)
        for i in range(n):
            h = _SQRT_EPS * (1.0 + abs(x[i]))
            xp = x.copy()
            xp[i] += h
            J[:, i] -= (np.asarray(fmap(xp), dtype=float) - g) / h
        evals += n
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        x = clamp(x + step)
        g = evaluate(x)
        evals += 1
        res = float(np.max(np.abs(g - x)))
        if res <= tol:
            return x, SolveReport(evals - 1, res, "newton-fallback", clamps)

    report = SolveReport(evals - 1, res, "newton-fallback", clamps, converged=False)
    raise ConvergenceError(
        f"fixed-point solve stalled at residual {res:.3e} (tol {tol:.1e}) after {evals} map evaluations",
        report=report,
    )
