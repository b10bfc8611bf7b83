"""Uniform space, time and wavelength meshes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridError
from .model import ValidatedProblem, rho_array

__all__ = ["Discretization", "GridSpec"]

_REL_TOL = 1e-12


def _count(length: float, step: float, label: str) -> int:
    n = round(length / step)
    if n < 1 or abs(n * step - length) > _REL_TOL * abs(length):
        raise GridError(f"{label}: step {step!r} does not divide length {length!r}")
    return int(n)


@dataclass(frozen=True)
class GridSpec:
    """Node counts of the three uniform meshes.

    ``nt = 0`` is accepted and yields a field holding the initial row only.
    """

    nx: int
    nt: int
    nl: int

    def __post_init__(self):
        for name in ("nx", "nl"):
            if int(getattr(self, name)) < 1:
                raise GridError(f"{name} must be at least 1")
        if int(self.nt) < 0:
            raise GridError("nt must be nonnegative")

    @classmethod
    def from_counts(cls, nx: int, nt: int, nl: int) -> "GridSpec":
        return cls(int(nx), int(nt), int(nl))

    @classmethod
    def from_steps(cls, problem: ValidatedProblem, dx: float, dt: float, dl: float) -> "GridSpec":
        """Counts from step sizes; each step must divide its interval."""
        for name, v in (("dx", dx), ("dt", dt), ("dl", dl)):
            if not v > 0:
                raise GridError(f"{name} must be positive, got {v!r}")
        return cls(
            _count(problem.L, dx, "space"),
            _count(problem.T, dt, "time"),
            _count(problem.lambda_star - problem.lambda0, dl, "wavelength"),
        )

    @classmethod
    def from_theta(cls, problem: ValidatedProblem, theta: float) -> "GridSpec":
        """Common step ``theta`` on all three meshes."""
        return cls.from_steps(problem, theta, theta, theta)

    def refine(self, factor: int) -> "GridSpec":
        return GridSpec(self.nx * factor, self.nt * factor, self.nl * factor)

    def nested_factor(self, other: "GridSpec") -> int:
        """Integer ``k`` with ``other = self.refine(k)`` (``nt = 0`` aside)."""
        if other.nx % self.nx or other.nl % self.nl:
            raise GridError(f"grid {other} is not a refinement of {self}")
        k = other.nx // self.nx
        if other.nl != k * self.nl or other.nt != k * self.nt:
            raise GridError(f"grid {other} is not a uniform refinement of {self}")
        return k

    def to_dict(self) -> dict:
        return {"nx": self.nx, "nt": self.nt, "nl": self.nl}


@dataclass(frozen=True, eq=False)
class Discretization:
    """A problem sampled on a :class:`GridSpec`.

    Precomputes the nodal values every scheme needs; arrays are read-only.
    """

    problem: ValidatedProblem
    grid: GridSpec

    @property
    def dx(self) -> float:
        return self.problem.L / self.grid.nx

    @property
    def dt(self) -> float:
        return self.problem.T / self.grid.nt if self.grid.nt else self.problem.T

    @property
    def dl(self) -> float:
        return (self.problem.lambda_star - self.problem.lambda0) / self.grid.nl

    def _frozen(self, a) -> np.ndarray:
        a = np.array(a, dtype=float)
        a.setflags(write=False)
        return a

    @cached_property
    def x(self) -> np.ndarray:
        return self._frozen(np.arange(self.grid.nx + 1) * self.dx)

    @cached_property
    def t(self) -> np.ndarray:
        return self._frozen(np.arange(self.grid.nt + 1) * self.dt)

    @cached_property
    def lam(self) -> np.ndarray:
        lam = self.problem.lambda0 + np.arange(self.grid.nl + 1) * self.dl
        lam[-1] = self.problem.lambda_star
        return self._frozen(lam)

    @cached_property
    def c0(self) -> np.ndarray:
        return self._frozen(np.atleast_1d(self.problem.c0(self.x)))

    @cached_property
    def C0x(self) -> np.ndarray:
        return self._frozen(np.atleast_1d(self.problem.C0(self.x)))

    @cached_property
    def fx(self) -> np.ndarray:
        return self._frozen(np.atleast_1d(self.problem.f(self.x)))

    @cached_property
    def I(self) -> np.ndarray:
        return self._frozen(np.atleast_1d(self.problem.I(self.lam)))

    @cached_property
    def epsA(self) -> np.ndarray:
        return self._frozen(np.atleast_1d(self.problem.epsA(self.lam)))

    @cached_property
    def epsB(self) -> np.ndarray:
        return self._frozen(np.atleast_1d(self.problem.epsB(self.lam)))

    @cached_property
    def _base_exponent(self) -> np.ndarray:
        # mu epsB(lam_l) C0(x_j), shape (nx+1, nl+1)
        return self._frozen(self.problem.mu * self.C0x[:, None] * self.epsB[None, :])

    @cached_property
    def _delta_eps(self) -> np.ndarray:
        return self._frozen(self.problem.mu * (self.epsA - self.epsB))

    def rho_matrix(self, cumint) -> np.ndarray:
        """``rho(iota(lam_l, C0(x_j), cumint_j))`` for all ``j, l``."""
        cumint = np.asarray(cumint, dtype=float)
        expo = self._base_exponent + cumint[:, None] * self._delta_eps[None, :]
        with np.errstate(over="ignore"):
            X = self.I[None, :] * np.exp(-expo)
        return rho_array(X, self.problem.a1, self.problem.a2)
