"""Continuous photochemical model: known functions, kernels and problem data.

The reactant concentration ``c(x, t)`` on ``[0, L] x [0, T]`` decays at the
rate ``f(x) * int rho(iota(lambda, C0(x), int_0^x c)) dlambda``, where
``iota`` is a Beer-Lambert intensity and ``rho`` a saturating light-response
kernel. This module holds the data describing one model instance and the
pointwise evaluation of every kernel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import erf

from .errors import DomainError, ValidationError

__all__ = [
    "BUILTINS",
    "C0_CACHE_NODES",
    "DERIVE",
    "ExtrapolationWarning",
    "FunctionSpec",
    "ProblemSpec",
    "ValidatedProblem",
    "eval_function",
    "eval_intensity",
    "eval_rho",
    "rho_array",
    "validate_problem",
]

DERIVE = "derive"
C0_CACHE_NODES = 2**12 + 1


class ExtrapolationWarning(UserWarning):
    """A sampled table was evaluated outside its abscissae."""


def _constant(x, p):
    return np.full_like(x, p[0])


def _polynomial(x, p):
    # Horner, ascending coefficients
    out = np.zeros_like(x)
    for coef in reversed(p):
        out = out * x + coef
    return out


def _gaussian(x, p):
    amp, centre, width = p
    return amp * np.exp(-((x - centre) ** 2) / width)


def _gaussian_integral(x, p):
    amp, centre, width = p
    s = math.sqrt(width)
    return amp * 0.5 * math.sqrt(math.pi * width) * (erf((x - centre) / s) - erf(-centre / s))


def _sigmoid(x, p):
    low, high, centre, width = p
    return low + (high - low) / (1.0 + np.exp((x - centre) / width))


# name -> (evaluator, parameter count or None for variadic)
BUILTINS: dict[str, tuple[Callable, int | None]] = {
    "constant": (_constant, 1),
    "polynomial": (_polynomial, None),
    "gaussian": (_gaussian, 3),
    "gaussian_integral": (_gaussian_integral, 3),
    "sigmoid": (_sigmoid, 4),
}


@dataclass(frozen=True)
class FunctionSpec:
    """A scalar function of one variable.

    Either a named builtin with real parameters or a sampled table evaluated by
    piecewise-linear interpolation with constant extrapolation.

    Builtins (parameters in order):

    ``constant [a]``
        ``a``
    ``polynomial [p0, p1, ...]``
        ``p0 + p1 x + p2 x^2 + ...``
    ``gaussian [A, m, w]``
        ``A exp(-(x - m)^2 / w)``
    ``gaussian_integral [A, m, w]``
        ``int_0^x A exp(-(s - m)^2 / w) ds``
    ``sigmoid [lo, hi, m, w]``
        ``lo + (hi - lo) / (1 + exp((x - m) / w))``
    """

    kind: str
    name: str | None = None
    params: tuple[float, ...] = ()
    xs: tuple[float, ...] = ()
    ys: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "builtin":
            if self.name not in BUILTINS:
                raise DomainError(f"unknown builtin function {self.name!r}")
            _, nparams = BUILTINS[self.name]
            if nparams is not None and len(self.params) != nparams:
                raise DomainError(
                    f"builtin {self.name!r} takes {nparams} parameters, got {len(self.params)}"
                )
            if self.name == "polynomial" and not self.params:
                raise DomainError("polynomial needs at least one coefficient")
            if self.name in ("gaussian", "gaussian_integral") and self.params[2] <= 0:
                raise DomainError("gaussian width must be positive")
            if self.name == "sigmoid" and self.params[3] == 0:
                raise DomainError("sigmoid width must be nonzero")
        elif self.kind == "table":
            if len(self.xs) == 0:
                raise DomainError("empty table")
            if len(self.xs) != len(self.ys):
                raise DomainError("table abscissae and ordinates differ in length")
            if len(self.xs) < 2:
                raise DomainError("a table needs at least 2 samples")
            if np.any(np.diff(self.xs) <= 0):
                raise DomainError("table abscissae must be strictly increasing")
        else:
            raise DomainError(f"unknown function kind {self.kind!r}")

    @classmethod
    def builtin(cls, name: str, *params: float) -> "FunctionSpec":
        return cls("builtin", name, tuple(float(p) for p in params))

    @classmethod
    def table(cls, xs, ys) -> "FunctionSpec":
        return cls("table", xs=tuple(float(v) for v in xs), ys=tuple(float(v) for v in ys))

    def __call__(self, x):
        return eval_function(self, x)

    def to_dict(self) -> dict:
        if self.kind == "builtin":
            return {"builtin": self.name, "params": list(self.params)}
        return {"table": {"x": list(self.xs), "y": list(self.ys)}}


def eval_function(spec: FunctionSpec, x):
    """Evaluate ``spec`` at scalar or array ``x``.

    Tables extrapolate constantly outside their abscissae and emit an
    :class:`ExtrapolationWarning` when they do.
    """
    arr = np.asarray(x, dtype=float)
    if spec.kind == "builtin":
        fn, _ = BUILTINS[spec.name]
        out = fn(np.array(arr, dtype=float, copy=True), spec.params)
    else:
        lo, hi = spec.xs[0], spec.xs[-1]
        if np.any(arr < lo) or np.any(arr > hi):
            warnings.warn(
                f"table evaluated outside [{lo}, {hi}]; constant extrapolation used",
                ExtrapolationWarning,
                stacklevel=2,
            )
        out = np.interp(arr, spec.xs, spec.ys)
    if arr.ndim == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def eval_rho(X, a1: float, a2: float):
    """Light-response kernel ``a1 X / (X^2 + a2 X + 1)`` for ``X >= 0``."""
    if a1 <= 0:
        raise DomainError(f"a1 must be positive, got {a1}")
    if a2 < 0:
        raise DomainError(f"a2 must be nonnegative, got {a2}")
    arr = np.asarray(X, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("rho is defined for X >= 0 only")
    out = rho_array(arr, a1, a2)
    return float(out) if arr.ndim == 0 else out


def rho_array(X: np.ndarray, a1: float, a2: float) -> np.ndarray:
    """Unchecked vectorized form of :func:`eval_rho` for hot loops."""
    # a1 / (X + a2 + 1/X) above X = 1 keeps huge X (and inf) finite
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        small = a1 * X / (X * X + a2 * X + 1.0)
        large = a1 / (X + a2 + 1.0 / X)
    return np.where(X > 1.0, large, small)


@dataclass(frozen=True)
class ProblemSpec:
    """Complete description of one model instance.

    ``C0`` is either a :class:`FunctionSpec` for the cumulative initial
    profile ``int_0^x c0`` or the string ``"derive"``, in which case it is
    built from ``c0`` by :func:`validate_problem`.
    """

    L: float
    T: float
    lambda0: float
    lambda_star: float
    a1: float
    a2: float
    mu: float
    c0: FunctionSpec
    C0: Union[FunctionSpec, str]
    f: FunctionSpec
    I: FunctionSpec
    epsA: FunctionSpec
    epsB: FunctionSpec
    name: str = ""
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "notes": self.notes,
            "L": self.L,
            "T": self.T,
            "lambda0": self.lambda0,
            "lambda_star": self.lambda_star,
            "a1": self.a1,
            "a2": self.a2,
            "mu": self.mu,
            "functions": {
                "c0": self.c0.to_dict(),
                "C0": self.C0 if isinstance(self.C0, str) else self.C0.to_dict(),
                "f": self.f.to_dict(),
                "I": self.I.to_dict(),
                "epsA": self.epsA.to_dict(),
                "epsB": self.epsB.to_dict(),
            },
        }


@dataclass(frozen=True)
class ValidatedProblem:
    """A :class:`ProblemSpec` that passed :func:`validate_problem`.

    ``F`` is the maximum of ``f`` observed on the probe grid and ``R`` the
    analytic maximum ``a1 / (2 + a2)`` of the light-response kernel.
    """

    spec: ProblemSpec
    F: float
    R: float
    _C0: Callable = field(repr=False, compare=False)

    # thin delegation keeps call sites short
    @property
    def L(self):
        return self.spec.L

    @property
    def T(self):
        return self.spec.T

    @property
    def lambda0(self):
        return self.spec.lambda0

    @property
    def lambda_star(self):
        return self.spec.lambda_star

    @property
    def a1(self):
        return self.spec.a1

    @property
    def a2(self):
        return self.spec.a2

    @property
    def mu(self):
        return self.spec.mu

    def c0(self, x):
        return eval_function(self.spec.c0, x)

    def C0(self, x):
        return self._C0(x)

    def f(self, x):
        return eval_function(self.spec.f, x)

    def I(self, lam):
        return eval_function(self.spec.I, lam)

    def epsA(self, lam):
        return eval_function(self.spec.epsA, lam)

    def epsB(self, lam):
        return eval_function(self.spec.epsB, lam)

    def rho(self, X):
        return eval_rho(X, self.a1, self.a2)


def eval_intensity(lam, C0x, cumint, problem: ValidatedProblem):
    """Beer-Lambert intensity at wavelength ``lam``.

    ``I(lam) exp(-mu (epsB(lam) C0x + (epsA(lam) - epsB(lam)) cumint))``
    """
    lam_arr = np.asarray(lam, dtype=float)
    lo, hi = problem.lambda0, problem.lambda_star
    if np.any(lam_arr < lo) or np.any(lam_arr > hi):
        raise DomainError(f"wavelength outside [{lo}, {hi}]")
    if np.any(np.asarray(C0x) < 0) or np.any(np.asarray(cumint) < 0):
        raise DomainError("C0x and cumint must be nonnegative")
    eA = problem.epsA(lam_arr)
    eB = problem.epsB(lam_arr)
    out = problem.I(lam_arr) * np.exp(-problem.mu * (eB * C0x + (eA - eB) * cumint))
    return float(out) if np.ndim(out) == 0 else out


def _derived_C0(c0: FunctionSpec, L: float) -> Callable:
    xs = np.linspace(0.0, L, C0_CACHE_NODES)
    cum = cumulative_trapezoid(eval_function(c0, xs), xs, initial=0.0)
    cum.setflags(write=False)

    def C0(x):
        out = np.interp(np.asarray(x, dtype=float), xs, cum)
        return float(out) if np.ndim(out) == 0 else out

    return C0


def validate_problem(spec: ProblemSpec, probe_points: int = 1025) -> ValidatedProblem:
    """Check the model assumptions on a probe grid and cache derived bounds.

    Raises :class:`~photokin.errors.ValidationError` naming the first violated
    assumption and where it was found.
    """
    if probe_points < 2:
        raise ValidationError("probe_points must be at least 2")
    for name, cond in (
        ("L > 0", spec.L > 0),
        ("T > 0", spec.T > 0),
        ("lambda0 < lambda_star", spec.lambda0 < spec.lambda_star),
        ("a1 > 0", spec.a1 > 0),
        ("a2 >= 0", spec.a2 >= 0),
        ("mu > 0", spec.mu > 0),
    ):
        if not cond:
            raise ValidationError(f"assumption violated: {name}")

    xs = np.linspace(0.0, spec.L, probe_points)
    lams = np.linspace(spec.lambda0, spec.lambda_star, probe_points)

    def first_bad(values, bad, grid, label, what):
        idx = np.flatnonzero(bad | ~np.isfinite(values))
        if idx.size:
            k = idx[0]
            raise ValidationError(
                f"assumption violated: {label} must be {what}; "
                f"found {float(values[k])!r} at {float(grid[k])!r}"
            )

    c0 = np.atleast_1d(eval_function(spec.c0, xs))
    first_bad(c0, c0 <= 0, xs, "c0(x)", "positive")
    fx = np.atleast_1d(eval_function(spec.f, xs))
    first_bad(fx, fx < 0, xs, "f(x)", "nonnegative")
    I = np.atleast_1d(eval_function(spec.I, lams))
    first_bad(I, (I < 0) | (I > 1), lams, "I(lambda)", "in [0, 1]")
    for label, fn in (("epsA(lambda)", spec.epsA), ("epsB(lambda)", spec.epsB)):
        vals = np.atleast_1d(eval_function(fn, lams))
        first_bad(vals, np.zeros(vals.shape, dtype=bool), lams, label, "finite")

    if isinstance(spec.C0, str):
        if spec.C0 != DERIVE:
            raise ValidationError(f"C0 must be a function or {DERIVE!r}, got {spec.C0!r}")
        C0 = _derived_C0(spec.c0, spec.L)
    else:
        C0_spec = spec.C0

        def C0(x):
            return eval_function(C0_spec, x)

        vals = np.atleast_1d(C0(xs))
        first_bad(vals, vals < 0, xs, "C0(x)", "nonnegative")

    return ValidatedProblem(
        spec=spec,
        F=float(np.max(fx)),
        R=spec.a1 / (2.0 + spec.a2),
        _C0=C0,
    )
