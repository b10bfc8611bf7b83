"""Scheme configuration and the time-stepping driver."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .dq import DQ_LABELS, dq_field
from .errors import ConfigError
from .explicit import PHI_KINDS, default_gamma, denominator_phi, ftrq_step, nsfd_step, pc_step, rq_step
from .grid import Discretization, GridSpec
from .model import ValidatedProblem

__all__ = [
    "SCHEMES",
    "FieldAudit",
    "SchemeConfig",
    "SolutionField",
    "config_hash",
    "product_concentration",
    "run_simulation",
]

SCHEMES = ("nsfd", "rq", "ftrq", "pc", "dq")


@dataclass(frozen=True)
class SchemeConfig:
    """Which scheme to run and its parameters.

    Attributes
    ----------
    scheme : str
        One of :data:`SCHEMES`.
    phi : str
        Denominator function for ``nsfd`` and the ``pc`` predictor.
    gamma : float or None
        Parameter of ``phi2``/``phi3``; ``None`` means ``max f``.
    weights : str
        Gregory family for ``dq``.
    tol : float
        Fixed-point residual target for ``dq``.
    start_phi : str
        Denominator of the predictor-corrector that bootstraps ``dq``.
    start_refinement : int or "auto"
        Time-refinement factor of the ``dq`` bootstrap run.
    """

    scheme: str = "nsfd"
    phi: str = "phi1"
    gamma: float | None = None
    weights: str = "gregory-2"
    tol: float = 1e-14
    start_phi: str = "phi2"
    start_refinement: Union[int, str] = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        for name in ("phi", "start_phi"):
            if getattr(self, name) not in PHI_KINDS:
                raise ConfigError(f"{name} must be one of {PHI_KINDS}, got {getattr(self, name)!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma!r}")
        if self.scheme == "dq" and self.weights not in DQ_LABELS:
            raise ConfigError(f"dq weights must be one of {DQ_LABELS}, got {self.weights!r}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        r = self.start_refinement
        if r != "auto" and not (isinstance(r, int) and r >= 1):
            raise ConfigError(f"start_refinement must be a positive integer or 'auto', got {r!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def label(self) -> str:
        """Short human-readable id, e.g. ``nsfd-phi1`` or ``dq-gregory-2``."""
        if self.scheme in ("nsfd", "pc"):
            return f"{self.scheme}-{self.phi}"
        if self.scheme == "dq":
            return f"dq-{self.weights}"
        return self.scheme


@dataclass(frozen=True)
class FieldAudit:
    """Per-step qualitative checks recorded while a field is produced.

    Step indices refer to time levels ``n``.
    """

    nonpositive_steps: tuple[int, ...] = ()
    nonmonotone_steps: tuple[int, ...] = ()
    out_of_box_steps: tuple[int, ...] = ()
    clamp_events: int = 0
    max_solver_residual: float | None = None
    max_log_residual: float | None = None
    solver_methods: tuple[str, ...] = ()

    @property
    def negative_seen(self) -> bool:
        return bool(self.nonpositive_steps)

    @property
    def monotonicity_violated(self) -> bool:
        return bool(self.nonmonotone_steps)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["negative_seen"] = self.negative_seen
        d["monotonicity_violated"] = self.monotonicity_violated
        return d


@dataclass(frozen=True, eq=False)
class SolutionField:
    """Concentration values on the space-time grid.

    ``values[n, j]`` is the value at ``t_n``, ``x_j``; shape ``(Nt+1, Nx+1)``.
    The array is read-only.
    """

    values: np.ndarray
    grid: GridSpec
    x: np.ndarray
    t: np.ndarray
    config: SchemeConfig
    audit: FieldAudit
    provenance: str
    c0: np.ndarray
    box: tuple[float, float] | None = None
    species: str = "A"
    extras: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for a in (self.values, self.x, self.t, self.c0):
            a.setflags(write=False)

    @property
    def scheme(self) -> str:
        return self.config.scheme


def config_hash(problem: ValidatedProblem, grid: GridSpec, config: SchemeConfig) -> str:
    """Stable sha256 digest of everything that determines a field."""
    payload = {"problem": problem.spec.to_dict(), "grid": grid.to_dict(), "scheme": config.to_dict()}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()


def _step_flags(values: np.ndarray) -> tuple[tuple[int, ...], tuple[int, ...]]:
    nonpos = tuple(int(n) for n in np.flatnonzero(np.any(~(values > 0), axis=1)))
    inc = np.any(values[1:] > values[:-1], axis=1)
    nonmono = tuple(int(n) + 1 for n in np.flatnonzero(inc))
    return nonpos, nonmono


def run_simulation(problem: ValidatedProblem, grid: GridSpec, config: SchemeConfig | None = None) -> SolutionField:
    """Run ``config`` on ``problem`` over ``grid`` and audit the result.

    Deterministic: identical inputs give bit-identical values.
    """
    config = config or SchemeConfig()
    disc = Discretization(problem, grid)
    gamma = config.gamma if config.gamma is not None else default_gamma(problem.F)
    nt = grid.nt
    box = None
    extras: dict = {}
    audit_kw: dict = {}
    if config.scheme == "dq":
        res = dq_field(
            disc,
            config.weights,
            start_phi=config.start_phi,
            gamma=gamma,
            refinement=config.start_refinement,
            tol=config.tol,
        )
        values = res.values
        box = (res.lower_bound, res.upper_bound)
        extras["iterations"] = tuple(r.iterations for r in res.reports)
        inside = (values >= box[0]) & (values <= box[1])
        audit_kw = dict(
            out_of_box_steps=tuple(int(n) for n in np.flatnonzero(~np.all(inside, axis=1))),
            clamp_events=sum(r.clamp_events for r in res.reports),
            max_solver_residual=max((r.residual for r in res.reports), default=0.0),
            max_log_residual=max(res.residuals, default=0.0),
            solver_methods=tuple(sorted({r.method for r in res.reports})),
        )
    else:
        values = np.empty((nt + 1, grid.nx + 1))
        values[0] = disc.c0
        if nt:
            phi = denominator_phi(config.phi, disc.dt, gamma if config.phi != "phi1" else None)
        for n in range(nt):
            c = values[n]
            if config.scheme == "nsfd":
                values[n + 1] = nsfd_step(c, disc, phi)
            elif config.scheme == "rq":
                values[n + 1] = rq_step(c, disc)
            elif config.scheme == "ftrq":
                values[n + 1] = ftrq_step(c, disc)
            else:
                values[n + 1] = pc_step(c, disc, phi)[0]
    nonpos, nonmono = _step_flags(values)
    audit = FieldAudit(nonpositive_steps=nonpos, nonmonotone_steps=nonmono, **audit_kw)
    return SolutionField(
        values=values,
        grid=grid,
        x=np.array(disc.x),
        t=np.array(disc.t),
        config=config,
        audit=audit,
        provenance=config_hash(problem, grid, config),
        c0=np.array(disc.c0),
        box=box,
        extras=extras,
    )


def product_concentration(field: SolutionField) -> SolutionField:
    """Field of the photoproduct, ``c_B = c0 - c``."""
    values = field.c0[None, :] - field.values
    return SolutionField(
        values=values,
        grid=field.grid,
        x=np.array(field.x),
        t=np.array(field.t),
        config=field.config,
        audit=field.audit,
        provenance=field.provenance,
        c0=np.array(field.c0),
        box=None,
        species="B",
        extras=dict(field.extras),
    )
