"""Bundled problems, cached reference solutions and convergence studies."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import ProblemConfig, load_problem_config
from .errors import ConfigError, GridError
from .grid import GridSpec
from .metrics import ConvergenceReport, mean_spacetime_error
from .model import DERIVE, FunctionSpec, ProblemSpec, ValidatedProblem
from .simulation import FieldAudit, SchemeConfig, SolutionField, config_hash, run_simulation

__all__ = [
    "BUILTIN_PROBLEMS",
    "DEFAULT_REF_THETA",
    "EXTENDED_REF_THETA",
    "REFERENCE_CONFIG",
    "ReferenceCache",
    "builtin_config",
    "builtin_problem",
    "convergence_study",
    "random_problem",
    "reference_solution",
    "study_digest",
    "timing_study",
]

BUILTIN_PROBLEMS = ("test-1", "test-2", "test-2-long", "test-3")
DEFAULT_REF_THETA = 2.0**-7
EXTENDED_REF_THETA = 2.0**-9
REFERENCE_CONFIG = SchemeConfig("dq", weights="gregory-2")


def builtin_config(problem_id: str) -> ProblemConfig:
    """Parsed bundled problem file, including its default grid."""
    if problem_id not in BUILTIN_PROBLEMS:
        raise ConfigError(f"unknown problem {problem_id!r}; expected one of {BUILTIN_PROBLEMS}")
    ref = resources.files("photokin") / "data" / f"{problem_id}.yaml"
    with resources.as_file(ref) as path:
        return load_problem_config(path)


def builtin_problem(problem_id: str, **overrides) -> ProblemSpec:
    """A bundled problem, optionally with some fields replaced.

    ``test-2``, ``test-2-long`` and ``test-3`` use surrogate spectra and are
    qualitative only.
    """
    spec = builtin_config(problem_id).spec
    if overrides:
        try:
            spec = dataclasses.replace(spec, **overrides)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
    return spec


def _field_key(problem: ValidatedProblem, grid: GridSpec, config: SchemeConfig) -> str:
    return config_hash(problem, grid, config)


class ReferenceCache:
    """On-disk store of solution fields keyed by the full configuration hash.

    Each entry is ``<key>.npz`` (values and coordinates) plus ``<key>.json``
    (grid, scheme, audit).  Access is serialized with a lock so concurrent
    studies can share one cache.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self._lock = threading.Lock()

    def _paths(self, key: str) -> tuple[Path, Path]:
        return self.directory / f"{key}.npz", self.directory / f"{key}.json"

    def get(self, key: str) -> SolutionField | None:
        npz, meta_path = self._paths(key)
        with self._lock:
            if not (npz.exists() and meta_path.exists()):
                return None
            meta = json.loads(meta_path.read_text())
            with np.load(npz) as data:
                arrays = {k: np.array(data[k]) for k in ("values", "x", "t", "c0")}
        audit = meta["audit"]
        audit = FieldAudit(
            nonpositive_steps=tuple(audit["nonpositive_steps"]),
            nonmonotone_steps=tuple(audit["nonmonotone_steps"]),
            out_of_box_steps=tuple(audit["out_of_box_steps"]),
            clamp_events=audit["clamp_events"],
            max_solver_residual=audit["max_solver_residual"],
            max_log_residual=audit["max_log_residual"],
            solver_methods=tuple(audit["solver_methods"]),
        )
        box = tuple(meta["box"]) if meta["box"] is not None else None
        return SolutionField(
            grid=GridSpec(**meta["grid"]),
            config=SchemeConfig(**meta["config"]),
            audit=audit,
            provenance=meta["provenance"],
            box=box,
            **arrays,
        )

    def put(self, key: str, field: SolutionField) -> None:
        npz, meta_path = self._paths(key)
        meta = {
            "grid": field.grid.to_dict(),
            "config": field.config.to_dict(),
            "audit": {
                k: v
                for k, v in field.audit.to_dict().items()
                if k not in ("negative_seen", "monotonicity_violated")
            },
            "provenance": field.provenance,
            "box": list(field.box) if field.box is not None else None,
        }
        try:
            with self._lock:
                self.directory.mkdir(parents=True, exist_ok=True)
                tmp = npz.with_suffix(".tmp.npz")
                np.savez(tmp, values=field.values, x=field.x, t=field.t, c0=field.c0)
                tmp.replace(npz)
                meta_path.write_text(json.dumps(meta, sort_keys=True, indent=1))
        except OSError as exc:
            raise OSError(f"cannot write reference cache entry {key}: {exc}") from exc


def reference_solution(
    problem: ValidatedProblem,
    theta_ref: float = DEFAULT_REF_THETA,
    cache: ReferenceCache | None = None,
    grid: GridSpec | None = None,
    config: SchemeConfig = REFERENCE_CONFIG,
) -> SolutionField:
    """Three-step Gregory DQ solution used as the benchmark.

    ``grid`` overrides the uniform ``theta_ref`` mesh.  With a cache, a
    repeated call returns the stored bits.
    """
    grid = grid or GridSpec.from_theta(problem, theta_ref)
    key = _field_key(problem, grid, config)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    field = run_simulation(problem, grid, config)
    if cache is not None:
        cache.put(key, field)
    return field


def convergence_study(
    problem: ValidatedProblem,
    config: SchemeConfig,
    thetas: Sequence[float],
    reference: SolutionField,
    workers: int = 1,
    normalization: str = "nodes",
) -> ConvergenceReport:
    """Errors against ``reference`` and experimental orders for each step.

    Runs are independent and may use several threads; the report does not
    depend on ``workers``.
    """
    grids = [GridSpec.from_theta(problem, th) for th in thetas]
    for th, g in zip(thetas, grids):
        try:
            g.nested_factor(reference.grid)
        except GridError as exc:
            raise GridError(f"theta={th!r}: {exc}") from None

    def one(g: GridSpec) -> float:
        f = run_simulation(problem, g, config)
        return mean_spacetime_error(f, reference, normalization)

    if workers > 1 and len(grids) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(one, grids))
    else:
        errors = [one(g) for g in grids]
    return ConvergenceReport.from_errors(
        config.label,
        list(thetas),
        errors,
        reference.provenance,
        normalization=normalization,
    )


def timing_study(
    problem: ValidatedProblem,
    configs: Iterable[SchemeConfig],
    thetas: Sequence[float],
    reference: SolutionField,
    normalization: str = "nodes",
) -> list[dict]:
    """Wall-clock time and error of every (scheme, step) pair.

    Times depend on the machine; only the error columns are reproducible.
    """
    rows = []
    for config in configs:
        for th in thetas:
            grid = GridSpec.from_theta(problem, th)
            start = time.perf_counter()
            f = run_simulation(problem, grid, config)
            elapsed = time.perf_counter() - start
            rows.append(
                {
                    "scheme": config.label,
                    "theta": th,
                    "seconds": elapsed,
                    "E": mean_spacetime_error(f, reference, normalization),
                }
            )
    return rows


def random_problem(
    rng: np.random.Generator,
    samples: int = 6,
    T: float = 1.0,
    f_min: float = 0.05,
) -> ProblemSpec:
    """A random problem satisfying every model assumption.

    All known functions are piecewise-linear tables on ``[0, 1]`` with
    ``samples`` nodes; ``f >= f_min`` and ``I >= 0.05`` keep the rate away
    from zero so decay is strict.
    """

    def table(lo, hi):
        xs = np.linspace(0.0, 1.0, samples)
        return FunctionSpec.table(xs, rng.uniform(lo, hi, samples))

    return ProblemSpec(
        L=1.0,
        T=float(T),
        lambda0=0.0,
        lambda_star=1.0,
        a1=float(rng.uniform(0.5, 2.0)),
        a2=float(rng.uniform(0.0, 2.0)),
        mu=float(rng.uniform(0.05, 1.0)),
        c0=table(0.1, 1.0),
        C0=DERIVE,
        f=table(f_min, 1.0),
        I=table(0.05, 1.0),
        epsA=table(0.0, 6.0),
        epsB=table(0.0, 6.0),
        name="random",
    )


def study_digest(report: ConvergenceReport) -> str:
    """sha256 of a report's numbers, for determinism checks."""
    blob = json.dumps(report.to_rows(), default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()

