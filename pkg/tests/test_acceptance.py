"""Acceptance criteria, each at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line, printed in the terminal
summary (and to stdout under ``-s``).  Run with::

    pytest tests/test_acceptance.py -v
"""

import math
import subprocess
import sys
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from photokin import GridSpec, SchemeConfig, product_concentration, run_simulation, validate_problem
from photokin.experiments import builtin_config, builtin_problem, convergence_study, random_problem, reference_solution
from photokin.metrics import audit_field, total_reduction_series
from photokin.quadrature import LABELS, assemble_row, composite_integral, make_weight_scheme

pytestmark = pytest.mark.acceptance

THETAS = [2.0**-k for k in (2, 3, 4, 5)]


def record(criterion: int, title: str, failures: list[str]) -> None:
    status = "PASS" if not failures else "FAIL"
    line = f"criterion {criterion} {status}: {title}"
    if failures:
        line += " | " + "; ".join(failures)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, line


@lru_cache(maxsize=None)
def _test1():
    return validate_problem(builtin_problem("test-1"))


@lru_cache(maxsize=None)
def _reference():
    return reference_solution(_test1(), 2.0**-7)


def _table_failures(columns) -> list[str]:
    failures = []
    for config, errors, rel, orders, otol in columns:
        rep = convergence_study(_test1(), config, THETAS, _reference())
        for th, got, want in zip(THETAS, rep.errors, errors):
            if not abs(got - want) <= rel * want:
                failures.append(f"{config.label} theta={th:g}: E={got:.3e} vs {want:.3e} (+-{rel:.0%})")
        for th, got, want in zip(THETAS[1:], rep.orders[1:], orders):
            if not abs(got - want) <= otol:
                failures.append(f"{config.label} theta={th:g}: eoc={got:.3f} vs {want} (+-{otol})")
    return failures


@lru_cache(maxsize=None)
def _table_fields():
    configs = [
        SchemeConfig("nsfd", "phi1"),
        SchemeConfig("rq"),
        SchemeConfig("nsfd", "phi2"),
        SchemeConfig("pc", "phi2"),
        SchemeConfig("dq", weights="gregory-1"),
        SchemeConfig("dq", weights="gregory-2"),
    ]
    p = _test1()
    fields = [run_simulation(p, GridSpec.from_theta(p, th), c) for c in configs for th in THETAS]
    return fields + [_reference()]


EXPLICIT_CONFIGS = (
    SchemeConfig("nsfd", "phi1"),
    SchemeConfig("nsfd", "phi2"),
    SchemeConfig("nsfd", "phi3"),
    SchemeConfig("pc", "phi2"),
    SchemeConfig("rq"),
)


def _random_case(rng, dt_lo, dt_hi, nt_max):
    dt = float(2.0 ** rng.uniform(math.log2(dt_lo), math.log2(dt_hi)))
    nt = int(rng.integers(1, nt_max + 1))
    grid = GridSpec(int(rng.integers(2, 9)), nt, int(rng.integers(2, 9)))
    return validate_problem(random_problem(rng, T=dt * nt)), grid


@lru_cache(maxsize=None)
def _random_explicit_fields():
    rng = np.random.default_rng(31415)
    out = []
    for _ in range(200):
        problem, grid = _random_case(rng, 2.0**-6, 1e2, 4)
        out.extend(run_simulation(problem, grid, c) for c in EXPLICIT_CONFIGS)
    return out


@lru_cache(maxsize=None)
def _random_dq_fields():
    rng = np.random.default_rng(27182)
    out = []
    for _ in range(50):
        problem, grid = _random_case(rng, 2.0**-5, 4.0, 6)
        for label in ("gregory-1", "gregory-2"):
            out.append((problem, run_simulation(problem, grid, SchemeConfig("dq", weights=label))))
    return out


def test_criterion_1_first_order_errors():
    failures = _table_failures(
        [
            (SchemeConfig("nsfd", "phi1"), [2.63e-2, 1.36e-2, 6.91e-3, 3.49e-3], 0.10, [0.96, 0.97, 0.99], 0.1),
            (SchemeConfig("rq"), [2.45e-2, 1.24e-2, 6.22e-3, 3.12e-3], 0.10, [0.99, 0.99, 1.00], 0.1),
            (SchemeConfig("nsfd", "phi2"), [7.77e-3, 6.89e-3, 4.26e-3, 2.35e-3], 0.15, [0.17, 0.69, 0.86], 0.1),
        ]
    )
    record(1, "Test 1 NSFD-phi1, RQ, NSFD-phi2 errors and orders", failures)


def test_criterion_2_high_order_errors():
    failures = _table_failures(
        [
            (SchemeConfig("pc", "phi2"), [3.07e-4, 8.74e-5, 2.33e-5, 6.02e-6], 0.10, [1.82, 1.91, 1.95], 0.2),
            (SchemeConfig("dq", weights="gregory-1"), [1.74e-4, 2.92e-5, 4.30e-6, 5.84e-7], 0.15, [2.57, 2.77, 2.88], 0.2),
            (SchemeConfig("dq", weights="gregory-2"), [1.46e-4, 1.65e-5, 1.33e-6, 9.15e-8], 0.20, [3.15, 3.63, 3.86], 0.2),
        ]
    )
    record(2, "Test 1 PC, DQ-g1, DQ-g2 errors and orders", failures)


def test_criterion_3_dynamical_consistency():
    failures = []
    for f in _random_explicit_fields():
        v = f.values
        if not np.all(v > 0):
            failures.append(f"{f.config.label} {f.grid}: nonpositive value")
        elif not np.all(v[1:] < v[:-1]):
            failures.append(f"{f.config.label} {f.grid}: not strictly decreasing")
    record(3, f"{len(_random_explicit_fields())} random explicit fields positive and strictly decreasing", failures[:5])


def test_criterion_4_dq_box():
    failures = []
    for problem, f in _random_dq_fields():
        n = f.grid
        dt, dl = problem.T / n.nt, (problem.lambda_star - problem.lambda0) / n.nl
        W = make_weight_scheme(f.config.weights).W
        c0 = f.c0
        lower = float(np.min(c0)) * math.exp(-dt * (n.nt + 1) * dl * (n.nl + 1) * W**2 * problem.R * problem.F)
        if not math.isclose(f.box[0], lower, rel_tol=1e-12):
            failures.append(f"{f.config.label} {n}: box lower {f.box[0]!r} vs {lower!r}")
        if not (np.all(f.values >= lower) and np.all(f.values <= np.max(c0))):
            failures.append(f"{f.config.label} {n}: value outside [{lower:.3e}, {np.max(c0):.3e}]")
        if not f.audit.max_solver_residual <= 1e-14:
            failures.append(f"{f.config.label} {n}: residual {f.audit.max_solver_residual:.2e}")
    record(4, f"{len(_random_dq_fields())} random DQ fields inside the box with residual <= 1e-14", failures[:5])


def test_criterion_5_conservation():
    fields = _table_fields() + _random_explicit_fields() + [f for _, f in _random_dq_fields()]
    failures = []
    for f in fields:
        b = product_concentration(f)
        resid = float(np.max(np.abs(f.values + b.values - f.c0[None, :])))
        ulp = float(np.spacing(np.max(f.c0)))
        if not resid <= ulp:
            failures.append(f"{f.config.label} {f.grid}: residual {resid!r} > {ulp!r}")
    record(5, f"c_A + c_B - c0 within 1 ulp on {len(fields)} fields", failures[:5])


def test_criterion_6_quadrature_exactness():
    degrees = {"rectangular": 0, "trapezoidal": 1, "gregory-1": 2, "gregory-2": 3}
    failures = []
    for label in LABELS:
        scheme = make_weight_scheme(label)
        for n in (2 * scheme.n0 + 1, 2 * scheme.n0 + 2, 10, 64, 1000):
            row = assemble_row(scheme, n)
            t = np.linspace(0.0, 1.0, n + 1)
            for d in range(degrees[label] + 1):
                got = composite_integral(row, t**d, 1.0 / n)
                err = abs(got - 1.0 / (d + 1)) * (d + 1)
                if not err <= 1e-12:
                    failures.append(f"{label} degree {d} n={n}: rel err {err:.2e}")
        # the rectangular rule is open on the right: its last node is not used
        for n in range(1, 10001):
            row = assemble_row(scheme, n)
            used = row[:-1] if label == "rectangular" else row
            if not np.all(used > 0):
                failures.append(f"{label} n={n}: nonpositive weight")
                break
    record(6, "quadrature exactness degrees 0/1/2/3 and positive weights up to n=1e4", failures[:6])


def test_criterion_7_ftrq_failure():
    cfg = builtin_config("test-2-long")
    problem = validate_problem(cfg.spec)
    dt_hours = problem.T / cfg.grid.nt / 3600.0
    ftrq = run_simulation(problem, cfg.grid, SchemeConfig("ftrq"))
    nsfd = run_simulation(problem, cfg.grid, SchemeConfig("nsfd"))
    failures = []
    if not abs(dt_hours - 5.6e-3) <= 0.05e-3:
        failures.append(f"time step {dt_hours:.4g} h is not the 5.6e-3 h regime")
    if not ftrq.audit.negative_seen:
        failures.append("ftrq stayed positive")
    if not audit_field(nsfd).guarantees_hold("nsfd"):
        failures.append("nsfd failed an audit")
    record(7, f"FTRQ negative, NSFD clean on the surrogate at dt={dt_hours:.3g} h", failures)


def test_criterion_8_remaining_fraction():
    cfg = builtin_config("test-2")
    problem = validate_problem(cfg.spec)
    field = run_simulation(problem, cfg.grid, SchemeConfig("dq"))
    rc = total_reduction_series(field.values, problem)
    failures = [] if field.t[-1] == 180.0 and rc[-1] < 0.10 else [f"R_c({field.t[-1]:g} s) = {rc[-1]:.4f}"]
    record(8, f"surrogate R_c(180 s) = {rc[-1]:.4f} < 0.10", failures)


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "photokin.cli", *args], capture_output=True, text=True)


def test_criterion_9_determinism(tmp_path):
    failures = []
    for tag in ("a", "b"):
        r = _cli("run", "--problem", "test-1", "--scheme", "dq", "--weights", "gregory-1", "--theta", "2^-3", "--out", str(tmp_path / f"run-{tag}"))
        if r.returncode:
            failures.append(f"run {tag} exited {r.returncode}: {r.stderr.strip()}")
    a, b = tmp_path / "run-a", tmp_path / "run-b"
    for name in ("field.csv", "audit.json", "manifest.json"):
        if not (a / name).exists() or (a / name).read_bytes() != (b / name).read_bytes():
            failures.append(f"run {name} differs")
    cache = str(tmp_path / "cache")
    for tag, workers in (("a", "1"), ("b", "4"), ("c", "4")):
        r = _cli(
            "convergence", "--problem", "test-1", "--scheme", "pc", "--phi", "phi2", "--ref-theta", "2^-6",
            "--workers", workers, "--cache-dir", cache, "--out", str(tmp_path / f"conv-{tag}"),
        )
        if r.returncode:
            failures.append(f"convergence {tag} exited {r.returncode}: {r.stderr.strip()}")
    first = (tmp_path / "conv-a" / "convergence.csv").read_bytes()
    for tag in ("b", "c"):
        if (tmp_path / f"conv-{tag}" / "convergence.csv").read_bytes() != first:
            failures.append(f"convergence run {tag} differs")
    record(9, "reruns give bit-identical CSVs across worker counts", failures)
