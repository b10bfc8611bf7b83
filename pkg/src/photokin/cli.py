"""Command-line front end.

Exit codes: 0 success, 1 audit or contract failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_problem_config, problem_from_dict
from .errors import ConfigError, DomainError, GridError, PhotokinError, ValidationError
from .experiments import (
    BUILTIN_PROBLEMS,
    DEFAULT_REF_THETA,
    EXTENDED_REF_THETA,
    ReferenceCache,
    builtin_config,
    convergence_study,
    reference_solution,
)
from .grid import GridSpec
from .metrics import (
    audit_field,
    mean_space_error_series,
    min_concentration_series,
    total_reduction_series,
    write_csv,
)
from .model import validate_problem
from .quadrature import LABELS, assemble_row, make_weight_scheme
from .simulation import SCHEMES, SchemeConfig, product_concentration, run_simulation

__all__ = ["main"]

CACHE_ENV = "PHOTOKIN_CACHE_DIR"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FIELD_COLUMNS = ["j", "n", "x", "t", "c", "c_B"]
DETERMINISM_NOTE = "no random numbers; identical manifests reproduce outputs bit for bit"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _theta(text: str) -> float:
    """Accept ``0.125``, ``2^-3`` or ``2**-3``."""
    t = text.replace("**", "^")
    try:
        if "^" in t:
            base, exp = t.split("^")
            return float(base) ** float(exp)
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid step {text!r}") from None


def _refinement(text: str):
    return text if text == "auto" else int(text)


def _add_problem_args(p):
    p.add_argument("--problem", default="test-1", help=f"bundled id {BUILTIN_PROBLEMS} or a YAML file")
    p.add_argument("--horizon", type=float, help="override the time horizon T")


def _add_scheme_args(p):
    p.add_argument("--scheme", choices=SCHEMES, default="nsfd")
    p.add_argument("--phi", choices=("phi1", "phi2", "phi3"), default="phi1", help="NSFD/PC denominator")
    p.add_argument("--gamma", type=float, help="phi2/phi3 parameter (default max f)")
    p.add_argument("--weights", choices=("gregory-1", "gregory-2"), default="gregory-2", help="DQ rule")
    p.add_argument("--tol", type=float, default=1e-14, help="DQ fixed-point tolerance")
    p.add_argument("--start-phi", choices=("phi1", "phi2", "phi3"), default="phi2", help="DQ bootstrap denominator")
    p.add_argument("--start-refinement", type=_refinement, default=1, help="DQ bootstrap time refinement (int or auto)")


def _add_grid_args(p):
    p.add_argument("--theta", type=_theta, help="common step for x, t and lambda (e.g. 2^-3)")
    p.add_argument("--dx", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--dl", type=float)
    p.add_argument("--nx", type=int)
    p.add_argument("--nt", type=int)
    p.add_argument("--nl", type=int)


def _add_cache_args(p):
    p.add_argument("--cache-dir", help=f"reference cache directory (env {CACHE_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="photokin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="simulate one scheme and write the field")
    _add_problem_args(p)
    _add_scheme_args(p)
    _add_grid_args(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("convergence", help="errors and orders against a reference")
    _add_problem_args(p)
    _add_scheme_args(p)
    p.add_argument("--thetas", type=_theta, nargs="+", default=[2.0**-k for k in range(2, 6)])
    p.add_argument("--ref-theta", type=_theta, default=None, help="reference step (default 2^-7)")
    p.add_argument("--extended", action="store_true", help="reference at 2^-9")
    p.add_argument("--normalization", choices=("nodes", "printed"), default="nodes")
    p.add_argument("--workers", type=int, default=1)
    _add_cache_args(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("audit", help="check positivity, monotonicity and bounds of a field CSV")
    p.add_argument("field", help="field CSV written by 'run'")
    p.add_argument("--scheme", choices=SCHEMES, help="scheme whose guarantees apply (default from manifest)")

    p = sub.add_parser("series", help="time series of a diagnostic")
    p.add_argument("field", help="field CSV written by 'run'")
    p.add_argument("--metric", required=True, choices=("m_c", "R_c", "e_t"))
    p.add_argument("--reference", help="reference field CSV (for e_t)")
    p.add_argument("--problem", help="problem for R_c's C0(L) (default from the run manifest)")
    p.add_argument("--out", help="output CSV (default stdout)")

    p = sub.add_parser("weights", help="dump a quadrature weight row")
    p.add_argument("--weights", choices=LABELS, default="gregory-2")
    p.add_argument("--n", type=int, required=True, help="number of intervals")
    p.add_argument("--out", help="output CSV (default stdout)")
    return parser


def _load_problem(args, problem_arg=None):
    ident = problem_arg or args.problem
    cfg = builtin_config(ident) if ident in BUILTIN_PROBLEMS else load_problem_config(ident)
    spec = cfg.spec
    if getattr(args, "horizon", None) is not None:
        spec = dataclasses.replace(spec, T=args.horizon)
    return cfg, validate_problem(spec)


def _grid(args, cfg, problem) -> GridSpec:
    if args.nx is not None or args.nt is not None or args.nl is not None:
        if None in (args.nx, args.nt, args.nl):
            raise ConfigError("--nx, --nt and --nl must be given together")
        return GridSpec.from_counts(args.nx, args.nt, args.nl)
    if args.dx is not None or args.dt is not None or args.dl is not None:
        if None in (args.dx, args.dt, args.dl):
            raise ConfigError("--dx, --dt and --dl must be given together")
        return GridSpec.from_steps(problem, args.dx, args.dt, args.dl)
    if args.theta is not None:
        return GridSpec.from_theta(problem, args.theta)
    if cfg.grid is not None:
        return cfg.grid
    raise ConfigError("no grid: give --theta, --dx/--dt/--dl or --nx/--nt/--nl")


def _scheme(args) -> SchemeConfig:
    return SchemeConfig(
        scheme=args.scheme,
        phi=args.phi,
        gamma=args.gamma,
        weights=args.weights,
        tol=args.tol,
        start_phi=args.start_phi,
        start_refinement=args.start_refinement,
    )


def _manifest(command: str, resolved: dict, outputs: list[str]) -> dict:
    return {
        "command": command,
        "resolved": resolved,
        "outputs": sorted(outputs),
        "determinism": DETERMINISM_NOTE,
        "version": __version__,
    }


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, sort_keys=True, indent=1, default=repr) + "\n")


def write_field_csv(path, field) -> Path:
    cB = product_concentration(field).values
    rows = []
    for n in range(field.values.shape[0]):
        for j in range(field.values.shape[1]):
            rows.append([j, n, field.x[j], field.t[n], field.values[n, j], cB[n, j]])
    return write_csv(path, FIELD_COLUMNS, rows)


def read_field_csv(path):
    """Return ``(t, x, c, c_B)`` arrays from a field CSV."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != FIELD_COLUMNS:
                raise ConfigError(f"{path}: expected columns {FIELD_COLUMNS}, got {reader.fieldnames}")
            recs = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not recs:
        raise ConfigError(f"{path}: empty field")
    try:
        js = np.array([int(r["j"]) for r in recs])
        ns = np.array([int(r["n"]) for r in recs])
        vals = {k: np.array([float(r[k]) for r in recs]) for k in ("x", "t", "c", "c_B")}
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    nx, nt = js.max() + 1, ns.max() + 1
    if len(recs) != nx * nt:
        raise ConfigError(f"{path}: {len(recs)} rows do not fill a {nt} x {nx} grid")
    c = np.full((nt, nx), np.nan)
    cB = np.full((nt, nx), np.nan)
    x = np.zeros(nx)
    t = np.zeros(nt)
    c[ns, js] = vals["c"]
    cB[ns, js] = vals["c_B"]
    x[js] = vals["x"]
    t[ns] = vals["t"]
    if np.isnan(c).any():
        raise ConfigError(f"{path}: missing grid nodes")
    return t, x, c, cB


def _read_manifest(field_path) -> dict | None:
    m = Path(field_path).with_name("manifest.json")
    if m.exists():
        try:
            return json.loads(m.read_text())
        except json.JSONDecodeError:
            return None
    return None


def cmd_run(args) -> int:
    cfg, problem = _load_problem(args)
    grid = _grid(args, cfg, problem)
    scheme = _scheme(args)
    field = run_simulation(problem, grid, scheme)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_field_csv(out / "field.csv", field)
    summary = audit_field(field)
    audit = {"summary": summary.to_dict(), "steps": field.audit.to_dict(), "scheme": scheme.scheme}
    _write_json(out / "audit.json", audit)
    resolved = {
        "problem": problem.spec.to_dict(),
        "grid": grid.to_dict(),
        "scheme": scheme.to_dict(),
        "box": list(field.box) if field.box else None,
        "provenance": field.provenance,
    }
    _write_json(out / "manifest.json", _manifest("run", resolved, ["field.csv", "audit.json", "manifest.json"]))
    print(
        f"{scheme.label}: all_positive={summary.all_positive} "
        f"monotone={summary.columnwise_monotone} within_box={summary.within_box}"
    )
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg, problem = _load_problem(args)
    scheme = _scheme(args)
    ref_theta = args.ref_theta or (EXTENDED_REF_THETA if args.extended else DEFAULT_REF_THETA)
    cache_dir = args.cache_dir or os.environ.get(CACHE_ENV)
    cache = ReferenceCache(cache_dir) if cache_dir else None
    ref = reference_solution(problem, ref_theta, cache)
    report = convergence_study(problem, scheme, args.thetas, ref, workers=args.workers, normalization=args.normalization)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "convergence.csv")
    resolved = {
        "problem": problem.spec.to_dict(),
        "scheme": scheme.to_dict(),
        "thetas": list(args.thetas),
        "ref_theta": ref_theta,
        "reference": report.reference,
        "normalization": args.normalization,
    }
    _write_json(out / "manifest.json", _manifest("convergence", resolved, ["convergence.csv", "manifest.json"]))
    for r in report.rows:
        p = "" if r.order is None else f"{r.order:.2f}"
        print(f"{r.theta:<12g} {r.error:.3e} {p}")
    return EXIT_OK


def cmd_audit(args) -> int:
    t, x, c, cB = read_field_csv(args.field)
    manifest = _read_manifest(args.field) or {}
    resolved = manifest.get("resolved", {})
    scheme = args.scheme or resolved.get("scheme", {}).get("scheme")
    box = resolved.get("box") if scheme == "dq" else None
    summary = audit_field(c, c0=c[0], box=tuple(box) if box else None)
    cons = float(np.max(np.abs(c + cB - c[0][None, :])))
    ok = summary.guarantees_hold(scheme)
    print(f"scheme={scheme or 'unknown'}")
    print(f"all_positive={summary.all_positive}")
    if summary.first_nonpositive:
        n, j = summary.first_nonpositive
        print(f"  first nonpositive value at n={n}, j={j}: {c[n, j]!r}")
    print(f"columnwise_monotone={summary.columnwise_monotone}")
    if summary.first_increase:
        n, j = summary.first_increase
        print(f"  first increase at n={n}, j={j}")
    print(f"within_box={summary.within_box}")
    print(f"conservation_residual={cons!r}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_series(args) -> int:
    t, x, c, _ = read_field_csv(args.field)
    if args.metric == "m_c":
        values = min_concentration_series(c)
    elif args.metric == "R_c":
        manifest = _read_manifest(args.field)
        if args.problem is None and manifest:
            spec = problem_from_dict(manifest["resolved"]["problem"]).spec
            problem = validate_problem(spec)
        else:
            _, problem = _load_problem(args, args.problem or "test-1")
        values = total_reduction_series(c, problem)
    else:
        if not args.reference:
            raise ConfigError("--reference is required for e_t")
        _, _, ref, _ = read_field_csv(args.reference)
        values = mean_space_error_series(c, ref)
    rows = list(zip(t.tolist(), values.tolist()))
    if args.out:
        write_csv(args.out, ["t", args.metric], rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["t", args.metric])
        for a, b in rows:
            w.writerow([repr(a), repr(b)])
    return EXIT_OK


def cmd_weights(args) -> int:
    row = assemble_row(make_weight_scheme(args.weights), args.n)
    rows = list(enumerate(row.tolist()))
    if args.out:
        write_csv(args.out, ["k", "weight"], rows)
    else:
        print("k,weight")
        for k, w in rows:
            print(f"{k},{w!r}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "convergence": cmd_convergence,
    "audit": cmd_audit,
    "series": cmd_series,
    "weights": cmd_weights,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError, GridError, ValidationError) as exc:
        print(f"photokin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PhotokinError as exc:
        print(f"photokin: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
