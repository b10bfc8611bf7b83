"""YAML problem files.

Schema (unknown keys are rejected)::

    name: test-1                # optional
    notes: free text            # optional
    qualitative: false          # optional; true for surrogate data
    L: 1.0
    T: 1.0
    lambda0: 0.0
    lambda_star: 1.0
    a1: 1.0
    a2: 1.0
    mu: 0.1
    functions:
      c0:  {builtin: gaussian, params: [1.0, 0.0, 5.0]}
      C0:  derive               # or a function block
      f:   {builtin: polynomial, params: [2.0, -1.0]}
      I:   {table: {x: [0, 1], y: [0, 1]}}
      epsA: ...
      epsB: ...
    grid:                       # optional default mesh
      nx: 128
      nt: 128
      nl: 128
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, DomainError
from .grid import GridSpec
from .model import DERIVE, FunctionSpec, ProblemSpec

__all__ = ["ProblemConfig", "function_from_dict", "load_problem_config", "problem_from_dict"]

_SCALARS = ("L", "T", "lambda0", "lambda_star", "a1", "a2", "mu")
_FUNCTIONS = ("c0", "C0", "f", "I", "epsA", "epsB")
_TOP = set(_SCALARS) | {"name", "notes", "qualitative", "functions", "grid"}


@dataclass(frozen=True)
class ProblemConfig:
    """A parsed problem file."""

    spec: ProblemSpec
    grid: GridSpec | None = None
    qualitative: bool = False
    raw: dict = field(default_factory=dict, repr=False, compare=False)


def _reject_unknown(block: dict, allowed, where: str):
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key {extra[0]!r} in {where}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def function_from_dict(block: Any, where: str) -> FunctionSpec:
    """Parse one ``{builtin: ..., params: [...]}`` or ``{table: {x, y}}`` block."""
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be a mapping, got {block!r}")
    try:
        if "builtin" in block:
            _reject_unknown(block, ("builtin", "params"), where)
            params = block.get("params", [])
            if not isinstance(params, list):
                raise ConfigError(f"{where}.params must be a list")
            return FunctionSpec.builtin(
                str(block["builtin"]), *[_number(p, f"{where}.params") for p in params]
            )
        if "table" in block:
            _reject_unknown(block, ("table",), where)
            tbl = block["table"]
            if not isinstance(tbl, dict):
                raise ConfigError(f"{where}.table must be a mapping")
            _reject_unknown(tbl, ("x", "y"), f"{where}.table")
            xs = [_number(v, f"{where}.table.x") for v in tbl.get("x", [])]
            ys = [_number(v, f"{where}.table.y") for v in tbl.get("y", [])]
            return FunctionSpec.table(xs, ys)
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    keys = sorted(block)
    raise ConfigError(f"unknown key {keys[0]!r} in {where}" if keys else f"{where} is empty")


def problem_from_dict(data: Any) -> ProblemConfig:
    """Build a :class:`ProblemConfig` from already-parsed YAML."""
    if not isinstance(data, dict):
        raise ConfigError("problem file must contain a mapping at top level")
    _reject_unknown(data, _TOP, "problem")
    for key in (*_SCALARS, "functions"):
        if key not in data:
            raise ConfigError(f"missing key {key!r}")
    scalars = {k: _number(data[k], k) for k in _SCALARS}
    fns = data["functions"]
    if not isinstance(fns, dict):
        raise ConfigError("functions must be a mapping")
    _reject_unknown(fns, _FUNCTIONS, "functions")
    parsed = {}
    for key in _FUNCTIONS:
        if key not in fns:
            raise ConfigError(f"missing key 'functions.{key}'")
        if key == "C0" and fns[key] == DERIVE:
            parsed[key] = DERIVE
        else:
            parsed[key] = function_from_dict(fns[key], f"functions.{key}")
    grid = None
    if "grid" in data:
        g = data["grid"]
        if not isinstance(g, dict):
            raise ConfigError("grid must be a mapping")
        _reject_unknown(g, ("nx", "nt", "nl"), "grid")
        try:
            grid = GridSpec.from_counts(int(g["nx"]), int(g["nt"]), int(g["nl"]))
        except KeyError as exc:
            raise ConfigError(f"missing key 'grid.{exc.args[0]}'") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"grid: {exc}") from exc
    spec = ProblemSpec(
        **scalars,
        **parsed,
        name=str(data.get("name", "")),
        notes=str(data.get("notes", "")),
    )
    return ProblemConfig(spec, grid, bool(data.get("qualitative", False)), data)


def load_problem_config(path) -> ProblemConfig:
    """Read and parse a YAML problem file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML: {exc}") from exc
    return problem_from_dict(data)
