"""Composite quadrature rules on uniform meshes.

Four weight families are provided, all built from end corrections on a row of
unit weights:

``rectangular``
    Left-endpoint rule, weight 1 on nodes ``0..n-1`` and 0 on node ``n``.
``trapezoidal``
    End weights 1/2.
``gregory-1``
    End corrections ``5/12, 13/12`` (two-step rule, local order 3).
``gregory-2``
    End corrections ``3/8, 7/6, 23/24`` (three-step rule, local order 4).

For a Gregory rule with ``n0`` end corrections the row over ``n + 1`` nodes is
the all-ones row with ``e_i - 1`` added at nodes ``i`` and ``n - i``.  When
``n < 2 n0 - 1`` the two correction spans overlap and simply add up; this
keeps the rule exact for constants and linears and every weight positive.
Below ``n0`` the row falls back to the trapezoid.

All sums are accumulated with compensated summation so that results are
independent of evaluation order and worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "LABELS",
    "WeightScheme",
    "assemble_row",
    "composite_integral",
    "cumulative_space_integral",
    "cumulative_space_integrals",
    "make_weight_scheme",
    "prefix_sums",
    "row_sums",
]

_END_CORRECTIONS: dict[str, tuple[Fraction, ...]] = {
    "trapezoidal": (Fraction(1, 2),),
    "gregory-1": (Fraction(5, 12), Fraction(13, 12)),
    "gregory-2": (Fraction(3, 8), Fraction(7, 6), Fraction(23, 24)),
}

LABELS = ("rectangular", "trapezoidal", "gregory-1", "gregory-2")


@dataclass(frozen=True)
class WeightScheme:
    """A family of composite quadrature rows indexed by the interval count.

    Attributes
    ----------
    label : str
        One of :data:`LABELS`.
    n0 : int
        Number of end-correction weights (1 for rectangular and trapezoidal).
    end_weights : tuple of Fraction
        Corrected weights at the first ``n0`` nodes (mirrored at the right end
        for the closed rules).
    """

    label: str
    n0: int
    end_weights: tuple[Fraction, ...]

    @property
    def closed(self) -> bool:
        return self.label != "rectangular"

    @property
    def convolution_weights(self) -> tuple[float, ...]:
        """Stationary weights ``omega_0..omega_{n0-1}``; the tail is 1."""
        return tuple(float(w) for w in self.end_weights)

    def starting_weights(self, n: int) -> np.ndarray:
        """Weights of the first ``n0`` nodes in the row over ``n + 1`` nodes."""
        return assemble_row(self, n)[: self.n0].copy()

    @property
    def W(self) -> float:
        """Largest weight over the whole family."""
        return _family_max(self)

    def __repr__(self) -> str:
        return f"WeightScheme({self.label!r})"


def make_weight_scheme(label: str) -> WeightScheme:
    """Return the weight family named ``label``."""
    if label == "rectangular":
        return WeightScheme("rectangular", 1, (Fraction(1),))
    try:
        ends = _END_CORRECTIONS[label]
    except KeyError:
        raise DomainError(f"unknown weight label {label!r}; expected one of {LABELS}") from None
    return WeightScheme(label, len(ends), ends)


@lru_cache(maxsize=None)
def _exact_corrections(label: str, n: int) -> tuple[tuple[int, Fraction], ...]:
    """Non-unit entries ``(index, weight)`` of the exact row over ``0..n``."""
    if label == "rectangular":
        return ((n, Fraction(0)),)
    ends = _END_CORRECTIONS[label]
    if n < len(ends):
        ends = _END_CORRECTIONS["trapezoidal"]
    w: dict[int, Fraction] = {}
    for i, e in enumerate(ends):
        for k in (i, n - i):
            w[k] = w.get(k, Fraction(1)) + e - 1
    return tuple(sorted((k, v) for k, v in w.items() if v != 1))


def _exact_row(label: str, n: int) -> list[Fraction]:
    w = [Fraction(1)] * (n + 1)
    for k, v in _exact_corrections(label, n):
        w[k] = v
    return w


@lru_cache(maxsize=1024)
def _float_row(label: str, n: int) -> np.ndarray:
    row = np.ones(n + 1)
    for k, v in _exact_corrections(label, n):
        row[k] = float(v)
    row.setflags(write=False)
    return row


def assemble_row(scheme: WeightScheme, n: int) -> np.ndarray:
    """Weight row over the ``n + 1`` nodes ``0..n`` (read-only array).

    Raises
    ------
    DomainError
        If ``n < 1``.
    """
    if n < 1:
        raise DomainError(f"a quadrature row needs at least one interval, got n={n}")
    return _float_row(scheme.label, int(n))


@lru_cache(maxsize=None)
def _family_max(scheme: WeightScheme) -> float:
    # rows are stationary from n = 2 n0 - 1 on
    return max(float(max(_exact_row(scheme.label, n))) for n in range(1, 2 * scheme.n0 + 2))


def composite_integral(row, values, step: float) -> float:
    """``step * sum(row * values)`` with compensated summation."""
    row = np.asarray(row, dtype=float)
    values = np.asarray(values, dtype=float)
    if row.shape != values.shape:
        raise DomainError(f"row has {row.size} weights but {values.size} values were given")
    return step * math.fsum((row * values).tolist())


def prefix_sums(values) -> np.ndarray:
    """Compensated running sums ``s_k = v_0 + ... + v_{k-1}``, ``s_0 = 0``."""
    out = np.empty(len(values) + 1)
    out[0] = 0.0
    s = 0.0
    comp = 0.0
    for k, v in enumerate(np.asarray(values, dtype=float).tolist()):
        t = s + v
        # Neumaier: keep the low-order part of whichever operand was smaller
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
        out[k + 1] = s + comp
    return out


def row_sums(matrix) -> np.ndarray:
    """Exactly rounded sum of each row of a 2-D array."""
    return np.array([math.fsum(r) for r in np.asarray(matrix, dtype=float).tolist()])


def cumulative_space_integral(values, scheme: WeightScheme, dx: float) -> float:
    """Quadrature of ``values`` (nodes ``0..j``) over ``[0, j dx]``.

    Returns 0 for a single node.
    """
    v = np.asarray(values, dtype=float)
    if np.any(v < 0):
        raise DomainError("space integrand must be nonnegative")
    j = v.size - 1
    if j < 0:
        raise DomainError("no values given")
    if j == 0:
        return 0.0
    return composite_integral(assemble_row(scheme, j), v, dx)


def cumulative_space_integrals(values, scheme: WeightScheme, dx: float) -> np.ndarray:
    """All partial integrals ``X_j`` of ``values`` over ``[0, x_j]``, ``j = 0..N``.

    Equivalent to calling :func:`cumulative_space_integral` on every prefix,
    but linear in ``N``: the stationary rows are a running sum plus end
    corrections.
    """
    v = np.asarray(values, dtype=float)
    n_nodes = v.size
    out = np.zeros(n_nodes)
    if n_nodes <= 1:
        return out
    if scheme.label == "rectangular":
        out[:] = dx * prefix_sums(v)[:-1]
        return out
    P = prefix_sums(v)
    ends = [float(e) - 1.0 for e in scheme.end_weights]
    stationary = 2 * scheme.n0 - 1
    for j in range(1, min(stationary, n_nodes)):
        out[j] = composite_integral(assemble_row(scheme, j), v[: j + 1], dx)
    if n_nodes > stationary:
        j = np.arange(stationary, n_nodes)
        corr = np.zeros(j.size)
        for i, d in enumerate(ends):
            corr += d * v[i] + d * v[j - i]
        out[stationary:] = dx * (P[j + 1] + corr)
    return out
