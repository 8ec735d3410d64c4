"""Binary operations on the unit interval and sampled axiom certification.

A t-norm is an associative, commutative, monotone operation on [0, 1] with
identity 1; a t-conorm is its dual with identity 0.  Certification here is
numerical: each axiom is checked on a finite grid and reported with the worst
observed violation, so a report is evidence at a resolution, not a proof.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Tolerance for sampled equality/inequality checks.
EQUALITY_TOL = 1e-12

# A continuous operation may vary by at most this many cell widths across one
# grid cell.  All shipped operations are 1-Lipschitz in each argument, so the
# true cell variation is at most 2 cells; the factor 4 leaves slack for
# rounding without letting a jump discontinuity through.
CONTINUITY_SLACK = 4.0


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


def _check_unit(value, label: str):
    arr = np.asarray(value, dtype=float)
    if arr.size and not (np.all(arr >= 0.0) and np.all(arr <= 1.0)):
        raise DomainError(f"{label} must lie in [0, 1], got {value!r}")
    return arr if arr.ndim else float(arr)


@dataclass(frozen=True)
class UnitIntervalOp:
    """A named binary operation on [0, 1] claiming t-norm or t-conorm behaviour.

    ``fn`` must accept scalars; the shipped operations also broadcast over
    numpy arrays, which the certifier exploits (scalar-only callables are
    wrapped with ``np.vectorize`` automatically).
    """

    name: str
    kind: str  # "tnorm" | "tconorm"
    fn: Callable

    def __post_init__(self):
        if self.kind not in ("tnorm", "tconorm"):
            raise DomainError(f"kind must be 'tnorm' or 'tconorm', got {self.kind!r}")

    @property
    def identity_element(self) -> float:
        """1 for t-norms, 0 for t-conorms."""
        return 1.0 if self.kind == "tnorm" else 0.0

    def evaluate(self, a, b):
        """Apply the operation after checking both arguments lie in [0, 1]."""
        a = _check_unit(a, "a")
        b = _check_unit(b, "b")
        return self.fn(a, b)

    def __call__(self, a, b):
        return self.evaluate(a, b)


_TNORM_FNS = {
    "product": lambda a, b: a * b,
    "min": np.minimum,
    "lukasiewicz": lambda a, b: np.maximum(a + b - 1.0, 0.0),
}

_TCONORM_FNS = {
    "prob-sum": lambda a, b: a + b - a * b,
    "max": np.maximum,
    "bounded-sum": lambda a, b: np.minimum(a + b, 1.0),
}

TNORM_IDS = tuple(_TNORM_FNS)
TCONORM_IDS = tuple(_TCONORM_FNS)


def tnorm(name: str) -> UnitIntervalOp:
    """Look up a built-in t-norm: product, min, or lukasiewicz."""
    try:
        return UnitIntervalOp(name, "tnorm", _TNORM_FNS[name])
    except KeyError:
        raise DomainError(f"unknown t-norm {name!r}; choose from {TNORM_IDS}") from None


def tconorm(name: str) -> UnitIntervalOp:
    """Look up a built-in t-conorm: prob-sum, max, or bounded-sum."""
    try:
        return UnitIntervalOp(name, "tconorm", _TCONORM_FNS[name])
    except KeyError:
        raise DomainError(f"unknown t-conorm {name!r}; choose from {TCONORM_IDS}") from None


def builtin_op(name: str) -> UnitIntervalOp:
    """Look up any built-in operation by id string."""
    if name in _TNORM_FNS:
        return tnorm(name)
    if name in _TCONORM_FNS:
        return tconorm(name)
    raise DomainError(f"unknown operation {name!r}; choose from {TNORM_IDS + TCONORM_IDS}")


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of one sampled axiom check.

    ``passed`` holds exactly when ``worst_violation <= tolerance``.  The
    witness is the input tuple achieving the worst violation (grid values).
    """

    axiom: str
    passed: bool
    worst_violation: float
    witness: tuple
    tolerance: float


def _report(axiom: str, violation: float, witness: tuple, tolerance: float) -> AxiomReport:
    violation = float(violation)
    return AxiomReport(axiom, violation <= tolerance, violation, witness, tolerance)


def _batch(fn: Callable) -> Callable:
    """Return a broadcasting version of ``fn``, wrapping scalar-only callables."""

    def call(a, b):
        try:
            out = np.asarray(fn(a, b), dtype=float)
            if out.shape == np.broadcast_shapes(np.shape(a), np.shape(b)):
                return out
        except (TypeError, ValueError):
            pass
        return np.vectorize(fn, otypes=[float])(a, b)

    return call


def certify(
    op: UnitIntervalOp,
    grid_resolution: int = 101,
    check_idempotency: bool = False,
    tolerance: float = EQUALITY_TOL,
) -> list[AxiomReport]:
    """Check the t-norm/t-conorm axioms for ``op`` on a uniform grid.

    Reports cover commutativity, associativity, the identity law (a * 1 = a
    for t-norms, a + 0 = a for t-conorms), joint monotonicity, and sampled
    continuity.  Idempotency (a op a = a) is not part of the core axioms and
    is only checked on request; the product t-norm fails it, which is the
    expected behaviour, not a bug.
    """
    if grid_resolution < 2:
        raise DomainError(f"grid_resolution must be >= 2, got {grid_resolution}")
    grid = np.linspace(0.0, 1.0, grid_resolution)
    cell = grid[1] - grid[0]
    fn = _batch(op.fn)
    table = fn(grid[:, None], grid[None, :])  # table[i, j] = op(grid[i], grid[j])

    reports = []

    diff = np.abs(table - table.T)
    i, j = np.unravel_index(np.argmax(diff), diff.shape)
    reports.append(_report("commutativity", diff[i, j], (grid[i], grid[j]), tolerance))

    left = fn(table[:, :, None], grid[None, None, :])   # (a op b) op c
    right = fn(grid[:, None, None], table[None, :, :])  # a op (b op c)
    diff = np.abs(left - right)
    i, j, k = np.unravel_index(np.argmax(diff), diff.shape)
    reports.append(_report("associativity", diff[i, j, k], (grid[i], grid[j], grid[k]), tolerance))

    with_identity = fn(grid, op.identity_element)
    diff = np.abs(with_identity - grid)
    i = int(np.argmax(diff))
    reports.append(_report("identity", diff[i], (grid[i], op.identity_element), tolerance))

    # Monotone in each argument (with commutativity this gives joint
    # monotonicity: a<=b, c<=d implies op(a,c) <= op(b,c) <= op(b,d)).
    drop_rows = table[:-1, :] - table[1:, :]
    drop_cols = table[:, :-1] - table[:, 1:]
    worst = 0.0
    witness = (grid[0], grid[0])
    if drop_rows.size:
        i, j = np.unravel_index(np.argmax(drop_rows), drop_rows.shape)
        if drop_rows[i, j] > worst:
            worst, witness = drop_rows[i, j], (grid[i], grid[j])
        i, j = np.unravel_index(np.argmax(drop_cols), drop_cols.shape)
        if drop_cols[i, j] > worst:
            worst, witness = drop_cols[i, j], (grid[i], grid[j])
    reports.append(_report("monotonicity", max(worst, 0.0), witness, tolerance))

    # Sampled continuity: variation across any grid cell stays within
    # CONTINUITY_SLACK cell widths.  A jump discontinuity keeps a fixed
    # variation as the grid refines, so it cannot hide under this bound.
    corners = np.stack(
        [table[:-1, :-1], table[1:, :-1], table[:-1, 1:], table[1:, 1:]]
    )
    variation = corners.max(axis=0) - corners.min(axis=0)
    excess = variation - CONTINUITY_SLACK * cell
    i, j = np.unravel_index(np.argmax(excess), excess.shape)
    reports.append(_report("continuity", max(float(excess[i, j]), 0.0), (grid[i], grid[j]), tolerance))

    if check_idempotency:
        on_diagonal = np.abs(np.diagonal(table) - grid)
        i = int(np.argmax(on_diagonal))
        reports.append(_report("idempotency", on_diagonal[i], (grid[i], grid[i]), tolerance))

    return reports
