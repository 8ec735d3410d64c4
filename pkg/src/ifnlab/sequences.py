"""Function sequences on a sampled domain, and the bundled benchmark families.

The two bundled families are piecewise power sequences whose terms take a
"bump" branch on a sparse index set W and a base branch elsewhere.  W is
built greedily against the window ladder of the chosen lambda sequence so
that every window I_n holds at most ceil(sqrt(lambda_n)) bump indices; the
windowed density of W is therefore about sqrt(lambda_n)/lambda_n -> 0, which
is exactly what makes the families converge in the windowed-statistical
sense while every bump term stays far from the limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import DomainError
from .density import LambdaSequence


class GridMismatchError(ValueError):
    """Two sequences with different domain grids cannot be combined."""


@dataclass(frozen=True)
class FunctionSequence:
    """A sequence of functions sampled on a fixed domain grid.

    ``evaluate(k, x)`` returns the k-th term at point x (k >= 1).  The
    optional ``evaluate_many(ks, x)`` takes an integer index array and
    returns the matching array of values; detectors use it to scan millions
    of indices without a Python-level loop, and fall back to ``evaluate``
    when it is absent.
    """

    evaluate: Callable
    domain_grid: np.ndarray
    description: str
    evaluate_many: Callable | None = None

    def __post_init__(self):
        grid = np.asarray(self.domain_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise DomainError("domain_grid must be a non-empty 1-D array")
        if not np.all(np.isfinite(grid)):
            raise DomainError("domain_grid has non-finite points")
        object.__setattr__(self, "domain_grid", grid)

    def values_upto(self, n_max: int, x) -> np.ndarray:
        """Terms 1..n_max at x, using the vectorised path when available."""
        ks = np.arange(1, n_max + 1)
        if self.evaluate_many is not None:
            return np.asarray(self.evaluate_many(ks, x), dtype=float)
        return np.array([float(self.evaluate(int(k), x)) for k in ks])


def combine_linear(fs1: FunctionSequence, fs2: FunctionSequence,
                   alpha: float, beta: float) -> FunctionSequence:
    """Pointwise combination alpha*fs1 + beta*fs2 on a shared grid."""
    if not np.array_equal(fs1.domain_grid, fs2.domain_grid):
        raise GridMismatchError("sequences live on different domain grids")

    def evaluate(k, x):
        return alpha * fs1.evaluate(k, x) + beta * fs2.evaluate(k, x)

    evaluate_many = None
    if fs1.evaluate_many is not None and fs2.evaluate_many is not None:
        def evaluate_many(ks, x):
            return alpha * np.asarray(fs1.evaluate_many(ks, x)) \
                 + beta * np.asarray(fs2.evaluate_many(ks, x))

    description = f"{alpha!r}*({fs1.description}) + {beta!r}*({fs2.description})"
    return FunctionSequence(evaluate, fs1.domain_grid, description, evaluate_many)


class BumpIndexSet:
    """Sparse index set filled greedily against a window ladder.

    Walking n = 1, 2, 3, ... the set admits n whenever the current window
    I_n = [n - ceil(lambda_n) + 1, n] holds fewer than ceil(sqrt(lambda_n))
    members.  By induction every window then holds at most
    ceil(sqrt(lambda_n)) members (admission is gated on the bound, windows
    slide forward, and the budget never shrinks), while the set itself is
    infinite because the budget diverges.  Membership is exposed as an
    explicit predicate so the per-window bound is directly testable.
    """

    def __init__(self, lam: LambdaSequence):
        self.lam = lam
        self._flags = [False]  # index 0 unused; _flags[k] for k >= 1
        self._members: list[int] = []
        self._head = 0         # members before this offset have left the window
        self._mask_cache: np.ndarray | None = None

    def ensure(self, n_max: int) -> None:
        built = len(self._flags) - 1
        if n_max <= built:
            return
        ns = np.arange(built + 1, n_max + 1)
        lam_vals = (np.asarray(self.lam.values_many(ns), dtype=float)
                    if self.lam.values_many is not None
                    else np.array([self.lam.at(int(n)) for n in ns]))
        if np.min(lam_vals) <= 0:
            raise DomainError("lambda values must be positive")
        widths = np.ceil(lam_vals).astype(np.int64)
        lows = np.maximum(1, ns - widths + 1).tolist()
        budgets = np.ceil(np.sqrt(lam_vals)).astype(np.int64).tolist()

        flags, members = self._flags, self._members
        head = self._head
        for offset, n in enumerate(range(built + 1, n_max + 1)):
            lo = lows[offset]
            while head < len(members) and members[head] < lo:
                head += 1
            if len(members) - head < budgets[offset]:
                members.append(n)
                flags.append(True)
            else:
                flags.append(False)
        self._head = head
        self._mask_cache = None

    def contains(self, k: int) -> bool:
        if k < 1:
            raise DomainError(f"index must be >= 1, got {k}")
        self.ensure(k)
        return self._flags[k]

    __contains__ = contains

    def mask(self, n_max: int) -> np.ndarray:
        """Boolean array m with m[k] = (k in set) for k = 0..n_max (m[0] unused)."""
        self.ensure(n_max)
        if self._mask_cache is None or self._mask_cache.size < n_max + 1:
            self._mask_cache = np.array(self._flags, dtype=bool)
        return self._mask_cache[: n_max + 1]

    def mask_for(self, ks: np.ndarray) -> np.ndarray:
        ks = np.asarray(ks, dtype=np.int64)
        if ks.size == 0:
            return np.zeros(0, dtype=bool)
        if np.min(ks) < 1:
            raise DomainError("indices must be >= 1")
        return self.mask(int(np.max(ks)))[ks]


def _powers(ks: np.ndarray, x: float) -> np.ndarray:
    """x**k for an index array, via exp(k*log x) to avoid pow denormal churn."""
    if x == 0.0:
        return np.zeros(ks.shape)
    if x == 1.0:
        return np.ones(ks.shape)
    return np.exp(ks.astype(float) * math.log(x))


def build_example_pointwise(lam: LambdaSequence, grid) -> tuple[FunctionSequence, Callable]:
    """Piecewise power family with a three-level limit.

    On the bump set W: x^k + 1 below 1/2, x^k + 1/2 on [1/2, 1); off W the
    terms sit at the limit already.  The value at x = 1 is pinned to 2.
    Limit: 0 on [0, 1/2), 1 on [1/2, 1), 2 at x = 1.
    """
    grid = np.asarray(grid, dtype=float)
    bumps = BumpIndexSet(lam)

    def evaluate_many(ks, x):
        ks = np.asarray(ks, dtype=np.int64)
        x = float(x)
        if x == 1.0:
            return np.full(ks.shape, 2.0)
        in_set = bumps.mask_for(ks)
        p = _powers(ks, x)
        if x >= 0.5:
            return np.where(in_set, p + 0.5, 1.0)
        return np.where(in_set, p + 1.0, 0.0)

    def evaluate(k, x):
        return float(evaluate_many(np.array([k]), x)[0])

    def limit(x):
        x = float(x)
        if x == 1.0:
            return 2.0
        return 1.0 if x >= 0.5 else 0.0

    fs = FunctionSequence(evaluate, grid, "piecewise power family, three-level limit",
                          evaluate_many)
    return fs, limit


def build_example_uniform(lam: LambdaSequence, grid) -> tuple[FunctionSequence, Callable]:
    """Power-bump family vanishing identically off the bump set; limit 0."""
    grid = np.asarray(grid, dtype=float)
    bumps = BumpIndexSet(lam)

    def evaluate_many(ks, x):
        ks = np.asarray(ks, dtype=np.int64)
        in_set = bumps.mask_for(ks)
        return np.where(in_set, _powers(ks, float(x)) + 1.0, 0.0)

    def evaluate(k, x):
        return float(evaluate_many(np.array([k]), x)[0])

    def limit(x):
        return 0.0

    fs = FunctionSequence(evaluate, grid, "power-bump family, zero limit", evaluate_many)
    return fs, limit


def build_constant_family(grid, value: float = 0.0) -> tuple[FunctionSequence, Callable]:
    """Every term is the constant ``value``; trivially equicontinuous."""
    grid = np.asarray(grid, dtype=float)

    def evaluate(k, x):
        return value

    def evaluate_many(ks, x):
        return np.full(np.asarray(ks).shape, float(value))

    return (FunctionSequence(evaluate, grid, f"constant {value!r} family", evaluate_many),
            lambda x: value)


def build_reciprocal_shift(grid) -> tuple[FunctionSequence, Callable]:
    """f_k(x) = x + 1/k; an equicontinuous family converging to x."""
    grid = np.asarray(grid, dtype=float)

    def evaluate(k, x):
        return float(x) + 1.0 / k

    def evaluate_many(ks, x):
        return float(x) + 1.0 / np.asarray(ks, dtype=float)

    return (FunctionSequence(evaluate, grid, "identity shifted by 1/k", evaluate_many),
            lambda x: float(x))


EXAMPLE_IDS = ("paper-example-1", "paper-example-2")


def build_example(example_id: str, lam: LambdaSequence, grid):
    """Resolve a bundled example id to (sequence, limit, preferred mode)."""
    if example_id == "paper-example-1":
        fs, limit = build_example_pointwise(lam, grid)
        return fs, limit, "pointwise-lambda-stat"
    if example_id == "paper-example-2":
        fs, limit = build_example_uniform(lam, grid)
        return fs, limit, "uniform-lambda-stat"
    raise DomainError(f"unknown example {example_id!r}; choose from {EXAMPLE_IDS}")
