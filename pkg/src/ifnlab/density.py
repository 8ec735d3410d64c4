"""Windowed index densities driven by a slowly growing window-length sequence.

A window-length sequence lambda assigns each stage n a window
I_n = [n - ceil(lambda_n) + 1, n] of the most recent indices.  The windowed
density of an index set K is the limit of |K intersect I_n| / lambda_n.  With
lambda_n = n the window is all of [1, n] and this reduces to natural density.

Admissible sequences start at lambda_1 = 1, never decrease, grow by at most 1
per stage (hence lambda_n <= n), and tend to infinity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import AxiomReport, DomainError, _report

# Verdict heuristic knobs.  The tail is the last fifth of the trace points.
TAIL_FRACTION = 0.2
ZERO_TAIL_MAX = 1e-2      # a vanishing ratio must sit below this over the tail
DECAY_FACTOR = 0.5        # ... and the last point must be <= half the 20%-horizon value
VALUE_STD_TOL = 1e-3      # a settled ratio must have tail standard deviation below this


@dataclass(frozen=True)
class LambdaSequence:
    """Window-length sequence; ``values(n)`` gives lambda_n for n >= 1.

    ``values_many`` is an optional vectorised form taking an integer array.
    """

    name: str
    values: Callable[[int], float]
    values_many: Callable | None = None

    def table(self, n_max: int) -> np.ndarray:
        """lambda_1 .. lambda_n_max as a float array."""
        ns = np.arange(1, n_max + 1)
        if self.values_many is not None:
            return np.asarray(self.values_many(ns), dtype=float)
        return np.array([float(self.values(int(n))) for n in ns])

    def at(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"stage must be >= 1, got {n}")
        return float(self.values(n))


def _ceil_sqrt(n: int) -> float:
    root = math.isqrt(n)
    return float(root if root * root == n else root + 1)


_FAMILIES = {
    "identity": (lambda n: float(n), lambda ns: ns.astype(float)),
    "sqrt": (_ceil_sqrt, lambda ns: np.ceil(np.sqrt(ns.astype(float)))),
    "log": (
        lambda n: float(math.ceil(math.log2(n + 1))),
        lambda ns: np.ceil(np.log2(ns.astype(float) + 1.0)),
    ),
}

LAMBDA_IDS = tuple(_FAMILIES)


def lambda_family(name: str) -> LambdaSequence:
    """Built-in window-length families: identity, sqrt (ceil), log (ceil of log2)."""
    try:
        scalar, many = _FAMILIES[name]
    except KeyError:
        raise DomainError(f"unknown lambda family {name!r}; choose from {LAMBDA_IDS}") from None
    return LambdaSequence(name, scalar, many)


def lambda_from_table(values, name: str = "table") -> LambdaSequence:
    """Explicit lambda values; past the table the sequence keeps growing by 1."""
    tab = np.asarray(values, dtype=float)
    if tab.size == 0:
        raise DomainError("lambda table must be non-empty")

    def scalar(n: int) -> float:
        if n <= tab.size:
            return float(tab[n - 1])
        return float(tab[-1] + (n - tab.size))

    def many(ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns)
        out = np.where(ns <= tab.size,
                       tab[np.minimum(ns, tab.size) - 1],
                       tab[-1] + (ns - tab.size))
        return out.astype(float)

    return LambdaSequence(name, scalar, many)


@dataclass(frozen=True)
class IndexWindow:
    """The window I_n = [lo, hi] of the ceil(lambda_n) most recent indices."""

    n: int
    lo: int
    hi: int

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


def window(lam: LambdaSequence, n: int) -> IndexWindow:
    """Window at stage n; the lower end is clamped at 1."""
    if n < 1:
        raise DomainError(f"stage must be >= 1, got {n}")
    width = math.ceil(lam.at(n))
    return IndexWindow(n=n, lo=max(1, n - width + 1), hi=n)


@dataclass
class DensityTrace:
    """Windowed counts and ratios of an index set at a ladder of stages.

    ``ratios[i] = counts[i] / lambda(ns[i])``; the denominator is the real
    lambda value while the count uses the integer window, so a ratio may
    slightly exceed 1 for fractional lambda.
    """

    ns: np.ndarray
    lows: np.ndarray
    highs: np.ndarray
    counts: np.ndarray
    ratios: np.ndarray
    n_max: int
    verdict: str          # limit-zero | limit-one | limit-value | inconclusive
    estimate: float | None

    @property
    def final_ratio(self) -> float:
        return float(self.ratios[-1])

    def tail(self) -> np.ndarray:
        start = (len(self.ratios) * 4) // 5
        return self.ratios[start:]

    @property
    def tail_max(self) -> float:
        return float(np.max(self.tail()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("n,window_lo,window_hi,count,ratio\n")
            for n, lo, hi, c, r in zip(self.ns, self.lows, self.highs, self.counts, self.ratios):
                fh.write(f"{int(n)},{int(lo)},{int(hi)},{int(c)},{float(r)!r}\n")


def _classify(ratios: np.ndarray) -> tuple[str, float | None]:
    """Heuristic verdict on the trace tail; see module docstring knobs.

    limit-zero needs the tail to sit under ZERO_TAIL_MAX and the last point
    to be at most DECAY_FACTOR times the ratio at the 20% horizon (decay
    evidence).  limit-one is the mirror image around 1.  limit-value accepts
    any tail that has settled (tiny standard deviation).  Anything else is
    inconclusive rather than a failure claim.
    """
    start = (len(ratios) * 4) // 5
    tail = ratios[start:]
    at20 = ratios[len(ratios) // 5]
    last = ratios[-1]

    if np.max(tail) <= ZERO_TAIL_MAX and last <= DECAY_FACTOR * at20:
        return "limit-zero", float(np.mean(tail))
    gap = np.abs(1.0 - ratios)
    if np.max(gap[start:]) <= ZERO_TAIL_MAX and gap[-1] <= DECAY_FACTOR * gap[len(ratios) // 5]:
        return "limit-one", float(np.mean(tail))
    if float(np.std(tail)) <= VALUE_STD_TOL:
        return "limit-value", float(np.mean(tail))
    return "inconclusive", None


def membership_array(member, n_max: int) -> np.ndarray:
    """Boolean membership for k = 1..n_max from a predicate or an array."""
    if isinstance(member, np.ndarray):
        arr = np.asarray(member, dtype=bool).ravel()
        if arr.size < n_max:
            raise DomainError(f"membership array has {arr.size} entries, need {n_max}")
        return arr[:n_max]
    return np.fromiter((bool(member(k)) for k in range(1, n_max + 1)), dtype=bool, count=n_max)


def density_trace(member, lam: LambdaSequence, n_max: int, stride: int | None = None) -> DensityTrace:
    """Trace the windowed density of an index set up to stage n_max.

    ``member`` is a predicate on indices (or a precomputed boolean array for
    k = 1..n_max).  Ratios are recorded at stages stride, 2*stride, ...; the
    final stage n_max is always included.
    """
    if n_max < 10:
        raise DomainError(f"n_max must be >= 10, got {n_max}")
    if stride is None:
        stride = max(1, n_max // 1000)
    if stride < 1:
        raise DomainError(f"stride must be >= 1, got {stride}")

    mask = membership_array(member, n_max)
    prefix = np.concatenate([[0], np.cumsum(mask, dtype=np.int64)])

    ns = np.arange(stride, n_max + 1, stride, dtype=np.int64)
    if ns.size == 0 or ns[-1] != n_max:
        ns = np.append(ns, n_max)

    lam_vals = (np.asarray(lam.values_many(ns), dtype=float)
                if lam.values_many is not None
                else np.array([lam.at(int(n)) for n in ns]))
    if np.min(lam_vals) <= 0:
        raise DomainError("lambda values must be positive")
    widths = np.ceil(lam_vals).astype(np.int64)
    lows = np.maximum(1, ns - widths + 1)
    counts = prefix[ns] - prefix[lows - 1]
    ratios = counts / lam_vals

    verdict, estimate = _classify(ratios)
    return DensityTrace(ns=ns, lows=lows, highs=ns.copy(), counts=counts,
                        ratios=ratios, n_max=n_max, verdict=verdict, estimate=estimate)


def validate(lam: LambdaSequence, n_max: int = 10_000) -> list[AxiomReport]:
    """Check the admissibility conditions for a window-length sequence.

    Reports: first-value (lambda_1 = 1), non-decreasing, slow-growth
    (lambda_{n+1} <= lambda_n + 1), index-bound (lambda_n <= n), and a
    divergence heuristic (lambda_{n_max} >= ln(n_max), a necessary sign of
    an unbounded sequence at this horizon, not a proof).
    """
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    tab = lam.table(n_max)
    tol = 1e-12
    reports = []

    reports.append(_report("first-value", abs(tab[0] - 1.0), (1,), tol))

    steps = tab[1:] - tab[:-1]
    i = int(np.argmin(steps))
    reports.append(_report("non-decreasing", max(0.0, float(-steps[i])), (i + 1,), tol))

    j = int(np.argmax(steps))
    reports.append(_report("slow-growth", max(0.0, float(steps[j] - 1.0)), (j + 1,), tol))

    over = tab - np.arange(1, n_max + 1)
    k = int(np.argmax(over))
    reports.append(_report("index-bound", max(0.0, float(over[k])), (k + 1,), tol))

    shortfall = max(0.0, math.log(n_max) - float(tab[-1]))
    reports.append(_report("divergence", shortfall, (n_max,), tol))

    return reports
