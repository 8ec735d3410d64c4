"""Graded continuity checks: single functions and whole families.

A family {f_k} is equicontinuous at x0 for (epsilon, t) when one level delta
works for every index k: each probe x that falls in the delta-ball around x0
(domain norm) must keep f_k(x) in the epsilon-ball around f_k(x0) (target
norm).  The search runs over a fixed geometric delta grid, so the outcome is
resolution-qualified: a failure either carries a concrete witness (k, x)
violating even the smallest testable delta, or means no delta at this
resolution could be tested at all.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import DomainError
from .sequences import FunctionSequence
from .space import IFNorm

DELTA_GRID = tuple(0.5 ** j for j in range(1, 21))        # 0.5 .. 2^-20
PROBE_RADII = tuple(0.5 ** j for j in range(1, 23))       # 0.5 .. 2^-22


@dataclass(frozen=True)
class ContinuityQuery:
    """Where and how sharply to probe continuity."""

    point: float
    epsilon: float
    time: float
    delta_grid: tuple = DELTA_GRID
    probe_radii: tuple = PROBE_RADII
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.time <= 0.0:
            raise DomainError(f"time must be positive, got {self.time}")
        if not self.delta_grid or any(not 0.0 < d < 1.0 for d in self.delta_grid):
            raise DomainError("delta_grid must be non-empty with values in (0, 1)")
        lo, hi = self.domain
        if not lo <= self.point <= hi:
            raise DomainError(f"point {self.point} outside domain [{lo}, {hi}]")


@dataclass(frozen=True)
class ContinuityResult:
    """holds/continuous with the largest working delta, or a refutation.

    ``witness`` is a (k, x) pair violating the smallest testable delta
    (k = 0 for a single function).  ``exhausted`` marks the distinct failure
    where no delta on the grid captured any probe at all, so nothing could
    be certified or refuted at this resolution.
    """

    holds: bool
    delta: float | None
    witness: tuple | None
    exhausted: bool


def _probe_points(q: ContinuityQuery) -> np.ndarray:
    lo, hi = q.domain
    pts = []
    for r in q.probe_radii:
        for p in (q.point - r, q.point + r):
            if lo <= p <= hi and p != q.point:
                pts.append(p)
    if not pts:
        raise DomainError("no probe points fall inside the domain")
    return np.array(pts)


def _scalar_degree(fn, diff: float, t: float) -> float:
    return float(fn(np.array([diff]), t))


def _modulus_search(gap_ok: np.ndarray, ks: np.ndarray, probes: np.ndarray,
                    dom_mu: np.ndarray, dom_nu: np.ndarray,
                    q: ContinuityQuery) -> ContinuityResult:
    """Scan deltas large to small; certify the first that works.

    ``gap_ok[i, j]`` says term ks[i] maps probe j inside the target
    epsilon-ball.  A delta only counts when its ball captures at least one
    probe; certifying from an empty ball would be vacuous.
    """
    smallest_testable = None
    for delta in sorted(q.delta_grid, reverse=True):
        in_ball = (dom_mu > 1.0 - delta) & (dom_nu < delta)
        if not np.any(in_ball):
            continue
        smallest_testable = delta
        if bool(np.all(gap_ok[:, in_ball])):
            return ContinuityResult(True, delta, None, False)
    if smallest_testable is None:
        return ContinuityResult(False, None, None, True)
    in_ball = (dom_mu > 1.0 - smallest_testable) & (dom_nu < smallest_testable)
    bad = np.argwhere(~gap_ok & in_ball[None, :])
    i, j = bad[0]
    return ContinuityResult(False, None, (int(ks[i]), float(probes[j])), False)


def check_equicontinuity(fs: FunctionSequence, ifn_domain: IFNorm, ifn_target: IFNorm,
                         q: ContinuityQuery, k_max: int = 100) -> ContinuityResult:
    """Search for one delta serving every term f_1 .. f_k_max at q.point."""
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    probes = _probe_points(q)
    ks = np.arange(1, k_max + 1)

    dom_mu = np.array([_scalar_degree(ifn_domain.mu, q.point - p, q.time) for p in probes])
    dom_nu = np.array([_scalar_degree(ifn_domain.nu, q.point - p, q.time) for p in probes])

    gap_ok = np.empty((k_max, probes.size), dtype=bool)
    for i, k in enumerate(ks):
        at_center = np.asarray(fs.evaluate(int(k), q.point), dtype=float).reshape(-1)
        for j, p in enumerate(probes):
            gap = np.asarray(fs.evaluate(int(k), p), dtype=float).reshape(-1) - at_center
            mu = float(ifn_target.mu(gap, q.time))
            nu = float(ifn_target.nu(gap, q.time))
            gap_ok[i, j] = mu > 1.0 - q.epsilon and nu < q.epsilon
    return _modulus_search(gap_ok, ks, probes, dom_mu, dom_nu, q)


def check_limit_continuity(f: Callable, ifn_domain: IFNorm, ifn_target: IFNorm,
                           q: ContinuityQuery) -> ContinuityResult:
    """Same delta search for a single function (witness index reported as 0)."""
    probes = _probe_points(q)
    dom_mu = np.array([_scalar_degree(ifn_domain.mu, q.point - p, q.time) for p in probes])
    dom_nu = np.array([_scalar_degree(ifn_domain.nu, q.point - p, q.time) for p in probes])

    at_center = np.asarray(f(q.point), dtype=float).reshape(-1)
    gap_ok = np.empty((1, probes.size), dtype=bool)
    for j, p in enumerate(probes):
        gap = np.asarray(f(p), dtype=float).reshape(-1) - at_center
        mu = float(ifn_target.mu(gap, q.time))
        nu = float(ifn_target.nu(gap, q.time))
        gap_ok[0, j] = mu > 1.0 - q.epsilon and nu < q.epsilon
    return _modulus_search(gap_ok, np.array([0]), probes, dom_mu, dom_nu, q)


def split_triangle_check(ifn_target: IFNorm, parts: list, time: float) -> tuple[bool, bool]:
    """Check the three-way triangle bounds used to pass continuity to a limit.

    For gaps a, b, c with sum s, verifies

        mu(s, t) >= mu(a, t/3) * mu(b, t/3) * mu(c, t/3)   (t-norm)
        nu(s, t) <= nu(a, t/3) + nu(b, t/3) + nu(c, t/3)   (t-conorm)

    The nu side aggregates with the t-conorm: combining non-membership
    degrees with the t-norm instead would not even bound nu(s, t) for the
    standard construction, so the conorm is the only consistent reading.
    """
    if len(parts) != 3:
        raise DomainError("expected exactly three gap vectors")
    a, b, c = (np.asarray(p, dtype=float).reshape(-1) for p in parts)
    s = a + b + c
    third = time / 3.0
    mu_abc = [float(ifn_target.mu(g, third)) for g in (a, b, c)]
    nu_abc = [float(ifn_target.nu(g, third)) for g in (a, b, c)]
    mu_chain = ifn_target.tnorm(ifn_target.tnorm(mu_abc[0], mu_abc[1]), mu_abc[2])
    nu_chain = ifn_target.tconorm(ifn_target.tconorm(nu_abc[0], nu_abc[1]), nu_abc[2])
    mu_ok = float(ifn_target.mu(s, time)) >= float(mu_chain) - 1e-12
    nu_ok = float(ifn_target.nu(s, time)) <= float(nu_chain) + 1e-12
    return mu_ok, nu_ok
