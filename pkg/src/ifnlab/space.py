"""Graded norms on real vectors: membership/non-membership pairs.

An intuitionistic fuzzy norm assigns each vector x and each time t > 0 a
membership degree mu(x, t) and a non-membership degree nu(x, t).  Larger t
means a looser yardstick: mu increases toward 1 and nu decreases toward 0.
The pair must satisfy thirteen axioms tying it to the chosen t-norm and
t-conorm; ``certify_ifn`` samples all of them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import AxiomReport, DomainError, UnitIntervalOp, _batch, _report

# Probe times for the t -> infinity / t -> 0 limit axioms.
LIMIT_T_LARGE = 1e9
LIMIT_T_SMALL = 1e-9
LIMIT_TOL = 1e-6

# Reported violation when a strict inequality is attained with equality
# (e.g. mu hits 0, or mu(x, t) = 1 for a nonzero x).  Any value comfortably
# above every sensible tolerance works; the magnitude carries no meaning.
STRICT_HIT = 1.0

# Nonzero scalars used to sample the scaling axiom.
SCALING_FACTORS = (-2.0, -0.5, 0.5, 3.0)

# Allowed variation of mu/nu between adjacent sample times, measured relative
# to the step ratio (|delta| * t_lo / delta_t).  The standard construction has
# modulus <= 1/4; a jump in t makes the modulus blow up as the grid refines.
TIME_CONTINUITY_SLACK = 4.0


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float vector; scalars become 1-vectors."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise DomainError(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"vector has non-finite coordinates: {x!r}")
    if dim is not None and arr.shape[0] != dim:
        raise DomainError(f"expected dimension {dim}, got {arr.shape[0]}")
    return arr


def abs_norm(v) -> np.ndarray:
    """|x| on 1-dimensional vectors; broadcasts over leading axes."""
    arr = np.asarray(v, dtype=float)
    return np.abs(arr[..., 0])


def euclidean_norm(v) -> np.ndarray:
    """Euclidean length along the last axis; broadcasts over leading axes."""
    arr = np.asarray(v, dtype=float)
    return np.sqrt(np.sum(arr * arr, axis=-1))


_NORMS = {"abs": abs_norm, "euclidean": euclidean_norm}
NORM_IDS = tuple(_NORMS)


def builtin_norm(name: str) -> Callable:
    try:
        return _NORMS[name]
    except KeyError:
        raise DomainError(f"unknown norm {name!r}; choose from {NORM_IDS}") from None


@dataclass(frozen=True)
class IFNorm:
    """Membership/non-membership functionals with their aggregation ops.

    ``mu`` and ``nu`` map (vector, time) to a degree in [0, 1].  Built-in
    instances broadcast over a leading batch axis of vectors and over array
    times; user-supplied scalar-only callables are still accepted everywhere
    (batch helpers fall back to loops).
    """

    mu: Callable
    nu: Callable
    tnorm: UnitIntervalOp
    tconorm: UnitIntervalOp


def _check_time(t) -> None:
    if np.min(np.asarray(t, dtype=float)) <= 0.0:
        raise DomainError(f"time must be positive, got {t!r}")


def standard_ifn(norm: Callable, tnorm: UnitIntervalOp, tconorm: UnitIntervalOp) -> IFNorm:
    """The standard construction mu = t / (t + |x|), nu = |x| / (t + |x|).

    ``norm`` maps vectors (last axis = coordinates) to lengths.  The returned
    functionals broadcast over batches of vectors and over array times.
    """

    def mu(x, t):
        _check_time(t)
        r = norm(np.atleast_1d(np.asarray(x, dtype=float)))
        t = np.asarray(t, dtype=float)
        return t / (t + r)

    def nu(x, t):
        _check_time(t)
        r = norm(np.atleast_1d(np.asarray(x, dtype=float)))
        t = np.asarray(t, dtype=float)
        return r / (t + r)

    return IFNorm(mu=mu, nu=nu, tnorm=tnorm, tconorm=tconorm)


@dataclass(frozen=True)
class OpenBall:
    """Open ball B(center, radius, time) in the graded sense.

    y is inside when mu(center - y, time) > 1 - radius and
    nu(center - y, time) < radius, both strict.
    """

    center: np.ndarray
    radius: float
    time: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not 0.0 < self.radius < 1.0:
            raise DomainError(f"radius must lie in (0, 1), got {self.radius}")
        if self.time <= 0.0:
            raise DomainError(f"time must be positive, got {self.time}")


def ball_contains(ball: OpenBall, ifn: IFNorm, y) -> bool:
    """Strict membership test for ``y`` in ``ball`` under ``ifn``."""
    diff = ball.center - as_vector(y, dim=ball.center.shape[0])
    mu = float(ifn.mu(diff, ball.time))
    nu = float(ifn.nu(diff, ball.time))
    return mu > 1.0 - ball.radius and nu < ball.radius


def default_samples(dim: int, count: int = 50, seed: int = 20240) -> list[np.ndarray]:
    """Deterministic sample vectors with lengths in a moderate band.

    Lengths are kept within roughly [5e-2, 3] so the limit axioms are
    decidable at the probe times: at t = 1e9 or 1e-9 the standard mu/nu are
    then within 1e-6 of their limits.
    """
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        v = rng.uniform(-3.0, 3.0, size=dim)
        length = float(np.sqrt(np.sum(v * v)))
        if length < 0.05:
            v = v + 0.1 * np.sign(v + 1e-3)
        samples.append(v)
    return samples


def default_times(count: int = 20, lo: float = 0.1, hi: float = 10.0) -> np.ndarray:
    """Log-spaced positive times."""
    if lo <= 0 or hi <= lo:
        raise DomainError("need 0 < lo < hi")
    return np.geomspace(lo, hi, count)


def _over_times(fn: Callable, x: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Evaluate fn(x, ts) for one vector over many times, tolerating scalar-only fn."""
    ts = np.asarray(ts, dtype=float)
    try:
        out = np.asarray(fn(x, ts), dtype=float)
        if out.shape == ts.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(x, t)) for t in ts.ravel()]).reshape(ts.shape)


def certify_ifn(
    ifn: IFNorm,
    sample_vectors: Sequence,
    time_grid,
    tolerance: float = 1e-12,
    limit_tolerance: float = LIMIT_TOL,
) -> list[AxiomReport]:
    """Sample all thirteen graded-norm axioms on the given vectors and times.

    One report per axiom, for mu and nu separately:

    * sum bound mu + nu <= 1;
    * mu > 0 and nu < 1 (strict);
    * mu = 1 exactly on the zero vector, nu = 0 exactly on the zero vector
      (checked both ways: equality at 0, strict inequality elsewhere);
    * scaling mu(a x, t) = mu(x, t/|a|) and likewise for nu, a != 0;
    * triangle laws mu(x,t) * mu(y,s) <= mu(x+y, t+s) under the t-norm and
      nu(x,t) + nu(y,s) >= nu(x+y, t+s) under the t-conorm;
    * sampled continuity in t;
    * limits as t -> infinity (mu -> 1, nu -> 0 for every x) and t -> 0
      (mu -> 0, nu -> 1 for every nonzero x; the zero vector is pinned to
      mu = 1, nu = 0 at all times, so it is excluded from the t -> 0 probes).

    Strict-inequality axioms report the sentinel violation ``STRICT_HIT``
    when the forbidden boundary value is attained exactly.
    """
    vectors = [as_vector(v) for v in sample_vectors]
    if not vectors:
        raise DomainError("sample_vectors must be non-empty")
    dim = vectors[0].shape[0]
    times = np.sort(np.asarray(time_grid, dtype=float).ravel())
    if times.size == 0:
        raise DomainError("time_grid must be non-empty")
    if times[0] <= 0.0:
        raise DomainError("time_grid must be strictly positive")

    zero = np.zeros(dim)
    nonzero = [v for v in vectors if np.any(v != 0.0)]

    mu_tab = np.stack([_over_times(ifn.mu, v, times) for v in vectors])  # (V, T)
    nu_tab = np.stack([_over_times(ifn.nu, v, times) for v in vectors])

    reports = []

    def argmax2(arr):
        i, j = np.unravel_index(np.argmax(arr), arr.shape)
        return int(i), int(j)

    excess = mu_tab + nu_tab - 1.0
    i, j = argmax2(excess)
    reports.append(_report("mu-nu-sum-bound", max(float(excess[i, j]), 0.0),
                           (tuple(vectors[i]), float(times[j])), tolerance))

    # Strict positivity of mu.
    worst, witness = 0.0, (tuple(vectors[0]), float(times[0]))
    i, j = argmax2(-mu_tab)
    if mu_tab[i, j] <= 0.0:
        worst = STRICT_HIT - float(mu_tab[i, j])
        witness = (tuple(vectors[i]), float(times[j]))
    reports.append(_report("mu-positive", worst, witness, tolerance))

    # Zero-vector characterisation of mu: equality at 0, strictly below 1 elsewhere.
    mu_zero = _over_times(ifn.mu, zero, times)
    worst = float(np.max(np.abs(mu_zero - 1.0)))
    witness = (tuple(zero), float(times[int(np.argmax(np.abs(mu_zero - 1.0)))]))
    for i, v in enumerate(vectors):
        if not np.any(v != 0.0):
            continue
        hits = mu_tab[i] >= 1.0
        if np.any(hits):
            j = int(np.argmax(hits))
            worst = max(worst, STRICT_HIT + float(mu_tab[i, j]) - 1.0)
            witness = (tuple(v), float(times[j]))
    reports.append(_report("mu-zero-characterization", worst, witness, tolerance))

    def scaling_violation(fn):
        worst, witness = 0.0, (tuple(vectors[0]), SCALING_FACTORS[0], float(times[0]))
        for a in SCALING_FACTORS:
            for v in vectors:
                direct = _over_times(fn, a * v, times)
                rescaled = _over_times(fn, v, times / abs(a))
                gap = np.abs(direct - rescaled)
                j = int(np.argmax(gap))
                if gap[j] > worst:
                    worst, witness = float(gap[j]), (tuple(v), a, float(times[j]))
        return worst, witness

    worst, witness = scaling_violation(ifn.mu)
    reports.append(_report("mu-scaling", worst, witness, tolerance))

    t_pair = times[:, None] + times[None, :]  # (T, T) combined times

    def triangle_violation(fn, combine, sign):
        """sign +1 checks combine(f, f) <= f(x+y); sign -1 checks >=."""
        worst = 0.0
        witness = (tuple(vectors[0]), tuple(vectors[0]), float(times[0]), float(times[0]))
        tab = np.stack([_over_times(fn, v, times) for v in vectors])
        for i in range(len(vectors)):
            for j in range(i, len(vectors)):
                joint = _over_times(fn, vectors[i] + vectors[j], t_pair.ravel()).reshape(t_pair.shape)
                lhs = combine(tab[i][:, None], tab[j][None, :])
                gap = sign * (lhs - joint)
                a, b = np.unravel_index(np.argmax(gap), gap.shape)
                if gap[a, b] > worst:
                    worst = float(gap[a, b])
                    witness = (tuple(vectors[i]), tuple(vectors[j]),
                               float(times[a]), float(times[b]))
        return max(worst, 0.0), witness

    worst, witness = triangle_violation(ifn.mu, _batch(ifn.tnorm.fn), +1)
    reports.append(_report("mu-triangle", worst, witness, tolerance))

    def time_modulus(tab):
        if times.size < 2:
            return 0.0, (tuple(vectors[0]), float(times[0]))
        dt = times[1:] - times[0:-1]
        modulus = np.abs(tab[:, 1:] - tab[:, :-1]) * (times[:-1] / dt)
        i, j = argmax2(modulus)
        return max(float(modulus[i, j]) - TIME_CONTINUITY_SLACK, 0.0), (
            tuple(vectors[i]), float(times[j]))

    worst, witness = time_modulus(mu_tab)
    reports.append(_report("mu-time-continuity", worst, witness, tolerance))

    def limits_violation(fn, large_target, small_target):
        worst, witness = 0.0, (tuple(vectors[0]), LIMIT_T_LARGE)
        for v in vectors:
            gap = abs(float(fn(v, LIMIT_T_LARGE)) - large_target)
            if gap > worst:
                worst, witness = gap, (tuple(v), LIMIT_T_LARGE)
        for v in nonzero:
            gap = abs(float(fn(v, LIMIT_T_SMALL)) - small_target)
            if gap > worst:
                worst, witness = gap, (tuple(v), LIMIT_T_SMALL)
        return worst, witness

    worst, witness = limits_violation(ifn.mu, 1.0, 0.0)
    reports.append(_report("mu-limits", worst, witness, limit_tolerance))

    # Now the nu side.
    worst, witness = 0.0, (tuple(vectors[0]), float(times[0]))
    i, j = argmax2(nu_tab)
    if nu_tab[i, j] >= 1.0:
        worst = STRICT_HIT + float(nu_tab[i, j]) - 1.0
        witness = (tuple(vectors[i]), float(times[j]))
    reports.append(_report("nu-below-one", worst, witness, tolerance))

    nu_zero = _over_times(ifn.nu, zero, times)
    worst = float(np.max(np.abs(nu_zero)))
    witness = (tuple(zero), float(times[int(np.argmax(np.abs(nu_zero)))]))
    for i, v in enumerate(vectors):
        if not np.any(v != 0.0):
            continue
        hits = nu_tab[i] <= 0.0
        if np.any(hits):
            j = int(np.argmax(hits))
            worst = max(worst, STRICT_HIT - float(nu_tab[i, j]))
            witness = (tuple(v), float(times[j]))
    reports.append(_report("nu-zero-characterization", worst, witness, tolerance))

    worst, witness = scaling_violation(ifn.nu)
    reports.append(_report("nu-scaling", worst, witness, tolerance))

    worst, witness = triangle_violation(ifn.nu, _batch(ifn.tconorm.fn), -1)
    reports.append(_report("nu-triangle", worst, witness, tolerance))

    worst, witness = time_modulus(nu_tab)
    reports.append(_report("nu-time-continuity", worst, witness, tolerance))

    worst, witness = limits_violation(ifn.nu, 0.0, 1.0)
    reports.append(_report("nu-limits", worst, witness, limit_tolerance))

    return reports
