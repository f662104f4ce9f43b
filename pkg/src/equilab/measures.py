"""Gaussian transverse-measure numerics.

The product measure used here has independent centered normal coordinates
with standard deviations ``sigma_n = c * 2**n``.  For ``c > 1/sqrt(2*pi)``
the mass of the unit interval at coordinate n is below ``2**-n`` whatever the
translation, so the masses of the cylinder events are summable and
Borel-Cantelli applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import ValidationError
from .sequences import ZERO_SHIFT, ShiftVector

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
N_MAX_LIMIT = 1000
DEFAULT_N_MAX = 200


def _check_sigma(sigma):
    if not (isinstance(sigma, (int, float, np.floating, np.integer)) and math.isfinite(sigma) and sigma > 0):
        raise ValidationError(f"must be a finite positive number, got {sigma!r}", field="sigma")


def _check_x(x):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("must be finite", field="x")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def normal_cdf(x, sigma=1.0):
    """P(X <= x) for X ~ normal(0, sigma); scalar or array ``x``."""
    _check_sigma(sigma)
    arr = _check_x(x)
    return _out(special.ndtr(arr / sigma), x)


def normal_sf(x, sigma=1.0):
    """P(X > x) for X ~ normal(0, sigma), accurate deep in the upper tail."""
    _check_sigma(sigma)
    arr = _check_x(x)
    return _out(special.ndtr(-arr / sigma), x)


def normal_quantile(p, sigma=1.0):
    """Inverse of :func:`normal_cdf`; ``p`` must lie in the open interval (0, 1)."""
    _check_sigma(sigma)
    arr = np.asarray(p, dtype=np.float64)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ValidationError("must lie strictly between 0 and 1", field="p")
    return _out(sigma * special.ndtri(arr), p)


def interval_mass(lo, hi, sigma):
    """normal(0, sigma) mass of ``[lo, hi]``.

    Uses an erf difference near the origin and an erfc difference in the
    tails, so the result keeps relative accuracy when sigma is huge or the
    interval sits far out.
    """
    if hi <= lo:
        return 0.0
    if hi <= 0.0:
        lo, hi = -hi, -lo
    l, u = lo / (sigma * _SQRT2), hi / (sigma * _SQRT2)
    if l >= 1.0:
        m = 0.5 * (special.erfc(l) - special.erfc(u))
    else:
        m = 0.5 * (special.erf(u) - special.erf(l))
    return max(float(m), 0.0)


@dataclass(frozen=True)
class GaussianSchedule:
    """``sigma_n = c * 2**n`` for n = 1 .. n_max.

    Indices past ``n_max`` reuse ``sigma_{n_max}`` when sampling.
    """

    c: float = 1.0
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        if not (isinstance(self.c, (int, float)) and math.isfinite(self.c) and self.c > INV_SQRT_2PI):
            raise ValidationError(
                f"schedule scale must exceed 1/sqrt(2*pi) = {INV_SQRT_2PI:.6f}, got {self.c!r}", field="c"
            )
        if isinstance(self.n_max, bool) or not isinstance(self.n_max, (int, np.integer)):
            raise ValidationError(f"must be an integer, got {self.n_max!r}", field="n_max")
        if not 1 <= self.n_max <= N_MAX_LIMIT:
            raise ValidationError(f"must lie in [1, {N_MAX_LIMIT}], got {self.n_max}", field="n_max")
        try:
            top = math.ldexp(self.c, int(self.n_max)) * 40.0
        except OverflowError:
            top = math.inf
        if not math.isfinite(top):
            raise ValidationError("c * 2**n_max overflows double precision", field="c")

    def sigma(self, n: int) -> float:
        if n < 1:
            raise ValidationError(f"index must be >= 1, got {n}", field="n")
        return math.ldexp(float(self.c), min(int(n), int(self.n_max)))

    def sigmas(self, n: int) -> np.ndarray:
        """``(sigma_1, ..., sigma_n)``, saturating at ``sigma_{n_max}``."""
        k = np.minimum(np.arange(1, n + 1), self.n_max)
        return np.ldexp(float(self.c), k)

    def to_dict(self) -> dict:
        return {"c": float(self.c), "n_max": int(self.n_max)}

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianSchedule":
        return cls(c=float(d.get("c", 1.0)), n_max=int(d.get("n_max", DEFAULT_N_MAX)))


@dataclass(frozen=True)
class CylinderEvent:
    """Sequences whose n-th coordinate lies in ``[lo + shift, hi + shift]``."""

    n: int
    lo: float = -0.5
    hi: float = 0.5
    shift: float = 0.0

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValidationError(f"must be >= 1, got {self.n}", field="n")
        for name in ("lo", "hi", "shift"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError("must be finite", field=name)
        # lo == hi is allowed and carries zero mass
        if self.lo > self.hi:
            raise ValidationError(f"lo={self.lo} exceeds hi={self.hi}", field="lo")

    @property
    def effective(self):
        return self.lo + self.shift, self.hi + self.shift


def _check_index(n, schedule):
    if n > schedule.n_max:
        raise ValidationError(f"index {n} is beyond the schedule (n_max={schedule.n_max})", field="n")


def gaussian_mass(event: CylinderEvent, schedule: GaussianSchedule) -> float:
    """Mass of ``event`` under the product measure, i.e. ``mu_n([lo + h, hi + h])``."""
    _check_index(event.n, schedule)
    lo, hi = event.effective
    return interval_mass(lo, hi, schedule.sigma(event.n))


def shift_monotonicity_check(event: CylinderEvent, schedule: GaussianSchedule):
    """``(mass_at_h, mass_at_0)``.

    ``mass_at_0`` is the mass of the interval of the same width centered at
    the origin, which dominates every translate under a symmetric unimodal
    law.  For the symmetric unit interval this is the unshifted event.
    """
    _check_index(event.n, schedule)
    half = 0.5 * (event.hi - event.lo)
    sigma = schedule.sigma(event.n)
    return gaussian_mass(event, schedule), interval_mass(-half, half, sigma)


def geometric_envelope(n_from: int, n_to: int) -> float:
    """``sum_{n=n_from}^{n_to} 2**-n`` (0 for an empty range)."""
    if n_from > n_to:
        return 0.0
    return math.ldexp(1.0, 1 - n_from) - math.ldexp(1.0, -n_to)


def _check_interval(interval):
    try:
        lo, hi = (float(v) for v in interval)
    except (TypeError, ValueError):
        raise ValidationError(f"interval must be a (lo, hi) pair, got {interval!r}", field="interval") from None
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError("interval endpoints must be finite", field="interval")
    if lo >= hi:
        raise ValidationError(f"need lo < hi, got ({lo}, {hi})", field="interval")
    return lo, hi


def _check_range(n_from, n_to, schedule):
    if n_from < 1:
        raise ValidationError(f"must be >= 1, got {n_from}", field="n_from")
    if n_from > n_to:
        raise ValidationError(f"n_from={n_from} exceeds n_to={n_to}", field="n_from")
    if n_to > schedule.n_max:
        raise ValidationError(f"n_to={n_to} exceeds schedule n_max={schedule.n_max}", field="n_to")


def masses(schedule, shift=ZERO_SHIFT, interval=(-0.5, 0.5), n_from=1, n_to=10) -> np.ndarray:
    """Per-index masses ``mu_n([lo + h_n, hi + h_n])`` for n = n_from .. n_to."""
    lo, hi = _check_interval(interval)
    _check_range(n_from, n_to, schedule)
    return np.array([
        gaussian_mass(CylinderEvent(n, lo, hi, shift.at(n)), schedule) for n in range(n_from, n_to + 1)
    ])


def borel_cantelli_sum(schedule, shift=ZERO_SHIFT, interval=(-0.5, 0.5), n_from=1, n_to=10) -> float:
    """Partial sum of cylinder-event masses over ``[n_from, n_to]``.

    Terms that underflow to 0 are simply 0; with ``c >= 1`` on the unit
    interval the truncation error past n ~ 60 is below ``2**-60``.
    """
    return math.fsum(masses(schedule, shift, interval, n_from, n_to).tolist())


class HitEstimate(NamedTuple):
    fraction: float
    union_bound: float


def last_hits(schedule, shift, interval, n_to, replicas, seed, workers=None) -> np.ndarray:
    """For each replica, the largest k <= n_to whose coordinate hits its shifted interval (0 if none).

    Replica r samples with seed ``derive_seed(seed, REPLICA, r)``, so any
    ``n_from`` window can be answered from this one array:
    a hit in ``[n_from, n_to]`` happens iff ``last_hit >= n_from``.
    """
    from . import rng
    from .generators import _gaussian_values
    from .parallel import map_replicas

    lo, hi = _check_interval(interval)
    if replicas < 1:
        raise ValidationError(f"must be >= 1, got {replicas}", field="M")
    if n_to < 1:
        return np.zeros(replicas, dtype=np.int64)
    h = shift.evaluate(n_to)
    lo_k, hi_k = lo + h, hi + h
    idx = np.arange(1, n_to + 1)

    def one(r):
        # same draws as sample_gaussian_prefix(schedule, n_to, replica_seed), minus validation
        x = _gaussian_values(schedule, n_to, rng.derive_seed(seed, rng.REPLICA, r))
        hit = (x >= lo_k) & (x <= hi_k)
        return int(idx[hit].max()) if hit.any() else 0

    return np.array(map_replicas(one, replicas, workers), dtype=np.int64)


def limsup_hit_estimate(schedule, shift=ZERO_SHIFT, interval=(-0.5, 0.5), n_from=1, n_to=10,
                        replicas=1000, seed=0, workers=None) -> HitEstimate:
    """Monte Carlo fraction of sampled sequences hitting some shifted event with index in ``[n_from, n_to]``.

    "Infinitely often" is not observable on a finite prefix; hitting at least
    once in the window is the surrogate, and ``union_bound`` (the
    Borel-Cantelli partial sum over the same window) bounds its probability.
    Expect ``fraction <= union_bound + 3*sqrt(union_bound/M)``; this is
    reported by callers rather than enforced.
    """
    _check_interval(interval)
    if replicas < 1:
        raise ValidationError(f"must be >= 1, got {replicas}", field="M")
    if n_from > n_to:
        return HitEstimate(0.0, 0.0)
    _check_range(n_from, n_to, schedule)
    hits = last_hits(schedule, shift, interval, n_to, replicas, seed, workers)
    fraction = float(np.count_nonzero(hits >= n_from)) / replicas
    return HitEstimate(fraction, borel_cantelli_sum(schedule, shift, interval, n_from, n_to))
