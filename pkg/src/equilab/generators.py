"""Deterministic generators for finite prefixes of real sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import ValidationError
from .measures import GaussianSchedule, normal_quantile
from .sequences import SequencePrefix, ShiftVector, as_prefix

__all__ = [
    "GeneratorSpec",
    "SequencePrefix",
    "ShiftVector",
    "apply_shift",
    "generate",
    "sample_gaussian_prefix",
    "kronecker",
    "van_der_corput",
]

KINDS = ("kronecker", "van_der_corput", "iid_uniform", "gaussian_schedule")

_ONE_MINUS = np.nextafter(1.0, 0.0)


def kronecker(alpha: float, n: int) -> np.ndarray:
    """``{k * alpha}`` for k = 1..n in plain double precision (error grows like k * ulp)."""
    t = np.arange(1, n + 1, dtype=np.float64) * alpha
    frac = t - np.floor(t)
    return np.minimum(frac, _ONE_MINUS)


def van_der_corput(base: int, n: int) -> np.ndarray:
    """Radical inverses of 1..n in ``base``: base 2 gives 0.5, 0.25, 0.75, ..."""
    k = np.arange(1, n + 1, dtype=np.int64)
    out = np.zeros(n)
    scale = 1.0 / base
    while np.any(k):
        k, digit = np.divmod(k, base)
        out += digit * scale
        scale /= base
    return out


def _iid_uniform(a, b, n, seed):
    u = rng.uniform_closed_open(rng.stream(seed, rng.UNIFORM), n)
    x = a + (b - a) * u
    # a + (b - a) * u may round up to b
    return np.minimum(x, np.nextafter(b, a))


def _finite(name, v):
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ValidationError(f"must be a real number, got {v!r}", field=name) from None
    if not math.isfinite(v):
        raise ValidationError("must be finite", field=name)
    return v


@dataclass(frozen=True)
class GeneratorSpec:
    """How a prefix is produced.

    ``params`` depends on ``kind``: ``alpha`` for kronecker, ``base`` for
    van_der_corput, ``a`` and ``b`` for iid_uniform, ``schedule`` (a
    :class:`GaussianSchedule`) for gaussian_schedule.  ``seed`` is ignored by
    the deterministic kinds.
    """

    kind: str
    params: dict = field(default_factory=dict)
    shift: ShiftVector | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}", field="kind")
        p = dict(self.params)
        if self.kind == "kronecker":
            if "alpha" not in p:
                raise ValidationError("required", field="alpha")
            p["alpha"] = _finite("alpha", p["alpha"])
        elif self.kind == "van_der_corput":
            base = p.get("base", 2)
            if isinstance(base, float) and base.is_integer():
                base = int(base)
            if isinstance(base, bool) or not isinstance(base, (int, np.integer)):
                raise ValidationError(f"must be an integer >= 2, got {base!r}", field="base")
            if int(base) < 2:
                raise ValidationError(f"must be >= 2, got {base}", field="base")
            p["base"] = int(base)
        elif self.kind == "iid_uniform":
            a = _finite("a", p.get("a", 0.0))
            b = _finite("b", p.get("b", 1.0))
            if not a < b:
                raise ValidationError(f"need a < b, got a={a}, b={b}", field="a")
            p["a"], p["b"] = a, b
        else:
            sched = p.get("schedule", GaussianSchedule())
            if isinstance(sched, dict):
                sched = GaussianSchedule.from_dict(sched)
            if not isinstance(sched, GaussianSchedule):
                raise ValidationError(f"expected a GaussianSchedule, got {sched!r}", field="schedule")
            p["schedule"] = sched
        object.__setattr__(self, "params", p)
        try:
            object.__setattr__(self, "seed", rng.check_seed(self.seed))
        except ValueError as e:
            raise ValidationError(str(e), field="seed") from None
        if self.shift is not None and not isinstance(self.shift, ShiftVector):
            raise ValidationError(f"expected a ShiftVector, got {self.shift!r}", field="shift")

    @classmethod
    def kronecker(cls, alpha, **kw):
        return cls("kronecker", {"alpha": alpha}, **kw)

    @classmethod
    def van_der_corput(cls, base=2, **kw):
        return cls("van_der_corput", {"base": base}, **kw)

    @classmethod
    def iid_uniform(cls, a=0.0, b=1.0, **kw):
        return cls("iid_uniform", {"a": a, "b": b}, **kw)

    @classmethod
    def gaussian_schedule(cls, schedule=None, **kw):
        return cls("gaussian_schedule", {"schedule": schedule or GaussianSchedule()}, **kw)

    def to_dict(self) -> dict:
        params = dict(self.params)
        if "schedule" in params:
            params["schedule"] = params["schedule"].to_dict()
        return {
            "kind": self.kind,
            "params": params,
            "shift": None if self.shift is None else self.shift.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        if "kind" not in d:
            raise ValidationError("required", field="kind")
        shift = d.get("shift")
        return cls(
            kind=d["kind"],
            params=dict(d.get("params") or {}),
            shift=None if shift is None else ShiftVector.from_dict(shift),
            seed=d.get("seed", 0),
        )


def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"must be a positive integer, got {n!r}", field="n")
    return int(n)


def generate(spec: GeneratorSpec, n: int) -> SequencePrefix:
    """The first ``n`` terms of the sequence described by ``spec``."""
    n = _check_n(n)
    p = spec.params
    if spec.kind == "kronecker":
        x = kronecker(p["alpha"], n)
    elif spec.kind == "van_der_corput":
        x = van_der_corput(p["base"], n)
    elif spec.kind == "iid_uniform":
        x = _iid_uniform(p["a"], p["b"], n, spec.seed)
    else:
        x = _gaussian_values(p["schedule"], n, spec.seed)
    if spec.shift is not None:
        x = x + spec.shift.evaluate(n)
    return SequencePrefix(x)


def _gaussian_values(schedule, n, seed):
    u = rng.uniform_open(rng.stream(seed, rng.GAUSS), n)
    return schedule.sigmas(n) * normal_quantile(u)


def sample_gaussian_prefix(schedule: GaussianSchedule, n: int, seed: int) -> SequencePrefix:
    """One draw from the product of normal(0, sigma_k) laws, truncated to n coordinates.

    Coordinates come from the inverse normal CDF applied to a counter-based
    uniform stream, so the same ``(schedule, n, seed)`` always gives the same
    prefix and longer prefixes extend shorter ones.
    """
    if not isinstance(schedule, GaussianSchedule):
        raise ValidationError(f"expected a GaussianSchedule, got {schedule!r}", field="schedule")
    return SequencePrefix(_gaussian_values(schedule, _check_n(n), seed))


def apply_shift(prefix, shift: ShiftVector) -> SequencePrefix:
    x = as_prefix(prefix).values
    return SequencePrefix(x + shift.evaluate(x.size))
