"""Equidistribution statistics for finite prefixes.

Counting uses closed intervals ``[c, d]``.  The star discrepancy of points
in [0, 1) is computed from the order statistics::

    D*_N = 1/(2N) + max_i |x_(i) - (2i - 1)/(2N)|
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .sequences import SequencePrefix, as_prefix

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"

_ONE_MINUS = np.nextafter(1.0, 0.0)


def fractional_parts(prefix) -> SequencePrefix:
    """``x - floor(x)`` termwise, always in [0, 1).

    Tiny negative inputs whose fractional part rounds up to 1.0 are mapped to
    the largest double below 1.
    """
    x = as_prefix(prefix).values
    return SequencePrefix(np.minimum(x - np.floor(x), _ONE_MINUS))


def center_shift(prefix) -> SequencePrefix:
    """``{x} - 1/2`` termwise, in [-1/2, 1/2)."""
    return SequencePrefix(fractional_parts(prefix).values - 0.5)


@dataclass(frozen=True)
class IntervalRatio:
    c: float
    d: float
    a: float
    b: float
    count: int
    n: int
    empirical: float
    target: float

    @property
    def deviation(self) -> float:
        return abs(self.empirical - self.target)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("c", "d", "a", "b", "count", "n", "empirical", "target")}


def _nonempty(prefix):
    x = as_prefix(prefix).values
    if x.size == 0:
        raise ValidationError("prefix must be nonempty", field="prefix")
    return x


def interval_ratio(prefix, c, d, a=0.0, b=1.0) -> IntervalRatio:
    """Fraction of the prefix in ``[c, d]`` against the uniform target ``(d - c)/(b - a)``."""
    x = _nonempty(prefix)
    c, d, a, b = (float(v) for v in (c, d, a, b))
    if not all(math.isfinite(v) for v in (c, d, a, b)):
        raise ValidationError("interval endpoints must be finite", field="c")
    if not (a <= c < d <= b):
        raise ValidationError(f"need a <= c < d <= b, got a={a}, c={c}, d={d}, b={b}", field="c")
    count = int(np.count_nonzero((x >= c) & (x <= d)))
    return IntervalRatio(c, d, a, b, count, x.size, count / x.size, (d - c) / (b - a))


def star_discrepancy(prefix) -> float:
    """Star discrepancy of a nonempty prefix with all values in [0, 1)."""
    x = _nonempty(prefix)
    if np.any((x < 0.0) | (x >= 1.0)):
        raise ValidationError(
            "star discrepancy needs values in [0, 1); apply fractional_parts first", field="prefix"
        )
    return _sorted_formula(np.sort(x), x.size)


def _sorted_formula(u, n):
    # u: sorted points inside [0, 1]; n: total number of points (may exceed u.size)
    if u.size == 0:
        return 1.0
    i = np.arange(1, u.size + 1)
    d = 1.0 / (2 * n) + float(np.max(np.abs(u - (2 * i - 1) / (2.0 * n))))
    if u.size < n:
        d = max(d, 1.0 - u.size / n)
    return min(d, 1.0)


@dataclass(frozen=True)
class TestFunction:
    """A continuous test function on [0, 1] with a known integral.

    Forms: ``monomial`` (x**power), ``trig_cos`` / ``trig_sin``
    (cos/sin(2 pi h x)) and ``piecewise_linear`` through ``knots``.
    """

    __test__ = False

    id: str
    form: str
    power: int = 0
    h: int = 1
    knots: tuple = ()

    def __post_init__(self):
        if self.form == "monomial":
            if int(self.power) < 0:
                raise ValidationError(f"must be >= 0, got {self.power}", field="power")
        elif self.form in ("trig_cos", "trig_sin"):
            if int(self.h) < 1:
                raise ValidationError(f"must be >= 1, got {self.h}", field="h")
        elif self.form == "piecewise_linear":
            knots = tuple((float(x), float(y)) for x, y in self.knots)
            xs = [k[0] for k in knots]
            if len(knots) < 2 or xs[0] != 0.0 or xs[-1] != 1.0 or any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValidationError("knots must be strictly increasing in x from 0 to 1", field="knots")
            object.__setattr__(self, "knots", knots)
        else:
            raise ValidationError(f"unknown form {self.form!r}", field="form")

    @classmethod
    def monomial(cls, power):
        return cls(f"mono{power}", "monomial", power=int(power))

    @classmethod
    def trig_cos(cls, h):
        return cls(f"cos{h}", "trig_cos", h=int(h))

    @classmethod
    def trig_sin(cls, h):
        return cls(f"sin{h}", "trig_sin", h=int(h))

    @classmethod
    def piecewise_linear(cls, knots, id="pwl"):
        return cls(id, "piecewise_linear", knots=tuple(knots))

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.form == "monomial":
            return np.ones_like(x) if self.power == 0 else x**self.power
        if self.form == "trig_cos":
            return np.cos(2.0 * np.pi * self.h * x)
        if self.form == "trig_sin":
            return np.sin(2.0 * np.pi * self.h * x)
        xs, ys = zip(*self.knots)
        return np.interp(x, xs, ys)

    @property
    def exact_integral(self) -> float:
        if self.form == "monomial":
            return 1.0 / (self.power + 1)
        if self.form in ("trig_cos", "trig_sin"):
            return 0.0
        return simpson(self, 2**12)


def simpson(f, panels) -> float:
    """Composite Simpson rule on [0, 1] with an even number of panels."""
    x = np.linspace(0.0, 1.0, panels + 1)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return math.fsum((w * f(x)).tolist()) / (3.0 * panels)


_ID = re.compile(r"^(mono|cos|sin)(\d+)$")


def bank_function(fid: str) -> TestFunction:
    """Look up a bank id such as ``mono2``, ``cos1`` or ``sin3``."""
    m = _ID.match(fid.strip())
    if not m:
        raise ValidationError(f"unknown test function id {fid!r}; expected monoP, cosH or sinH", field="bank")
    kind, k = m.group(1), int(m.group(2))
    if kind == "mono":
        return TestFunction.monomial(k)
    if k < 1:
        raise ValidationError(f"unknown test function id {fid!r}; frequency must be >= 1", field="bank")
    return TestFunction.trig_cos(k) if kind == "cos" else TestFunction.trig_sin(k)


DEFAULT_BANK_IDS = tuple(
    [f"mono{p}" for p in range(5)] + [f"cos{h}" for h in (1, 2, 3)] + [f"sin{h}" for h in (1, 2, 3)]
)


def default_bank() -> list[TestFunction]:
    """monomials of degree 0..4 and cos/sin at frequencies 1..3 (11 functions)."""
    return [bank_function(i) for i in DEFAULT_BANK_IDS]


def resolve_bank(bank) -> list[TestFunction]:
    if bank is None:
        return []
    if isinstance(bank, str):
        bank = [b for b in bank.split(",") if b.strip()]
    return [b if isinstance(b, TestFunction) else bank_function(b) for b in bank]


def weyl_average(prefix, f: TestFunction):
    """``(average, residual)`` of ``f`` over the fractional parts of the prefix.

    The sum is exactly rounded, so the result does not depend on the order
    of the prefix.
    """
    x = _nonempty(prefix)
    u = np.minimum(x - np.floor(x), _ONE_MINUS)
    avg = math.fsum(f(u).tolist()) / x.size
    return avg, abs(avg - f.exact_integral)


@dataclass(frozen=True)
class IndexDensityEstimate:
    """Running density of ``J = {k : x_k outside [lo, hi]}``."""

    description: str
    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.size)

    @property
    def densities(self) -> np.ndarray:
        return self.counts / np.arange(1, self.counts.size + 1)

    def density_at(self, n: int) -> float:
        return float(self.counts[n - 1]) / n

    @property
    def final_estimate(self) -> float:
        return self.density_at(self.n)

    def to_dict(self) -> dict:
        return {"description": self.description, "n": self.n, "final_estimate": self.final_estimate}


def index_set_density(prefix, interval=(-0.5, 0.5)) -> IndexDensityEstimate:
    x = _nonempty(prefix)
    lo, hi = (float(v) for v in interval)
    if not lo < hi:
        raise ValidationError(f"need lo < hi, got ({lo}, {hi})", field="interval")
    outside = (x < lo) | (x > hi)
    counts = np.cumsum(outside, dtype=np.int64)
    counts.setflags(write=False)
    return IndexDensityEstimate(f"x_k not in [{lo!r}, {hi!r}]", counts)


def default_threshold(n: int) -> float:
    """``2/sqrt(N) + 0.01`` clamped to [0.01, 0.5]."""
    return min(max(2.0 / math.sqrt(n) + 0.01, 0.01), 0.5)


@dataclass(frozen=True)
class EquidistReport:
    """Star discrepancy, ratio table, Weyl residuals and the thresholded verdict.

    The verdict is a diagnostic: "consistent" means the prefix's star
    discrepancy against the uniform law on [a, b] is below ``threshold``.
    It is not a hypothesis test.
    """

    n: int
    star_discrepancy: float
    ratio_table: list
    weyl_residuals: dict
    verdict: str
    threshold: float
    a: float = 0.0
    b: float = 1.0
    outside: IndexDensityEstimate | None = field(default=None, compare=False)

    @property
    def consistent(self) -> bool:
        return self.verdict == CONSISTENT

    @property
    def outside_fraction(self) -> float:
        return 0.0 if self.outside is None else self.outside.final_estimate

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "star_discrepancy": self.star_discrepancy,
            "ratio_table": [r.to_dict() for r in self.ratio_table],
            "weyl_residuals": dict(self.weyl_residuals),
            "verdict": self.verdict,
            "threshold": self.threshold,
        }

    CSV_HEADER = ("row", "c", "d", "a", "b", "count", "n", "empirical", "target",
                  "star_discrepancy", "verdict", "threshold")

    def csv_rows(self):
        for r in self.ratio_table:
            yield ("ratio", r.c, r.d, r.a, r.b, r.count, r.n, r.empirical, r.target, "", "", "")
        yield ("summary", "", "", self.a, self.b, "", self.n, "", "", self.star_discrepancy, self.verdict,
               self.threshold)


def ud_verdict(prefix, a=0.0, b=1.0, grid=10, threshold=None, bank=None) -> EquidistReport:
    """Thresholded check that a prefix looks uniformly distributed in ``[a, b]``.

    Inside points are rescaled to [0, 1]; points outside [a, b] never count,
    so the discrepancy is at least the outside fraction and the verdict is
    inconsistent whenever that fraction reaches ``threshold``.  ``threshold``
    defaults to :func:`default_threshold`.  ``bank`` (ids or TestFunctions)
    adds Weyl residuals of the rescaled prefix.
    """
    x = _nonempty(prefix)
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValidationError(f"need finite a < b, got a={a}, b={b}", field="a")
    if isinstance(grid, bool) or int(grid) != grid or grid < 2:
        raise ValidationError(f"must be an integer >= 2, got {grid!r}", field="grid")
    n = x.size
    if threshold is None:
        threshold = default_threshold(n)
    threshold = float(threshold)
    if not threshold > 0:
        raise ValidationError(f"must be > 0, got {threshold}", field="threshold")

    outside = index_set_density(x, (a, b))
    inside = x[(x >= a) & (x <= b)]
    disc = _sorted_formula(np.sort((inside - a) / (b - a)), n)

    edges = np.linspace(a, b, int(grid) + 1)
    table = [interval_ratio(x, edges[j], edges[j + 1], a, b) for j in range(int(grid))]

    scaled = (x - a) / (b - a)
    residuals = {f.id: weyl_average(scaled, f)[1] for f in resolve_bank(bank)}

    ok = disc < threshold and outside.final_estimate < threshold
    return EquidistReport(n, disc, table, residuals, CONSISTENT if ok else INCONSISTENT, threshold, a, b, outside)
