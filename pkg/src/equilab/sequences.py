"""Finite sequence prefixes and termwise shift rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


class SequencePrefix:
    """An immutable finite prefix ``x_1 .. x_N`` of a real sequence.

    Values are stored as a read-only float64 array; NaN and infinities are
    rejected so that sorting and counting are always well defined.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0]) + 1
            raise ValidationError(f"non-finite value at index {bad}", field="values")
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self):
        return self._values.size

    def __iter__(self):
        return iter(self._values.tolist())

    def __getitem__(self, item):
        out = self._values[item]
        if isinstance(item, slice):
            return SequencePrefix(out)
        return float(out)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values
        return self._values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, SequencePrefix):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash(self._values.tobytes())

    def __repr__(self):
        n = len(self)
        head = ", ".join(repr(v) for v in self._values[:5].tolist())
        return f"SequencePrefix(N={n}, [{head}{', ...' if n > 5 else ''}])"

    def tolist(self):
        return self._values.tolist()


def as_prefix(x) -> SequencePrefix:
    return x if isinstance(x, SequencePrefix) else SequencePrefix(x)


_RULES = ("constant", "explicit", "linear")


@dataclass(frozen=True)
class ShiftVector:
    """A translation ``(h_k)_{k >= 1}``.

    ``constant``: h_k = c.  ``linear``: h_k = slope * k.  ``explicit``: h_k is
    the k-th stored value and 0 past the end (zero padded, never cycled).
    """

    rule: str = "constant"
    c: float = 0.0
    slope: float = 0.0
    values: tuple = field(default=())

    def __post_init__(self):
        if self.rule not in _RULES:
            raise ValidationError(f"unknown shift rule {self.rule!r}; expected one of {_RULES}", field="rule")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        for name, v in (("c", self.c), ("slope", self.slope)):
            if not math.isfinite(v):
                raise ValidationError("must be finite", field=name)
        if not all(math.isfinite(v) for v in self.values):
            raise ValidationError("must be finite", field="values")

    @classmethod
    def constant(cls, c: float) -> "ShiftVector":
        return cls("constant", c=float(c))

    @classmethod
    def explicit(cls, values) -> "ShiftVector":
        return cls("explicit", values=tuple(values))

    @classmethod
    def linear(cls, slope: float) -> "ShiftVector":
        return cls("linear", slope=float(slope))

    def at(self, k: int) -> float:
        """h_k for a 1-based index k."""
        if k < 1:
            raise ValidationError("index must be >= 1", field="k")
        if self.rule == "constant":
            return float(self.c)
        if self.rule == "linear":
            return float(self.slope * k)
        return self.values[k - 1] if k <= len(self.values) else 0.0

    def evaluate(self, n: int) -> np.ndarray:
        """``(h_1, ..., h_n)`` as an array."""
        if self.rule == "constant":
            return np.full(n, float(self.c))
        if self.rule == "linear":
            return self.slope * np.arange(1, n + 1, dtype=np.float64)
        out = np.zeros(n)
        m = min(n, len(self.values))
        out[:m] = self.values[:m]
        return out

    def __neg__(self):
        return ShiftVector(self.rule, c=-self.c, slope=-self.slope, values=tuple(-v for v in self.values))

    def to_dict(self) -> dict:
        if self.rule == "constant":
            return {"rule": "constant", "c": self.c}
        if self.rule == "linear":
            return {"rule": "linear", "slope": self.slope}
        return {"rule": "explicit", "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "ShiftVector":
        rule = d.get("rule")
        try:
            if rule == "constant":
                return cls.constant(d["c"])
            if rule == "linear":
                return cls.linear(d["slope"])
            if rule == "explicit":
                return cls.explicit(d["values"])
        except KeyError as e:
            raise ValidationError(f"missing key {e.args[0]!r} for {rule} shift", field=e.args[0]) from None
        raise ValidationError(f"unknown shift rule {rule!r}; expected one of {_RULES}", field="rule")


ZERO_SHIFT = ShiftVector.constant(0.0)
