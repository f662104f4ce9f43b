"""Named Monte Carlo experiments.

Each replica r draws from its own stream ``derive_seed(seed, REPLICA, r)``
and produces one summary row; aggregates are a pure function of the rows
and the config, so results are identical for any worker count.

These are finite-sample shadows of measure-theoretic statements about
sequences in R^N.  A passing run is evidence about sampled prefixes, not a
verification of any statement about shy or prevalent sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, rng
from .config import load_defaults, to_bool, to_int, to_int_list, to_str_list
from .equidist import (
    CONSISTENT,
    center_shift,
    fractional_parts,
    resolve_bank,
    star_discrepancy,
    ud_verdict,
    weyl_average,
)
from .errors import ValidationError
from .generators import GeneratorSpec, apply_shift, generate, sample_gaussian_prefix
from .measures import GaussianSchedule, borel_cantelli_sum, geometric_envelope, last_hits
from .parallel import map_replicas
from .sequences import ShiftVector
from .serialize import canonical_json, csv_text

NAMES = ("uniform-ae-ud", "gaussian-not-ud", "gaussian-mod1-ud", "borel-cantelli", "weyl-slln")


def _opt_float(v):
    if v is None or (isinstance(v, str) and v.strip() == ""):
        return None
    return float(v)


PARAM_TYPES = {
    "threshold": _opt_float,
    "allowed_failures": float,
    "grid": to_int,
    "c": float,
    "n_max": to_int,
    "shift_const": float,
    "shift_linear": float,
    "density_floor": float,
    "n_from": to_int_list,
    "slack_sigmas": float,
    "lo": float,
    "hi": float,
    "bank": to_str_list,
    "generator": str,
    "center_shift": to_bool,
    "keep_raw": to_bool,
}

_TOP = ("N", "M", "seed")


def _key(k: str) -> str:
    return k.strip().replace("-", "_")


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment name, prefix length N, replica count M, root seed and typed params."""

    name: str
    N: int
    M: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in NAMES:
            raise ValidationError(f"unknown experiment {self.name!r}; valid names: {', '.join(NAMES)}", field="name")
        for k in ("N", "M"):
            v = getattr(self, k)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ValidationError(f"must be an integer, got {v!r}", field=k)
        if self.N < 10:
            raise ValidationError(f"must be >= 10, got {self.N}", field="N")
        if self.M < 1:
            raise ValidationError(f"must be >= 1, got {self.M}", field="M")
        try:
            object.__setattr__(self, "seed", rng.check_seed(self.seed))
        except ValueError as e:
            raise ValidationError(str(e), field="seed") from None
        allowed = set(_defaults(self.name)[1]) | {"keep_raw"}
        typed = {}
        for k, v in self.params.items():
            k = _key(k)
            if k not in allowed:
                raise ValidationError(
                    f"unknown parameter {k!r} for {self.name}; allowed: {', '.join(sorted(allowed))}", field=k
                )
            try:
                typed[k] = PARAM_TYPES[k](v)
            except (TypeError, ValueError) as e:
                raise ValidationError(f"bad value {v!r}: {e}", field=k) from None
        object.__setattr__(self, "params", typed)

    @classmethod
    def build(cls, name: str, overrides: dict | None = None) -> "ExperimentConfig":
        """Defaults for ``name`` overlaid with ``overrides`` (flag-style keys, str or typed values)."""
        if name not in NAMES:
            raise ValidationError(f"unknown experiment {name!r}; valid names: {', '.join(NAMES)}", field="name")
        top, params = _defaults(name)
        params = dict(params)
        params.setdefault("keep_raw", "false")
        for k, v in (overrides or {}).items():
            if v is None:
                continue
            k = _key(k)
            if k in _TOP:
                top[k] = v
            else:
                params[k] = v
        try:
            N, M, seed = (to_int(top[k]) for k in _TOP)
        except (TypeError, ValueError) as e:
            raise ValidationError(f"bad value: {e}", field="N/M/seed") from None
        return cls(name, N, M, seed, params)

    def get(self, key):
        return self.params.get(key)

    def to_dict(self) -> dict:
        return {"name": self.name, "N": self.N, "M": self.M, "seed": self.seed,
                "params": {k: self.params[k] for k in sorted(self.params)}}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(d["name"], d["N"], d["M"], d.get("seed", 0), d.get("params", {}))

    @property
    def stem(self) -> str:
        return f"{self.name}-seed{self.seed}-N{self.N}-M{self.M}"


def _defaults(name):
    raw = load_defaults(name)
    raw.pop("version", None)
    top = {k: raw.pop(k) for k in _TOP}
    return top, {_key(k): v for k, v in raw.items()}


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    per_replica: list
    aggregate: dict
    passed: bool
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "per_replica": self.per_replica,
            "aggregate": self.aggregate,
            "pass": self.passed,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def to_csv(self) -> str:
        cols = [k for k in self.per_replica[0] if k != "values"] if self.per_replica else ["replica"]
        table = csv_text(cols, ([row[k] for k in cols] for row in self.per_replica))
        footer = csv_text(("aggregate", "value"), _flatten(self.aggregate))
        return table + "\n" + footer

    def write(self, out_dir) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        js = out_dir / f"{self.config.stem}.json"
        cs = out_dir / f"{self.config.stem}.csv"
        js.write_text(self.to_json())
        cs.write_text(self.to_csv())
        return js, cs


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            for i, item in enumerate(v):
                yield from _flatten(item, f"{key}[{i}].")
        else:
            yield key, v


# --------------------------------------------------------------------------
# aggregation


def column_stats(values) -> dict:
    v = np.asarray(values, dtype=np.float64)
    q05, q50, q95 = np.quantile(v, [0.05, 0.5, 0.95]).tolist()
    return {
        "mean": math.fsum(v.tolist()) / v.size,
        "min": float(v.min()),
        "max": float(v.max()),
        "q05": q05,
        "q50": q50,
        "q95": q95,
    }


def _numeric_columns(rows):
    return [k for k, v in rows[0].items()
            if k != "replica" and isinstance(v, (int, float)) and not isinstance(v, bool)]


def _stats(rows) -> dict:
    return {k: column_stats([r[k] for r in rows]) for k in _numeric_columns(rows)}


def _consistent_fraction(rows):
    return sum(1 for r in rows if r["verdict"] == CONSISTENT) / len(rows)


def _agg_uniform(cfg, rows):
    agg = {"statistics": _stats(rows), "consistent_fraction": _consistent_fraction(rows)}
    agg["pass"] = agg["consistent_fraction"] >= 1.0 - cfg.get("allowed_failures")
    return agg


def _agg_not_ud(cfg, rows):
    sched = _schedule(cfg)
    n_top = min(cfg.N, sched.n_max)
    agg = {
        "statistics": _stats(rows),
        "inconsistent_fraction": 1.0 - _consistent_fraction(rows),
        "expected_inside_bound": borel_cantelli_sum(sched, _shift(cfg), (-0.5, 0.5), 1, n_top),
        "envelope": geometric_envelope(1, n_top),
    }
    mean_out = agg["statistics"]["outside_density"]["mean"]
    agg["pass"] = agg["inconsistent_fraction"] == 1.0 and mean_out >= cfg.get("density_floor")
    return agg


def _agg_mod1(cfg, rows):
    agg = {"statistics": _stats(rows), "consistent_fraction": _consistent_fraction(rows)}
    agg["pass"] = agg["statistics"]["star_discrepancy"]["mean"] < cfg.get("threshold")
    return agg


def _agg_bc(cfg, rows):
    sched = _schedule(cfg)
    shift = _shift(cfg)
    interval = (cfg.get("lo"), cfg.get("hi"))
    last = np.array([r["last_hit"] for r in rows])
    sweep = []
    for n_from in cfg.get("n_from"):
        bound = borel_cantelli_sum(sched, shift, interval, n_from, cfg.N)
        fraction = float(np.count_nonzero(last >= n_from)) / cfg.M
        slack = cfg.get("slack_sigmas") * math.sqrt(bound / cfg.M)
        sweep.append({
            "n_from": n_from,
            "n_to": cfg.N,
            "fraction": fraction,
            "union_bound": bound,
            "envelope": geometric_envelope(n_from, cfg.N),
            "slack": slack,
            "within_bound": fraction <= bound + slack,
        })
    fr = [s["fraction"] for s in sweep]
    nonincreasing = all(b <= a for a, b in zip(fr, fr[1:]))
    return {
        "sweep": sweep,
        "nonincreasing": nonincreasing,
        "pass": all(s["within_bound"] for s in sweep) and nonincreasing,
    }


def _agg_weyl(cfg, rows):
    stats = _stats(rows)
    worst = stats["max_residual"]["max"]
    return {"statistics": stats, "max_residual": worst, "pass": worst < cfg.get("threshold")}


_AGGREGATORS = {
    "uniform-ae-ud": _agg_uniform,
    "gaussian-not-ud": _agg_not_ud,
    "gaussian-mod1-ud": _agg_mod1,
    "borel-cantelli": _agg_bc,
    "weyl-slln": _agg_weyl,
}


def recompute_aggregate(config: ExperimentConfig, rows: list) -> dict:
    """Aggregate from (possibly deserialized) per-replica rows."""
    return _AGGREGATORS[config.name](config, rows)


# --------------------------------------------------------------------------
# experiments


def _schedule(cfg):
    return GaussianSchedule(c=cfg.get("c"), n_max=cfg.get("n_max"))


def _shift(cfg):
    const = cfg.get("shift_const") or 0.0
    slope = cfg.get("shift_linear") or 0.0
    if const and slope:
        raise ValidationError("shift-const and shift-linear are mutually exclusive", field="shift_const")
    return ShiftVector.linear(slope) if slope else ShiftVector.constant(const)


def _replica_seed(cfg, r):
    return rng.derive_seed(cfg.seed, rng.REPLICA, r)


def _raw(cfg, row, prefix):
    if cfg.get("keep_raw"):
        row["values"] = prefix.tolist()
    return row


def _expect(cfg, name):
    if cfg.name != name:
        raise ValidationError(f"config is for {cfg.name!r}, not {name!r}", field="name")


def _finish(cfg, rows, notes=()):
    agg = recompute_aggregate(cfg, rows)
    provenance = {"root_seed": cfg.seed, "version": f"equilab {__version__}", "notes": list(notes)}
    return ExperimentResult(cfg, rows, agg, bool(agg["pass"]), provenance)


_SHADOW_NOTE = ("empirical shadow on finite sampled prefixes; does not and cannot verify the "
                "underlying set-theoretic statement")


def run_uniform_ae_ud(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    """i.i.d. uniform(0, 1) prefixes; pass iff enough verdicts are consistent."""
    _expect(cfg, "uniform-ae-ud")
    thr, grid = cfg.get("threshold"), cfg.get("grid")

    def one(r):
        p = generate(GeneratorSpec.iid_uniform(0.0, 1.0, seed=_replica_seed(cfg, r)), cfg.N)
        rep = ud_verdict(p, 0.0, 1.0, grid, thr)
        return _raw(cfg, {"replica": r, "star_discrepancy": rep.star_discrepancy, "verdict": rep.verdict}, p)

    return _finish(cfg, map_replicas(one, cfg.M, workers))


def run_gaussian_not_ud(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    """Transverse Gaussian samples tested for uniformity in [-1/2, 1/2].

    Pass iff every replica is inconsistent and the mean fraction of
    coordinates outside [-1/2, 1/2] reaches ``density_floor``.
    """
    _expect(cfg, "gaussian-not-ud")
    sched, shift = _schedule(cfg), _shift(cfg)
    thr, grid = cfg.get("threshold"), cfg.get("grid")

    def one(r):
        p = sample_gaussian_prefix(sched, cfg.N, _replica_seed(cfg, r))
        p = apply_shift(p, shift)
        rep = ud_verdict(p, -0.5, 0.5, grid, thr)
        row = {
            "replica": r,
            "outside_density": rep.outside_fraction,
            "inside_count": cfg.N - int(rep.outside.counts[-1]),
            "star_discrepancy": rep.star_discrepancy,
            "verdict": rep.verdict,
        }
        return _raw(cfg, row, p)

    notes = [_SHADOW_NOTE]
    if cfg.N > sched.n_max:
        notes.append(f"coordinates beyond n_max={sched.n_max} reuse sigma_{{n_max}}")
    return _finish(cfg, map_replicas(one, cfg.M, workers), notes)


def run_gaussian_mod1_ud(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    """Fractional parts of transverse Gaussian samples; pass iff mean discrepancy < threshold.

    With ``center_shift`` the prefix is mapped to ``{x} - 1/2`` and judged in
    [-1/2, 1/2] instead of [0, 1].
    """
    _expect(cfg, "gaussian-mod1-ud")
    sched = _schedule(cfg)
    thr = cfg.get("threshold")
    centered = cfg.get("center_shift")

    def one(r):
        p = sample_gaussian_prefix(sched, cfg.N, _replica_seed(cfg, r))
        if centered:
            rep = ud_verdict(center_shift(p), -0.5, 0.5, 2, thr)
            d = rep.star_discrepancy
        else:
            d = star_discrepancy(fractional_parts(p))
        row = {"replica": r, "star_discrepancy": d, "verdict": CONSISTENT if d < thr else "inconsistent"}
        return _raw(cfg, row, p)

    notes = [
        _SHADOW_NOTE,
        f"sigma_n = c*2**n saturates at n_max={sched.n_max} so that fractional parts stay resolvable in doubles",
    ]
    return _finish(cfg, map_replicas(one, cfg.M, workers), notes)


def run_borel_cantelli(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    """Hit frequencies of shifted cylinder events for a sweep of window starts.

    Events are indexed ``n_from .. N``.  Each replica records the last index
    it hit, which answers every window of the sweep from the same samples.
    Pass iff every fraction is within ``union_bound + slack`` and the
    fractions do not increase along the sweep.
    """
    _expect(cfg, "borel-cantelli")
    sched, shift = _schedule(cfg), _shift(cfg)
    sweep = cfg.get("n_from")
    if not sweep:
        raise ValidationError("the n_from sweep is empty", field="n_from")
    if any(n < 1 or n > cfg.N for n in sweep):
        raise ValidationError(f"every n_from must lie in [1, N={cfg.N}], got {sweep}", field="n_from")
    if cfg.N > sched.n_max:
        raise ValidationError(f"N={cfg.N} exceeds schedule n_max={sched.n_max}", field="N")
    interval = (cfg.get("lo"), cfg.get("hi"))
    last = last_hits(sched, shift, interval, cfg.N, cfg.M, cfg.seed, workers)
    rows = [{"replica": r, "last_hit": int(h)} for r, h in enumerate(last.tolist())]
    notes = [_SHADOW_NOTE, "'infinitely often' approximated by 'at least once in [n_from, N]'"]
    return _finish(cfg, rows, notes)


def run_weyl_slln(cfg: ExperimentConfig, workers=None) -> ExperimentResult:
    """Weyl averages over the function bank; pass iff the largest residual is below threshold."""
    _expect(cfg, "weyl-slln")
    bank = resolve_bank(cfg.get("bank"))
    if not bank:
        raise ValidationError("the function bank is empty", field="bank")
    gen = cfg.get("generator")
    if gen not in ("uniform", "gaussian_schedule"):
        raise ValidationError(f"must be 'uniform' or 'gaussian_schedule', got {gen!r}", field="generator")
    sched = _schedule(cfg) if gen == "gaussian_schedule" else None

    def one(r):
        seed = _replica_seed(cfg, r)
        if sched is None:
            p = generate(GeneratorSpec.iid_uniform(0.0, 1.0, seed=seed), cfg.N)
        else:
            p = sample_gaussian_prefix(sched, cfg.N, seed)
        row = {"replica": r}
        for f in bank:
            row[f"residual_{f.id}"] = weyl_average(p, f)[1]
        row["max_residual"] = max(row[f"residual_{f.id}"] for f in bank)
        return _raw(cfg, row, p)

    notes = [_SHADOW_NOTE] if sched is not None else []
    return _finish(cfg, map_replicas(one, cfg.M, workers), notes)


_RUNNERS = {
    "uniform-ae-ud": run_uniform_ae_ud,
    "gaussian-not-ud": run_gaussian_not_ud,
    "gaussian-mod1-ud": run_gaussian_mod1_ud,
    "borel-cantelli": run_borel_cantelli,
    "weyl-slln": run_weyl_slln,
}


def run(config: ExperimentConfig, workers=None) -> ExperimentResult:
    """Dispatch on ``config.name``."""
    try:
        runner = _RUNNERS[config.name]
    except KeyError:
        raise ValidationError(f"unknown experiment {config.name!r}; valid names: {', '.join(NAMES)}",
                              field="name") from None
    return runner(config, workers)
