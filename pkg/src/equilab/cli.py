"""Command-line front end.

Exit codes: 0 success or pass, 1 semantic failure (inconsistent verdict with
``--strict``, failed experiment), 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .config import load_file
from .equidist import DEFAULT_BANK_IDS, EquidistReport, resolve_bank, ud_verdict
from .errors import ValidationError
from .experiments import NAMES, ExperimentConfig, run
from .generators import GeneratorSpec, generate
from .measures import GaussianSchedule, geometric_envelope, masses, shift_monotonicity_check, CylinderEvent
from .sequences import ShiftVector
from .serialize import canonical_json, cell, csv_text

KIND_ALIASES = {
    "kronecker": "kronecker",
    "vdc": "van_der_corput",
    "van-der-corput": "van_der_corput",
    "iid-uniform": "iid_uniform",
    "uniform": "iid_uniform",
    "gaussian": "gaussian_schedule",
    "gaussian-schedule": "gaussian_schedule",
}

# experiment flags that map onto ExperimentConfig params (flag name == config-file key)
EXPERIMENT_FLAGS = (
    ("threshold", float), ("allowed-failures", float), ("grid", int), ("c", float), ("n-max", int),
    ("shift-const", float), ("shift-linear", float), ("density-floor", float), ("n-from", str),
    ("slack-sigmas", float), ("lo", float), ("hi", float), ("bank", str), ("generator", str),
)


class Failure(Exception):
    """Semantic failure: exit code 1."""


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit(text, path):
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def _add_shift_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--shift-const", type=float, metavar="H", help="h_k = H")
    g.add_argument("--shift-linear", type=float, metavar="S", help="h_k = S * k")
    g.add_argument("--shift-explicit", metavar="H1,H2,...", help="h_k listed, zero past the end")


def _shift_from(args):
    if args.shift_const is not None:
        return ShiftVector.constant(args.shift_const)
    if args.shift_linear is not None:
        return ShiftVector.linear(args.shift_linear)
    if args.shift_explicit is not None:
        try:
            vals = [float(v) for v in args.shift_explicit.split(",") if v.strip()]
        except ValueError:
            raise ValidationError(f"not a list of reals: {args.shift_explicit!r}", field="shift-explicit") from None
        return ShiftVector.explicit(vals)
    return None


# --------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    if args.spec:
        try:
            text = sys.stdin.read() if args.spec == "-" else Path(args.spec).read_text()
            spec = GeneratorSpec.from_dict(json.loads(text))
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError(f"cannot read generator spec: {e}", field="spec") from None
    else:
        if args.kind is None:
            raise ValidationError("either --kind or --spec is required", field="kind")
        kind = KIND_ALIASES[args.kind]
        if kind == "kronecker":
            params = {"alpha": args.alpha if args.alpha is not None else (math.sqrt(5) - 1) / 2}
        elif kind == "van_der_corput":
            params = {"base": args.base}
        elif kind == "iid_uniform":
            params = {"a": args.a, "b": args.b}
        else:
            params = {"schedule": GaussianSchedule(c=args.c, n_max=args.n_max)}
        spec = GeneratorSpec(kind, params, shift=_shift_from(args), seed=args.seed)
    values = generate(spec, args.n).tolist()
    if args.format == "json":
        text = json.dumps(values) + "\n"
    else:
        text = "".join(cell(v) + "\n" for v in values)
    _emit(text, args.output)
    return 0


# --------------------------------------------------------------------------
# stats


def read_values(path) -> list:
    try:
        text = sys.stdin.read() if path in (None, "-") else Path(path).read_text()
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror}", field="input") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        try:
            v = float(s)
        except ValueError:
            raise ValidationError(f"line {lineno}: not a real number: {s!r}", field="input") from None
        if not math.isfinite(v):
            raise ValidationError(f"line {lineno}: value is not finite: {s!r}", field="input")
        values.append(v)
    if not values:
        raise ValidationError("input is empty", field="input")
    return values


def cmd_stats(args) -> int:
    values = read_values(args.input)
    bank = [] if args.bank.strip().lower() == "none" else resolve_bank(args.bank)
    report = ud_verdict(values, args.a, args.b, args.grid, args.threshold, bank)
    if args.format == "csv":
        text = csv_text(EquidistReport.CSV_HEADER, report.csv_rows())
    else:
        text = canonical_json(report.to_dict())
    _emit(text, args.output)
    if args.strict and not report.consistent:
        raise Failure(f"verdict inconsistent (star discrepancy {report.star_discrepancy!r} >= {report.threshold!r})")
    return 0


# --------------------------------------------------------------------------
# mass


MASS_HEADER = ("n", "sigma", "shift", "mass", "centered_mass", "cumulative", "envelope")


def cmd_mass(args) -> int:
    sched = GaussianSchedule(c=args.c, n_max=args.n_max)
    shift = _shift_from(args) or ShiftVector.constant(0.0)
    interval = (args.lo, args.hi)
    m = masses(sched, shift, interval, args.n_from, args.n_to).tolist()
    rows, cum = [], []
    for i, n in enumerate(range(args.n_from, args.n_to + 1)):
        h = shift.at(n)
        _, centered = shift_monotonicity_check(CylinderEvent(n, args.lo, args.hi, h), sched)
        cum.append(m[i])
        rows.append({
            "n": n,
            "sigma": sched.sigma(n),
            "shift": h,
            "mass": m[i],
            "centered_mass": centered,
            "cumulative": math.fsum(cum),
            "envelope": geometric_envelope(args.n_from, n),
        })
    if args.format == "csv":
        text = csv_text(MASS_HEADER, ([r[k] for k in MASS_HEADER] for r in rows))
    else:
        text = canonical_json({
            "schedule": sched.to_dict(),
            "interval": [args.lo, args.hi],
            "shift": shift.to_dict(),
            "n_from": args.n_from,
            "n_to": args.n_to,
            "value": math.fsum(m),
            "envelope": geometric_envelope(args.n_from, args.n_to),
            "rows": rows,
        })
    _emit(text, args.output)
    return 0


# --------------------------------------------------------------------------
# experiment


def cmd_experiment(args) -> int:
    if args.name not in NAMES:
        raise ValidationError(f"unknown experiment {args.name!r}; valid names: {', '.join(NAMES)}", field="name")
    overrides = {}
    if args.config:
        overrides.update(load_file(args.config))
        overrides.pop("version", None)
    for key in ("N", "M", "seed"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    for flag, _ in EXPERIMENT_FLAGS:
        v = getattr(args, flag.replace("-", "_"))
        if v is not None:
            overrides[flag] = v
    for flag in ("center-shift", "keep-raw"):
        v = getattr(args, flag.replace("-", "_"))
        if v is not None:
            overrides[flag] = v
    cfg = ExperimentConfig.build(args.name, overrides)
    result = run(cfg, workers=args.workers)
    js, cs = result.write(args.out_dir)
    print(f"{cfg.name}: {'pass' if result.passed else 'FAIL'} -> {js} {cs}", file=sys.stderr)
    if not result.passed:
        raise Failure(f"experiment {cfg.name} did not pass")
    return 0


# --------------------------------------------------------------------------
# list


def cmd_list(args) -> int:
    lines = ["experiments:"] + [f"  {n}" for n in NAMES]
    lines += ["test functions (default bank):", "  " + ",".join(DEFAULT_BANK_IDS)]
    lines += ["generator kinds:", "  " + ", ".join(sorted(KIND_ALIASES))]
    print("\n".join(lines))
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="equilab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"equilab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a sequence prefix")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--kind", choices=sorted(KIND_ALIASES))
    src.add_argument("--spec", metavar="FILE", help="GeneratorSpec JSON file ('-' for stdin)")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _add_shift_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats", help="equidistribution report for one value per line")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=10)
    p.add_argument("--threshold", type=float)
    p.add_argument("--bank", default=",".join(DEFAULT_BANK_IDS), help="comma-separated ids, or 'none'")
    p.add_argument("--strict", action="store_true", help="exit 1 on an inconsistent verdict")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("mass", help="cylinder-event masses, partial sums and the 2^-n envelope")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--from", dest="n_from", type=int, default=1)
    p.add_argument("--to", dest="n_to", type=int, default=10)
    p.add_argument("--lo", type=float, default=-0.5)
    p.add_argument("--hi", type=float, default=0.5)
    _add_shift_flags(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_mass)

    p = sub.add_parser("experiment", help="run a named experiment and write JSON/CSV")
    p.add_argument("name")
    p.add_argument("--config", metavar="FILE", help="flat key = value file; flags override it")
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--seed", type=int)
    for flag, typ in EXPERIMENT_FLAGS:
        p.add_argument(f"--{flag}", type=typ)
    p.add_argument("--center-shift", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--keep-raw", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--workers", type=int, help="worker threads (default $EQUILAB_THREADS or 1)")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("list", help="list experiments, test functions and generator kinds")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Failure as e:
        print(f"equilab: {e}", file=sys.stderr)
        return 1
    except (ValidationError, ValueError, OSError) as e:
        print(f"equilab: error: {e}".replace("\n", " "), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
