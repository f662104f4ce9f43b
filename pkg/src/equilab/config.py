"""Flat ``key = value`` config files whose keys mirror CLI flag names."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .errors import ValidationError


def parse_flat(text: str, source="<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}", field="config")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ValidationError(f"{source}:{lineno}: empty key", field="config")
        out[key] = value
    return out


def load_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ValidationError(f"cannot read config file {path}: {e.strerror}", field="config") from None
    return parse_flat(text, str(path))


def load_defaults(name: str) -> dict:
    ref = resources.files("equilab").joinpath("defaults", f"{name}.cfg")
    return parse_flat(ref.read_text(), f"defaults/{name}.cfg")


def to_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def to_int_list(v) -> list:
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    return [int(x) for x in str(v).split(",") if x.strip()]


def to_str_list(v) -> list:
    if isinstance(v, (list, tuple)):
        return [str(x) for x in v]
    return [x.strip() for x in str(v).split(",") if x.strip()]


def to_int(v) -> int:
    if isinstance(v, bool):
        raise ValueError(f"not an integer: {v!r}")
    if isinstance(v, float):
        if not v.is_integer():
            raise ValueError(f"not an integer: {v!r}")
        return int(v)
    return int(str(v).strip())
