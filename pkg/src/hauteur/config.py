"""Job configuration: JSON ingestion and validation for the CLI.

A config carries a curve over Q(t), a section (either a full (x, y) pair of
rational functions satisfying the Weierstrass relation identically, or a
constant x-coordinate, which suffices for every x-level computation here),
plus optional per-command blocks.  Everything is deterministic; configs
contain no seeds.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .kernel import RatFunc
from .parsing import parse_ratfunc
from .weierstrass import WeierstrassCurve, curve_from_spec


@dataclass(frozen=True)
class JobConfig:
    curve: WeierstrassCurve
    x_P: RatFunc
    y_P: RatFunc | None
    constant_x: bool
    var: str
    options: dict = field(default_factory=dict)
    digest: str = ""
    name: str = ""

    def option(self, *keys, default=None):
        cur = self.options
        for k in keys:
            if not isinstance(cur, dict) or k not in cur:
                return default
            cur = cur[k]
        return cur


def _check_on_curve(curve, x, y):
    """The Weierstrass relation as an identity in Q(t)."""
    a1, a2, a3, a4, a6 = curve.coefficients
    lhs = y * y + a1 * x * y + a3 * y
    rhs = x * x * x + a2 * x * x + a4 * x + a6
    return (lhs - rhs).is_zero


def load_config(path):
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}", code="config-missing")
    raw = p.read_bytes()
    return parse_config_bytes(raw, name=p.name)


def parse_config_bytes(raw, name=""):
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed JSON: {exc}", code="config-json") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object", code="config-json")
    if "curve" not in data or not isinstance(data["curve"], dict):
        raise ConfigError("config needs a 'curve' object", code="config-json")
    if "section" not in data or not isinstance(data["section"], dict):
        raise ConfigError("config needs a 'section' object", code="config-json")
    var = data["curve"].get("var", "t")
    try:
        curve = curve_from_spec(data["curve"])
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid curve: {exc}", code="config-singular") from exc

    sec = data["section"]
    if "x" not in sec:
        raise ConfigError("section needs an 'x' entry", code="config-json")
    x = parse_ratfunc(str(sec["x"]), var)
    y_raw = sec.get("y")
    if y_raw is None:
        if not x.is_constant:
            raise ConfigError(
                "a section without y must have constant x (torsion order is "
                "y-independent only fiberwise)",
                code="config-offcurve",
            )
        y = None
        constant_x = True
    else:
        y = parse_ratfunc(str(y_raw), var)
        if not _check_on_curve(curve, x, y):
            raise ConfigError(
                "section (x, y) does not satisfy the Weierstrass relation",
                code="config-offcurve",
            )
        constant_x = False

    options = {k: v for k, v in data.items() if k not in ("curve", "section")}
    digest = hashlib.sha256(raw).hexdigest()
    return JobConfig(curve=curve, x_P=x, y_P=y, constant_x=constant_x,
                     var=var, options=options, digest=digest, name=name)


def parse_rational(text):
    """A Fraction from 'p/q' or integer/decimal text."""
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}", code="config-json") from exc
