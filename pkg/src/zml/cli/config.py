"""Experiment configuration files.

Plain ``key = value`` lines grouped under ``[section]`` headers, ``#``
comments, UTF-8.  Every key is declared in :data:`SCHEMA`; anything else is
rejected with the offending line number.

Keys
----
[grid]      dim (1), L, N
[pde]       q (number, ``p/q`` fraction or ``critical``), a (comma list),
            flux (odd | power)
[data]      kind (fractional_bump | self_similar | dipole | miyakawa |
            burgers_bump | random_compact), beta, amplitude, width, mass,
            compact, separation, s, radius, bumps,
            perturb_kind (none | dipole | scale), perturb_eps
[run]       T, dt, t0, scheme (IFRK4 | ETDRK2), pad_factor, samples,
            blowup_threshold, waive_window, picard_k_max, picard_sigma_nodes,
            picard_epsilon, picard_balanced (true: require q = q*)
[analysis]  p_list, fit_keys, fit_lo, fit_hi, oracle_nodes, oracle_tol
[sweep]     q_values, beta_values
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, Tuple

from ..errors import MissingRequired, ParseError, UnknownKey

__all__ = ["ExperimentConfig", "parse_config", "parse_text", "dump_config", "SCHEMA"]


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _num(s: str) -> float:
    s = s.strip()
    if "/" in s:
        return float(Fraction(s))
    return float(s)


def _numlist(s: str) -> Tuple[float, ...]:
    s = s.strip()
    return tuple(_num(v) for v in s.split(",")) if s else ()


def _strlist(s: str) -> Tuple[str, ...]:
    return tuple(v.strip() for v in s.split(",") if v.strip())


def _choice(*opts) -> Callable[[str], str]:
    def conv(s: str) -> str:
        v = s.strip()
        if v not in opts:
            raise ValueError(f"{v!r} not in {opts}")
        return v

    return conv


def _q(s: str):
    v = s.strip()
    return "critical" if v == "critical" else _num(v)


REQUIRED = object()

# section -> key -> (converter, default)
SCHEMA: Dict[str, Dict[str, Tuple[Callable[[str], Any], Any]]] = {
    "grid": {"dim": (int, 1), "L": (_num, REQUIRED), "N": (int, REQUIRED)},
    "pde": {
        "q": (_q, REQUIRED),
        "a": (_numlist, None),
        "flux": (_choice("odd", "power"), "odd"),
    },
    "data": {
        "kind": (
            _choice("fractional_bump", "self_similar", "dipole", "miyakawa", "burgers_bump", "random_compact"),
            REQUIRED,
        ),
        "beta": (_num, REQUIRED),
        "amplitude": (_num, 1.0),
        "width": (_num, 1.4142135623730951),
        "mass": (_num, 1.0),
        "compact": (_bool, False),
        "separation": (_num, None),
        "s": (_num, 1.0),
        "radius": (_num, 6.0),
        "bumps": (int, 4),
        "perturb_kind": (_choice("none", "dipole", "scale"), "none"),
        "perturb_eps": (_num, 0.0),
    },
    "run": {
        "T": (_num, REQUIRED),
        "dt": (_num, REQUIRED),
        "t0": (_num, 0.0),
        "scheme": (_choice("IFRK4", "ETDRK2"), "IFRK4"),
        "pad_factor": (int, 2),
        "samples": (int, 48),
        "blowup_threshold": (_num, None),
        "waive_window": (_bool, False),
        "picard_k_max": (int, 12),
        "picard_sigma_nodes": (int, 64),
        "picard_epsilon": (_num, None),
        "picard_balanced": (_bool, True),
    },
    "analysis": {
        "p_list": (_numlist, ()),
        "fit_keys": (_strlist, ("l1", "lq", "linf")),
        "fit_lo": (_num, None),
        "fit_hi": (_num, None),
        "oracle_nodes": (int, 4096),
        "oracle_tol": (_num, 1e-5),
    },
    "sweep": {"q_values": (_numlist, ()), "beta_values": (_numlist, ())},
}

_SECTION = re.compile(r"^\[([A-Za-z_]+)\]$")
_PAIR = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


@dataclass
class ExperimentConfig:
    """Typed view of a configuration file (section -> key -> value)."""

    values: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    source: str = "<string>"

    def __getitem__(self, section: str) -> Dict[str, Any]:
        return self.values[section]

    @property
    def q(self) -> float:
        q = self["pde"]["q"]
        if q == "critical":
            return 1.0 + 1.0 / (self["grid"]["dim"] + self["data"]["beta"])
        return q

    @property
    def a(self) -> Tuple[float, ...]:
        a = self["pde"]["a"]
        return tuple(a) if a else (1.0,) * self["grid"]["dim"]

    def replace(self, section: str, **kw) -> "ExperimentConfig":
        vals = {s: dict(d) for s, d in self.values.items()}
        vals[section].update(kw)
        return ExperimentConfig(vals, self.source)


def _format(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    return str(v)


def parse_text(text: str, source: str = "<string>") -> ExperimentConfig:
    seen: Dict[str, Dict[str, Any]] = {s: {} for s in SCHEMA}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            if section not in SCHEMA:
                raise UnknownKey(f"unknown section [{section}]", lineno)
            continue
        m = _PAIR.match(line)
        if not m:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if section is None:
            raise ParseError("key outside of any section", lineno)
        key, value = m.group(1), m.group(2).strip()
        if key not in SCHEMA[section]:
            raise UnknownKey(f"unknown key {key!r} in [{section}]", lineno)
        if key in seen[section]:
            raise ParseError(f"duplicate key {key!r} in [{section}]", lineno)
        conv = SCHEMA[section][key][0]
        try:
            seen[section][key] = conv(value) if value != "" else None
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad value for {section}.{key}: {exc}", lineno) from None
    values = {}
    for sec, keys in SCHEMA.items():
        values[sec] = {}
        for key, (_, default) in keys.items():
            if key in seen[sec] and seen[sec][key] is not None:
                values[sec][key] = seen[sec][key]
            elif default is REQUIRED:
                raise MissingRequired(f"missing required key {sec}.{key}")
            else:
                values[sec][key] = default
    cfg = ExperimentConfig(values, source)
    if cfg["grid"]["dim"] not in (1, 2):
        raise ParseError("grid.dim must be 1 or 2")
    if len(cfg.a) != cfg["grid"]["dim"]:
        raise ParseError("pde.a must have dim components")
    return cfg


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_text(path.read_text(encoding="utf-8"), str(path))


def dump_config(cfg: ExperimentConfig) -> str:
    """Normalized text form: every section and key in schema order."""
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for key in keys:
            lines.append(f"{key} = {_format(cfg[sec][key])}".rstrip())
        lines.append("")
    return "\n".join(lines)
