"""Line-oriented run configuration.

::

    # comment
    [rates]
    alpha = 1.0
    r_a = 0.5

Sections and keys are fixed by :data:`SCHEMA`; anything else is rejected.
Numbers are plain base-10 decimals with an optional exponent, lists are
comma-separated.  :meth:`RunConfig.to_text` emits a canonical form that
parses back to an equal configuration.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

from .errors import ValidationError

_FLOAT_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_INT_RE = re.compile(r"[+-]?\d+")

FLOAT, INT, STR, FLOATS, INTS, BOOL = "float", "int", "str", "floats", "ints", "bool"

SCHEMA: Dict[str, Dict[str, str]] = {
    "rates": {k: FLOAT for k in ("alpha", "beta", "a_bar", "b_bar", "r_a", "r_b", "eta")},
    "initial": {
        "kind": STR, "amplitude": FLOAT, "exponent": FLOAT, "center": FLOAT, "width": FLOAT,
        "cutoff": FLOAT, "upper": FLOAT, "u_in": FLOAT, "table": STR,
    },
    "bd": {
        "eps": FLOAT, "i_max": INT, "x_max": FLOAT, "t_end": FLOAT, "rtol": FLOAT, "atol": FLOAT,
        "dt_init": FLOAT, "dt_min": FLOAT, "dt_max": FLOAT, "samples": INT, "watch": INTS,
        "u_fixed": FLOAT, "snapshots": BOOL,
    },
    "ls": {"x_max": FLOAT, "cells": INT, "cfl": FLOAT, "t_end": FLOAT, "samples": INT, "dt_cap": FLOAT},
    "sweep": {
        "eps_list": FLOATS, "t_samples": FLOATS, "ls_cells": INT, "workers": INT, "n_test": INT,
        "window_start": FLOAT, "window_end": FLOAT, "skip_fraction": FLOAT, "z_grid": FLOATS,
        "i_max_factor": FLOAT, "delta": FLOAT, "n_dense": INT,
    },
    "output": {"dir": STR},
}

DEFAULTS: Dict[str, Dict[str, object]] = {
    "initial": {"kind": "zero", "amplitude": 1.0, "exponent": 0.5, "center": 1.0, "width": 0.3,
                "cutoff": 6.0, "upper": 1.0},
    "bd": {"x_max": 4.0, "t_end": 1.0, "rtol": 1e-8, "atol": 1e-12, "dt_init": 1e-4, "dt_min": 1e-12,
           "samples": 11, "watch": [2, 3], "snapshots": False},
    "ls": {"x_max": 4.0, "cells": 400, "cfl": 0.9, "t_end": 1.0, "samples": 11, "dt_cap": 1e-2},
    "sweep": {"t_samples": [0.0, 0.25, 0.5, 1.0], "workers": 1, "n_test": 16, "skip_fraction": 0.1,
              "z_grid": [0.05, 0.1, 0.2, 0.4], "i_max_factor": 2.0, "n_dense": 41},
    "output": {"dir": "out"},
}


def _parse_value(kind: str, text: str, where: str):
    text = text.strip()
    if kind == STR:
        if not text or "\n" in text:
            raise ValidationError(f"{where}: empty string value")
        return text
    if kind == BOOL:
        low = text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValidationError(f"{where}: expected a boolean, got {text!r}")
    if kind in (FLOATS, INTS):
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        if not parts:
            raise ValidationError(f"{where}: empty list")
        return [_parse_value(FLOAT if kind == FLOATS else INT, p, where) for p in parts]
    if kind == INT:
        if not _INT_RE.fullmatch(text):
            raise ValidationError(f"{where}: expected an integer, got {text!r}")
        return int(text)
    if not _FLOAT_RE.fullmatch(text):
        raise ValidationError(f"{where}: expected a base-10 number, got {text!r}")
    return float(text)


def _format_value(kind: str, value) -> str:
    if kind == STR:
        return str(value)
    if kind == BOOL:
        return "true" if value else "false"
    if kind == FLOATS:
        return ", ".join(repr(float(v)) for v in value)
    if kind == INTS:
        return ", ".join(str(int(v)) for v in value)
    if kind == INT:
        return str(int(value))
    return repr(float(value))


@dataclass
class RunConfig:
    """Parsed configuration: ``values[section][key]`` holds explicitly set keys."""

    values: Dict[str, Dict[str, object]] = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "RunConfig":
        values: Dict[str, Dict[str, object]] = {}
        section = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            where = f"{source}:{lineno}"
            if line.startswith("["):
                if not line.endswith("]"):
                    raise ValidationError(f"{where}: malformed section header {line!r}")
                section = line[1:-1].strip()
                if section not in SCHEMA:
                    raise ValidationError(f"{where}: unknown section [{section}]")
                values.setdefault(section, {})
                continue
            if "=" not in line:
                raise ValidationError(f"{where}: expected 'key = value', got {line!r}")
            if section is None:
                raise ValidationError(f"{where}: key outside of any section")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in SCHEMA[section]:
                raise ValidationError(f"{where}: unknown key {section}.{key}")
            values[section][key] = _parse_value(SCHEMA[section][key], val, f"{where} {section}.{key}")
        return cls(values)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            return cls.parse(fh.read(), source=path)

    def set_override(self, assignment: str):
        """Apply ``section.key=value``."""
        if "=" not in assignment or "." not in assignment.split("=", 1)[0]:
            raise ValidationError(f"override {assignment!r} is not of the form section.key=value")
        lhs, val = assignment.split("=", 1)
        section, key = (s.strip() for s in lhs.split(".", 1))
        if section not in SCHEMA:
            raise ValidationError(f"unknown section [{section}] in override")
        if key not in SCHEMA[section]:
            raise ValidationError(f"unknown key {section}.{key} in override")
        self.values.setdefault(section, {})[key] = _parse_value(SCHEMA[section][key], val, f"--set {lhs}")

    def has(self, section: str, key: str) -> bool:
        return key in self.values.get(section, {})

    def get(self, section: str, key: str, default=None):
        if self.has(section, key):
            return self.values[section][key]
        if key in DEFAULTS.get(section, {}):
            return DEFAULTS[section][key]
        return default

    def require(self, section: str, key: str):
        if self.has(section, key):
            return self.values[section][key]
        if key in DEFAULTS.get(section, {}):
            return DEFAULTS[section][key]
        raise ValidationError(f"missing required key {section}.{key}")

    def require_section(self, section: str, keys: Iterable[str]):
        return {k: self.require(section, k) for k in keys}

    def resolved(self, sections: Optional[Iterable[str]] = None) -> "RunConfig":
        """Explicit values merged over the defaults."""
        out: Dict[str, Dict[str, object]] = {}
        for sec in sections or SCHEMA:
            merged = dict(DEFAULTS.get(sec, {}))
            merged.update(self.values.get(sec, {}))
            if merged:
                out[sec] = merged
        return RunConfig(out)

    def to_text(self) -> str:
        lines = []
        for sec in SCHEMA:
            if sec not in self.values:
                continue
            lines.append(f"[{sec}]")
            for key in SCHEMA[sec]:
                if key in self.values[sec]:
                    lines.append(f"{key} = {_format_value(SCHEMA[sec][key], self.values[sec][key])}")
            lines.append("")
        return "\n".join(lines)

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        strip = lambda v: {s: d for s, d in v.items() if d}
        return strip(self.values) == strip(other.values)
