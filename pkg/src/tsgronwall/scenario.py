"""Scenario files: one JSON document per run.

See ``docs/scenario.md`` for the schema. Every key is checked against the
mode's key set, so a typo fails loudly instead of being ignored.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .bounds import THEOREMS, KernelMap, ProblemInstance
from .dynamics import IvpSpec
from .errors import GronwallError, UsageError
from .timescale import TimeScale, build_timescale

VERSION = 1
MODES = ("bound", "verify", "solve", "sweep", "converge")

_INSTANCE_KEYS = {"scale", "theorem", "a", "f", "Phi", "W", "k", "h", "b", "g", "x0", "delta0"}
_COMMON = {"version", "mode", "description", "output", "seed"}
MODE_KEYS = {
    "bound": _COMMON | _INSTANCE_KEYS,
    "verify": _COMMON | _INSTANCE_KEYS,
    "solve": _COMMON | {"scale", "F", "K", "u_a", "h", "Phi", "x0"},
    "sweep": _COMMON | {"count", "theorems", "scales"},
    "converge": _COMMON | _INSTANCE_KEYS | {"factors", "quantity"},
}
ALL_KEYS = set().union(*MODE_KEYS.values())


class ScenarioError(UsageError):
    tag = "scenario"


class UnknownKey(ScenarioError):
    tag = "unknown-key"


class MissingKey(ScenarioError):
    tag = "missing-key"


@dataclass
class Scenario:
    data: dict
    mode: str
    path: Optional[Path] = None
    text: str = ""
    _lines: dict = field(default_factory=dict, repr=False)

    def line_of(self, key: str) -> Optional[int]:
        """1-based line of the first occurrence of ``"key":`` in the file."""
        if key not in self._lines:
            m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
            self._lines[key] = None if m is None else self.text.count("\n", 0, m.start()) + 1
        return self._lines[key]

    def where(self, key: Optional[str] = None) -> str:
        name = str(self.path) if self.path else "<scenario>"
        line = self.line_of(key) if key else None
        loc = f"{name}:{line}" if line else name
        return f"{loc} (key {key!r})" if key else loc

    def get(self, key, default=None):
        return self.data.get(key, default)

    def require(self, *keys):
        for key in keys:
            if key not in self.data:
                raise MissingKey(f"mode {self.mode!r} needs key {key!r}")

    # -- builders; errors are annotated with the key that caused them --------------

    def _keyed(self, key, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except GronwallError as exc:
            exc.key = getattr(exc, "key", None) or key or _key_in_message(str(exc), self.data)
            raise

    def scale(self) -> TimeScale:
        self.require("scale")
        return self._keyed("scale", build_timescale, self.data["scale"])

    def instance(self, scale: Optional[TimeScale] = None) -> ProblemInstance:
        self.require("theorem", "a", "f", "Phi", "W")
        ts = scale if scale is not None else self.scale()
        d = self.data
        theorem = str(d["theorem"]).upper()
        if theorem not in THEOREMS:
            raise ScenarioError(f"theorem must be one of {', '.join(THEOREMS)}, got {d['theorem']!r}")
        kernel = None
        if "k" in d:
            kernel = self._keyed("k", KernelMap.from_expr, ts, _expr_text(d["k"]))
        parts = {}
        for key in ("a", "f", "h", "b"):
            if key in d:
                parts[key] = self._keyed(key, _grid, d[key], ts, key)
        for key in ("Phi", "W", "g"):
            if key in d:
                parts[key] = self._keyed(key, _map, d[key], key)
        return self._keyed(None, ProblemInstance, ts, theorem, parts["a"], parts["f"], parts["Phi"],
                           parts["W"], kernel=kernel, h=parts.get("h"), b=parts.get("b"),
                           g=parts.get("g"), x0=float(d.get("x0", 1.0)),
                           delta0=float(d.get("delta0", 1.0)))

    def ivp(self) -> IvpSpec:
        self.require("F", "K", "u_a", "h", "Phi")
        ts = self.scale()
        d = self.data
        from .expr import parse
        F = self._keyed("F", parse, _expr_text(d["F"]), ("t", "u", "v"))
        K = self._keyed("K", parse, _expr_text(d["K"]), ("t", "u"))
        h = self._keyed("h", _grid, d["h"], ts, "h")
        Phi = self._keyed("Phi", _map, d["Phi"], "Phi")
        return self._keyed(None, IvpSpec, ts, F, K, float(d["u_a"]), h, Phi)


def _key_in_message(msg: str, data: dict) -> Optional[str]:
    """Best guess at the key a validation message is about ("f(t) must ...", "Phi='x*x' ...")."""
    m = re.match(r"\s*([A-Za-z_]\w*)\s*(?:\(t\)|=|\b)", msg)
    if m and m.group(1) in data:
        return m.group(1)
    return None


def _expr_text(v) -> str:
    return repr(float(v)) if isinstance(v, (int, float)) and not isinstance(v, bool) else str(v)


def _grid(v, scale, name):
    from .bounds import _as_grid
    if isinstance(v, bool):
        raise ScenarioError(f"{name} must be a number, list or expression")
    return _as_grid(v, scale, name)


def _map(v, name):
    from .expr import ScalarMap
    return ScalarMap(_expr_text(v), name)


def loads(text: str, path: Optional[Path] = None, mode: Optional[str] = None) -> Scenario:
    name = str(path) if path else "<scenario>"
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        err = ScenarioError(f"invalid JSON: {exc.msg} at {name}:{exc.lineno}:{exc.colno}")
        err.tag = "json"
        raise err from None
    if not isinstance(data, dict):
        raise ScenarioError("a scenario must be a JSON object")
    sc = Scenario(data, mode or "", path, text)
    if "version" not in data:
        raise MissingKey("the 'version' key is mandatory")
    if data["version"] != VERSION:
        err = ScenarioError(f"unsupported version {data['version']!r}; expected {VERSION}")
        err.key = "version"
        raise err
    file_mode = data.get("mode")
    if file_mode is not None and file_mode not in MODES:
        err = ScenarioError(f"mode must be one of {', '.join(MODES)}, got {file_mode!r}")
        err.key = "mode"
        raise err
    if mode and file_mode and file_mode != mode:
        err = ScenarioError(f"scenario is for mode {file_mode!r}, not {mode!r}")
        err.key = "mode"
        raise err
    sc.mode = mode or file_mode
    if not sc.mode:
        raise MissingKey("no mode given")
    for key in data:
        if key not in ALL_KEYS:
            err = UnknownKey(f"unknown key {key!r}")
            err.key = key
            raise err
        if key not in MODE_KEYS[sc.mode]:
            err = UnknownKey(f"key {key!r} is not used by mode {sc.mode!r}")
            err.key = key
            raise err
    return sc


def load(path, mode: Optional[str] = None) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        err = UsageError(f"file not found: {path}")
        err.tag = "file-not-found"
        raise err from None
    except OSError as exc:
        err = UsageError(f"cannot read {path}: {exc.strerror}")
        err.tag = "io"
        raise err from None
    return loads(text, path, mode)


def dump_template(mode: str) -> dict[str, Any]:
    """A minimal valid document for ``mode``; handy as a starting point."""
    base = {"version": VERSION, "mode": mode}
    if mode in ("bound", "verify", "converge"):
        base.update(scale={"kind": "integer", "a": 0, "b": 5}, theorem="THM1", a="1", f="1",
                    Phi="x", W="x", k="1")
    if mode == "converge":
        base.update(scale={"kind": "uniform", "a": 0, "b": 1, "n": 10}, factors=[1, 10, 100],
                    quantity="bound")
    if mode == "solve":
        base.update(scale={"kind": "integer", "a": 0, "b": 5}, F="(u+v)/2", K="u", u_a=1,
                    h=1, Phi="x")
    if mode == "sweep":
        base.update(seed=0, count=10, theorems=list(THEOREMS))
    return base
