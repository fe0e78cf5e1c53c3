"""JSON model specifications.

Three model types are understood::

    {"type": "pattern", "n": 100, "patterns": [[1, 2, 3], [3, 2, 1]]}
    {"type": "independent", "components": [<pmf>, ...]}
    {"type": "local", "n": 5, "components": [<pmf or name>, ...],
     "neighborhoods": [[1, 2], ...], "statistic": {"kind": "window_product"},
     "M": "1", "pmfs": {"name": <pmf>}}

A pmf is ``{"k": 1, "atoms": [{"x": ["1"], "p": "1/2"}, ...]}``. Unknown keys
are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .couplings import IndependentModel, LocalDependenceModel
from .errors import InvalidPmf, ModelSpecError
from .harness import Model
from .model import Pmf
from .patterns import PatternModel

_KEYS = {
    "pattern": ({"type", "n", "patterns"}, {"coupling"}),
    "independent": ({"type", "components"}, {"pmfs"}),
    "local": ({"type", "n", "components", "neighborhoods", "statistic", "M"}, {"pmfs", "cap"}),
}


def _check_keys(obj: dict, kind: str) -> None:
    required, optional = _KEYS[kind]
    missing = required - set(obj)
    unknown = set(obj) - required - optional
    if missing:
        raise ModelSpecError(f"{kind} model is missing keys {sorted(missing)}")
    if unknown:
        raise ModelSpecError(f"{kind} model has unknown keys {sorted(unknown)}")


def _components(obj: dict) -> tuple[Pmf, ...]:
    named = {name: Pmf.from_json(p) for name, p in obj.get("pmfs", {}).items()}
    comps = obj["components"]
    if not isinstance(comps, list):
        raise ModelSpecError("components must be a list")
    out = []
    for c in comps:
        if isinstance(c, str):
            if c not in named:
                raise ModelSpecError(f"unknown pmf reference {c!r}")
            out.append(named[c])
        else:
            out.append(Pmf.from_json(c))
    return tuple(out)


def model_from_json(obj: Any) -> Model:
    if not isinstance(obj, dict) or obj.get("type") not in _KEYS:
        raise ModelSpecError('model spec must be an object with "type" in pattern|independent|local')
    kind = obj["type"]
    _check_keys(obj, kind)
    try:
        if kind == "pattern":
            return PatternModel(
                int(obj["n"]),
                tuple(tuple(p) for p in obj["patterns"]),
                obj.get("coupling", "standard"),
            )
        if kind == "independent":
            return IndependentModel(_components(obj))
        comps = _components(obj)
        if len(comps) != obj["n"]:
            raise ModelSpecError(f"n={obj['n']} but {len(comps)} components given")
        stat = obj["statistic"]
        if not isinstance(stat, dict) or set(stat) - {"kind", "tables"}:
            raise ModelSpecError("statistic must be {kind, [tables]}")
        tables = ()
        if stat.get("kind") == "table":
            tables = tuple(
                tuple((tuple(e["c"]), e["w"]) for e in t) for t in stat.get("tables", [])
            )
        extra = {"cap": int(obj["cap"])} if "cap" in obj else {}
        return LocalDependenceModel(
            comps,
            tuple(tuple(h) for h in obj["neighborhoods"]),
            stat.get("kind"),
            obj["M"],
            tables,
            **extra,
        )
    except (InvalidPmf, ModelSpecError):
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ModelSpecError(f"invalid {kind} model: {exc}") from exc


def load_model(path: str | Path) -> Model:
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ModelSpecError(f"model file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ModelSpecError(f"model file {path} is not valid JSON: {exc}") from None
    return model_from_json(obj)
