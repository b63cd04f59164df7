"""Report serialization: exact fractions as "p/q" strings, deterministic JSON."""
from __future__ import annotations

import json
from enum import Enum
from fractions import Fraction

from .io import fdec, fstr

TOOL = "fmpomdp"
VERSION = "0.1.0"

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fmpomdp report",
    "type": "object",
    "required": ["tool", "version", "command", "config", "model", "results", "checks", "passed"],
    "properties": {
        "tool": {"const": TOOL},
        "version": {"type": "string"},
        "command": {"enum": ["validate", "diameter", "decodability", "identities", "decoupling",
                             "discover", "dump-ik", "simulate"]},
        "config": {"type": "object"},
        "model": {
            "type": "object",
            "required": ["name", "hash"],
            "properties": {"name": {"type": "string"}, "hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"}},
        },
        "results": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed"],
                "properties": {"name": {"type": "string"}, "passed": {"type": "boolean"}},
            },
        },
        "passed": {"type": "boolean"},
        "wall_time_s": {"type": "number"},
    },
    "additionalProperties": False,
}

ERROR_SCHEMA = {
    "type": "object",
    "required": ["error"],
    "properties": {
        "error": {
            "type": "object",
            "required": ["type", "message"],
            "properties": {"type": {"type": "string"}, "message": {"type": "string"}},
        }
    },
    "additionalProperties": False,
}


def to_jsonable(obj, decimal: bool = False):
    if isinstance(obj, Fraction):
        return fdec(obj) if decimal else fstr(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(to_jsonable(k, decimal)): to_jsonable(v, decimal) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(x, decimal) for x in items]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict(), decimal)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict, decimal: bool = False) -> str:
    return json.dumps(to_jsonable(report, decimal), indent=2, ensure_ascii=True) + "\n"


def error_object(kind: str, message: str) -> str:
    return json.dumps({"error": {"type": kind, "message": message}}, indent=2) + "\n"
