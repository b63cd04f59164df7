"""JSON interchange format for models, policies and decoders.

Probabilities travel as "p/q" strings so nothing is rounded on the way.
"""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from .model import FmPomdp, Policy, frac

FORMAT_VERSION = 1


def fstr(p: Fraction) -> str:
    p = Fraction(p)
    return f"{p.numerator}/{p.denominator}"


def fdec(p: Fraction, digits: int = 6) -> str:
    return format(float(p), f".{digits}g")


def _row(r):
    return [fstr(p) for p in r]


def model_to_dict(model: FmPomdp) -> dict:
    d = {
        "format": FORMAT_VERSION,
        "name": model.name,
        "states": model.n_states,
        "actions": model.n_actions,
        "exo_states": model.n_exo,
        "obs_symbols": model.n_obs,
        "transitions": [[e if isinstance(e, int) else list(e) for e in row] for row in model.transitions],
        "exo": [_row(r) for r in model.exo],
        "emission": [[_row(r) for r in rows] for rows in model.emission],
        "mu_s": _row(model.mu_s),
        "mu_xi": _row(model.mu_xi),
        "flags": {"block": model.block},
        "m": model.m,
        "n": model.n,
        "H": model.horizon,
    }
    if model.state_labels:
        d["state_labels"] = list(model.state_labels)
    if model.action_labels:
        d["action_labels"] = list(model.action_labels)
    if model.mu_joint is not None:
        d["mu_joint"] = [_row(r) for r in model.mu_joint]
    return d


def model_from_dict(d: dict) -> FmPomdp:
    if d.get("format", FORMAT_VERSION) != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {d.get('format')}")
    return FmPomdp(
        transitions=d["transitions"],
        exo=[[frac(p) for p in r] for r in d["exo"]],
        emission=[[[frac(p) for p in r] for r in rows] for rows in d["emission"]],
        mu_s=[frac(p) for p in d["mu_s"]],
        mu_xi=[frac(p) for p in d["mu_xi"]],
        m=int(d.get("m", 0)),
        n=int(d.get("n", 0)),
        horizon=int(d.get("H", 1)),
        block=bool(d.get("flags", {}).get("block", False)),
        name=d.get("name", "model"),
        state_labels=d.get("state_labels"),
        action_labels=d.get("action_labels"),
        mu_joint=None if "mu_joint" not in d else [[frac(p) for p in r] for r in d["mu_joint"]],
    )


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def model_hash(model: FmPomdp) -> str:
    return hashlib.sha256(canonical_json(model_to_dict(model)).encode()).hexdigest()


def save_model(model: FmPomdp, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path) -> FmPomdp:
    return model_from_dict(json.loads(Path(path).read_text()))


def policy_to_dict(policy: Policy) -> dict:
    d = {"rows": [_row(r) for r in policy.rows]}
    if policy.exo_rows is not None:
        d["exo_rows"] = [[_row(r) for r in rows] for rows in policy.exo_rows]
    return d


def policy_from_dict(d: dict) -> Policy:
    if "exo_rows" in d:
        return Policy(d["rows"], d["exo_rows"])
    return Policy(d["rows"])


def decoder_to_dict(decoder) -> dict:
    return {
        "direction": decoder.direction,
        "span": decoder.span,
        "with_actions": decoder.with_actions,
        "entries": [{"payload": _jsonable_payload(w), "state": s} for w, s in sorted(decoder.table.items())],
    }


def _jsonable_payload(payload):
    return [list(e) if isinstance(e, tuple) else e for e in payload]
