"""Past/future decodability checks and the tabular decoders they induce."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotDecodable
from .model import FmPomdp, Policy
from .trajectories import _Tails, enumerate_segments, future_window, past_window

PAST, FUTURE = "past", "future"


@dataclass(frozen=True)
class Verdict:
    holds: bool
    direction: str
    span: int
    with_actions: bool
    anchors: tuple
    witness: tuple | None = None  # (payload, s1, s2)
    conflicts: tuple = field(default=(), repr=False)  # (payload, states) for every ambiguous payload
    n_windows: int = 0


@dataclass(frozen=True)
class Decoder:
    direction: str
    span: int
    with_actions: bool
    table: dict = field(repr=False)

    def __call__(self, payload):
        return self.table[payload]


def default_anchors(model: FmPomdp, direction: str, span: int) -> tuple:
    """Anchors whose windows are full length.

    Past windows before m+1 are clamped and carry less history; future anchors
    start at 2 because the first element at t = 1 has no previous action.
    """
    H = model.horizon
    if direction == PAST:
        return tuple(range(min(span + 1, H), H + 1))
    return tuple(range(2, H - span + 1))


def _window_bounds(model, direction, h, span):
    if direction == PAST:
        return max(1, h - span), h
    return h, min(h + span, model.horizon)


def reachable_windows(model: FmPomdp, policy: Policy, direction: str, span: int,
                      with_actions: bool = True, anchors=None, budget=None) -> dict:
    """payload -> set of agent states it was anchored at, over the given anchors."""
    anchors = default_anchors(model, direction, span) if anchors is None else tuple(anchors)
    make = past_window if direction == PAST else future_window
    tails = _Tails(model, policy)
    seen: dict = {}
    for h in anchors:
        lo, hi = _window_bounds(model, direction, h, span)
        for tr in enumerate_segments(model, policy, lo, hi - lo + 1, budget, tails):
            w = make(tr, h, span, with_actions).payload
            seen.setdefault(w, set()).add(tr.state(h))
    return seen


def _check(model, policy, direction, span, with_actions, anchors, budget) -> Verdict:
    anchors = default_anchors(model, direction, span) if anchors is None else tuple(anchors)
    seen = reachable_windows(model, policy, direction, span, with_actions, anchors, budget)
    conflicts = tuple((w, tuple(sorted(ss))) for w, ss in sorted(seen.items()) if len(ss) > 1)
    witness = None
    if conflicts:
        w, ss = conflicts[0]
        witness = (w, ss[0], ss[1])
    return Verdict(not conflicts, direction, span, with_actions, anchors, witness, conflicts, len(seen))


def check_past_decodability(model: FmPomdp, policy: Policy, m: int | None = None, with_actions: bool = True,
                            anchors=None, budget=None) -> Verdict:
    return _check(model, policy, PAST, model.m if m is None else m, with_actions, anchors, budget)


def check_future_decodability(model: FmPomdp, policy: Policy, n: int | None = None, with_actions: bool = True,
                              anchors=None, budget=None) -> Verdict:
    return _check(model, policy, FUTURE, model.n if n is None else n, with_actions, anchors, budget)


def derive_decoder(model: FmPomdp, policy: Policy, span: int, direction: str, with_actions: bool = True,
                   anchors=None, budget=None) -> Decoder:
    seen = reachable_windows(model, policy, direction, span, with_actions, anchors, budget)
    if any(len(ss) > 1 for ss in seen.values()):
        raise NotDecodable(_check(model, policy, direction, span, with_actions, anchors, budget))
    return Decoder(direction, span, with_actions, {w: next(iter(ss)) for w, ss in sorted(seen.items())})
