"""Trajectory enumeration and sampling, augmented observations and windows."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .errors import BudgetExceeded, OutOfRange
from .model import BLANK, NONE, FmPomdp, Policy, default_budget, latent_marginal


@dataclass(frozen=True)
class Trajectory:
    """Steps start..end of one run. actions[i] is the action taken at time start+i."""

    start: int
    states: tuple
    exo: tuple
    obs: tuple
    actions: tuple
    prev_action: int = NONE
    weight: Fraction = Fraction(1)
    horizon: int | None = None

    @property
    def end(self) -> int:
        return self.start + len(self.states) - 1

    def state(self, t: int) -> int:
        return self.states[t - self.start]

    def action(self, t: int) -> int:
        """a_t, with a_{start-1} available as prev_action."""
        if t == self.start - 1:
            return self.prev_action
        return self.actions[t - self.start]

    def aug(self, t: int) -> tuple:
        """Augmented observation (o_t, a_{t-1})."""
        return (self.obs[t - self.start], self.action(t - 1))


def _max_branching(model: FmPomdp, policy: Policy) -> tuple[int, int]:
    emis = max(len(model.emission_support(s, x)) for s in range(model.n_states) for x in range(model.n_exo))
    step = max(len(policy.support(s, x)) * len(model.exo_support(x))
               for s in range(model.n_states) for x in range(model.n_exo))
    return emis, step


def estimate_paths(model: FmPomdp, policy: Policy, n_roots: int, length: int) -> int:
    emis, step = _max_branching(model, policy)
    return n_roots * emis ** length * step ** max(length - 1, 0)


class _Tails:
    """Memoized suffixes (states, exo, obs, actions, weight) from a latent pair."""

    def __init__(self, model: FmPomdp, policy: Policy):
        self.model, self.policy = model, policy
        self.cache: dict = {}

    def get(self, s: int, xi: int, length: int) -> list:
        key = (s, xi, length)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        model = self.model
        out = []
        for o, qo in model.emission_support(s, xi):
            if length == 1:
                out.append(((s,), (xi,), (o,), (), qo))
                continue
            for a, pa in self.policy.support(s, xi):
                s2 = model.step(s, a)
                for x2, px in model.exo_support(xi):
                    w0 = qo * pa * px
                    for st, ex, ob, ac, w in self.get(s2, x2, length - 1):
                        out.append(((s,) + st, (xi,) + ex, (o,) + ob, (a,) + ac, w0 * w))
        self.cache[key] = out
        return out


def enumerate_segments(model: FmPomdp, policy: Policy, start: int, length: int,
                       budget: int | None = None, tails: _Tails | None = None) -> list[Trajectory]:
    """Every positive-weight path over times start..start+length-1.

    The path starts from the exact time-`start` law of (s, xi, a_prev), so the
    weights are joint probabilities and sum to 1.
    """
    if length < 1 or start < 1 or start + length - 1 > model.horizon:
        raise OutOfRange(f"segment {start}..{start + length - 1} outside 1..{model.horizon}")
    budget = default_budget() if budget is None else budget
    roots = latent_marginal(model, policy, start)
    est = estimate_paths(model, policy, len(roots), length)
    if est > budget:
        raise BudgetExceeded(est, budget)
    tails = tails or _Tails(model, policy)
    out = []
    for (s, xi, prev), p in roots.items():
        for st, ex, ob, ac, w in tails.get(s, xi, length):
            out.append(Trajectory(start, st, ex, ob, ac, prev, p * w, model.horizon))
    return out


def enumerate_trajectories(model: FmPomdp, policy: Policy, length: int, budget: int | None = None) -> list[Trajectory]:
    return enumerate_segments(model, policy, 1, length, budget)


def _draw(rng: random.Random, items):
    """Exact draw from [(value, Fraction)] using one integer sample."""
    den = lcm(*(p.denominator for _, p in items))
    r = rng.randrange(den)
    acc = 0
    for v, p in items:
        acc += p.numerator * (den // p.denominator)
        if r < acc:
            return v
    raise ValueError("distribution does not sum to 1")


def simulate(model: FmPomdp, policy: Policy, length: int, seed: int) -> Trajectory:
    """Sample one trajectory of `length` steps from t = 1; bit-reproducible per seed.

    `length` may exceed the model horizon here (useful for long frequency checks).
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    rng = random.Random(seed)
    init = [((s, x), model.init_prob(s, x)) for s in range(model.n_states)
            for x in range(model.n_exo) if model.init_prob(s, x)]
    s, xi = _draw(rng, init)
    states, exo, obs, actions = [], [], [], []
    for i in range(length):
        states.append(s)
        exo.append(xi)
        obs.append(_draw(rng, model.emission_support(s, xi)))
        if i == length - 1:
            break
        a = _draw(rng, policy.support(s, xi))
        actions.append(a)
        s = model.step(s, a)
        xi = _draw(rng, model.exo_support(xi))
    return Trajectory(1, tuple(states), tuple(exo), tuple(obs), tuple(actions), NONE, Fraction(1),
                      max(model.horizon, length))


@dataclass(frozen=True)
class Window:
    kind: str  # "past" | "future"
    anchor: int
    span: int
    lo: int
    hi: int
    payload: tuple


def window_payload(traj: Trajectory, lo: int, hi: int, with_actions: bool) -> tuple:
    if lo < traj.start or hi > traj.end:
        raise OutOfRange(f"indices {lo}..{hi} not covered by trajectory {traj.start}..{traj.end}")
    if with_actions:
        return tuple(traj.aug(t) for t in range(lo, hi + 1))
    return traj.obs[lo - traj.start: hi - traj.start + 1]


def past_window(traj: Trajectory, h: int, m: int, with_actions: bool = True) -> Window:
    """Covers max(1, h-m)..h."""
    lo = max(1, h - m)
    return Window("past", h, m, lo, h, window_payload(traj, lo, h, with_actions))


def future_window(traj: Trajectory, h: int, n: int, with_actions: bool = True) -> Window:
    """Covers h..min(h+n, H); H is the model horizon carried by the trajectory."""
    H = traj.horizon if traj.horizon is not None else traj.end
    hi = min(h + n, H)
    return Window("future", h, n, h, hi, window_payload(traj, h, hi, with_actions))


def strip_actions(payload: tuple) -> tuple:
    return tuple(e[0] for e in payload)


def dump_trajectory(traj: Trajectory, model_hash: str, seed) -> str:
    """Tab-separated `t s xi o a`, one step per line; a is '-' where absent."""
    lines = [f"# model={model_hash} seed={seed}", "t\ts\txi\to\ta"]
    for t in range(traj.start, traj.end + 1):
        a = traj.action(t) if t < traj.end else "-"
        i = t - traj.start
        lines.append(f"{t}\t{traj.states[i]}\t{traj.exo[i]}\t{traj.obs[i]}\t{a}")
    return "\n".join(lines) + "\n"


def parse_trajectory_dump(text: str) -> tuple[dict, list]:
    lines = text.splitlines()
    header = dict(kv.split("=", 1) for kv in lines[0].lstrip("# ").split())
    rows = []
    for line in lines[2:]:
        t, s, xi, o, a = line.split("\t")
        rows.append((int(t), int(s), int(xi), int(o), None if a == "-" else int(a)))
    return header, rows


__all__ = [
    "BLANK", "NONE", "Trajectory", "Window", "enumerate_segments", "enumerate_trajectories", "simulate",
    "past_window", "future_window", "strip_actions", "dump_trajectory", "parse_trajectory_dump",
    "estimate_paths",
]
