"""Finite-memory POMDP model: deterministic agent dynamics, an exogenous
Markov chain and an emission table, all with exact rational probabilities.
"""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import Unreachable

BLANK = -1  # observation symbol emitted when nothing is visible
NONE = -1  # previous-action slot at t = 1

BUDGET_ENV = "FMPOMDP_BUDGET"


def default_budget() -> int:
    return int(os.environ.get(BUDGET_ENV, 10**7))


def frac(x) -> Fraction:
    """Parse ints, Fractions and "p/q" strings. Floats are rejected."""
    if isinstance(x, float):
        raise TypeError("probabilities must be exact; got float %r" % x)
    return Fraction(x)


def _fracs(row) -> tuple:
    return tuple(frac(p) for p in row)


def _successors(entry):
    if isinstance(entry, (tuple, list)):
        return tuple(int(e) for e in entry)
    return int(entry)


@dataclass(frozen=True)
class FmPomdp:
    """A tabular FM-POMDP.

    transitions[s][a] is the successor agent state. emission[s][xi] is a dense
    row over the n_obs content symbols followed by one BLANK column.
    """

    transitions: tuple
    exo: tuple
    emission: tuple
    mu_s: tuple
    mu_xi: tuple
    m: int = 0
    n: int = 0
    horizon: int = 1
    block: bool = False
    name: str = "model"
    state_labels: tuple | None = None
    action_labels: tuple | None = None
    mu_joint: tuple | None = None  # only set for deliberately non-factored inits

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "transitions", tuple(tuple(_successors(e) for e in row) for row in self.transitions))
        set_(self, "exo", tuple(_fracs(r) for r in self.exo))
        set_(self, "emission", tuple(tuple(_fracs(r) for r in rows) for rows in self.emission))
        set_(self, "mu_s", _fracs(self.mu_s))
        set_(self, "mu_xi", _fracs(self.mu_xi))
        if self.mu_joint is not None:
            set_(self, "mu_joint", tuple(_fracs(r) for r in self.mu_joint))
        if self.state_labels is not None:
            set_(self, "state_labels", tuple(self.state_labels))
        if self.action_labels is not None:
            set_(self, "action_labels", tuple(self.action_labels))

        S, X = len(self.transitions), len(self.exo)
        if S == 0 or X == 0:
            raise ValueError("empty state alphabet")
        A = len(self.transitions[0])
        if A == 0 or any(len(r) != A for r in self.transitions):
            raise ValueError("transition table must be S x A with A >= 1")
        if any(len(r) != X for r in self.exo):
            raise ValueError("exo matrix must be square")
        if len(self.emission) != S or any(len(rows) != X for rows in self.emission):
            raise ValueError("emission must be indexed [s][xi]")
        widths = {len(r) for rows in self.emission for r in rows}
        if len(widths) != 1 or min(widths) < 1:
            raise ValueError("emission rows must share one width (content symbols + BLANK)")
        if len(self.mu_s) != S or len(self.mu_xi) != X:
            raise ValueError("initial distributions have the wrong length")
        if self.mu_joint is not None and (len(self.mu_joint) != S or any(len(r) != X for r in self.mu_joint)):
            raise ValueError("mu_joint must be S x Xi")
        if self.horizon < 1 or self.m < 0 or self.n < 0:
            raise ValueError("need horizon >= 1 and m, n >= 0")

    @property
    def n_states(self) -> int:
        return len(self.transitions)

    @property
    def n_actions(self) -> int:
        return len(self.transitions[0])

    @property
    def n_exo(self) -> int:
        return len(self.exo)

    @property
    def n_obs(self) -> int:
        """Number of content symbols (BLANK excluded)."""
        return len(self.emission[0][0]) - 1

    @property
    def deterministic(self) -> bool:
        return all(isinstance(e, int) for row in self.transitions for e in row)

    def step(self, s: int, a: int) -> int:
        nxt = self.transitions[s][a]
        if not isinstance(nxt, int):
            raise ValueError(f"transition ({s}, {a}) is not deterministic: {nxt}")
        return nxt

    def init_prob(self, s: int, xi: int) -> Fraction:
        if self.mu_joint is not None:
            return self.mu_joint[s][xi]
        return self.mu_s[s] * self.mu_xi[xi]

    def emission_support(self, s: int, xi: int) -> list:
        row = self.emission[s][xi]
        out = [(o, p) for o, p in enumerate(row[:-1]) if p]
        if row[-1]:
            out.insert(0, (BLANK, row[-1]))
        return out

    def exo_support(self, xi: int) -> list:
        return [(x2, p) for x2, p in enumerate(self.exo[xi]) if p]

    def state_label(self, s: int) -> str:
        return self.state_labels[s] if self.state_labels else str(s)

    def action_label(self, a: int) -> str:
        return self.action_labels[a] if self.action_labels else str(a)

    def with_(self, **changes) -> "FmPomdp":
        return replace(self, **changes)


@dataclass(frozen=True)
class Policy:
    """Action distribution per agent state; exo_rows[s][xi] overrides rows when given."""

    rows: tuple
    exo_rows: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(_fracs(r) for r in self.rows))
        if self.exo_rows is not None:
            object.__setattr__(self, "exo_rows", tuple(tuple(_fracs(r) for r in rows) for rows in self.exo_rows))

    @classmethod
    def uniform(cls, model: FmPomdp) -> "Policy":
        p = Fraction(1, model.n_actions)
        return cls(tuple((p,) * model.n_actions for _ in range(model.n_states)))

    @classmethod
    def exo_dependent(cls, table) -> "Policy":
        """Build from table[s][xi][a]; the first exo slice doubles as rows."""
        table = tuple(tuple(_fracs(r) for r in rows) for rows in table)
        return cls(tuple(rows[0] for rows in table), table)

    def probs(self, s: int, xi: int = 0) -> tuple:
        if self.exo_rows is not None:
            return self.exo_rows[s][xi]
        return self.rows[s]

    def support(self, s: int, xi: int = 0) -> list:
        return [(a, p) for a, p in enumerate(self.probs(s, xi)) if p]

    @property
    def endogenous(self) -> bool:
        if self.exo_rows is None:
            return True
        return all(len(set(rows)) == 1 and rows[0] == self.rows[s] for s, rows in enumerate(self.exo_rows))


@dataclass(frozen=True)
class Violation:
    kind: str  # row-sum | range | non-determinism | block | non-factored-init | shape | horizon
    where: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_dist(row, where, out, kind="row-sum"):
    if any(p < 0 or p > 1 for p in row):
        out.append(Violation("range", where, f"entries outside [0,1]: {[str(p) for p in row]}"))
    total = sum(row, Fraction(0))
    if total != 1:
        out.append(Violation(kind, where, f"sums to {total}"))


def validate_model(model: FmPomdp, policy: Policy | None = None, for_discovery: bool = False) -> ValidationReport:
    """List every violated structural assumption with a witness. Never raises."""
    out: list[Violation] = []
    S, A, X = model.n_states, model.n_actions, model.n_exo

    for s, row in enumerate(model.transitions):
        for a, nxt in enumerate(row):
            if not isinstance(nxt, int):
                out.append(Violation("non-determinism", f"T[{s}][{a}]", f"successors {list(nxt)}"))
            elif not 0 <= nxt < S:
                out.append(Violation("range", f"T[{s}][{a}]", f"successor {nxt} outside 0..{S - 1}"))

    for xi, row in enumerate(model.exo):
        _check_dist(row, f"exo[{xi}]", out)
    for s in range(S):
        for xi in range(X):
            _check_dist(model.emission[s][xi], f"emission[{s}][{xi}]", out)
    _check_dist(model.mu_s, "mu_s", out)
    _check_dist(model.mu_xi, "mu_xi", out)

    if model.mu_joint is not None:
        _check_dist([p for r in model.mu_joint for p in r], "mu_joint", out)
        ms = [sum(r, Fraction(0)) for r in model.mu_joint]
        mx = [sum((model.mu_joint[s][x] for s in range(S)), Fraction(0)) for x in range(X)]
        for s in range(S):
            for x in range(X):
                if model.mu_joint[s][x] != ms[s] * mx[x]:
                    out.append(Violation("non-factored-init", f"mu[{s}][{x}]",
                                         f"{model.mu_joint[s][x]} != {ms[s]} * {mx[x]}"))
                    break
            else:
                continue
            break

    if model.block:
        owner: dict[int, tuple] = {}
        for s in range(S):
            for xi in range(X):
                for o, _ in model.emission_support(s, xi):
                    if o in owner and owner[o] != (s, xi):
                        out.append(Violation("block", f"symbol {o}",
                                             f"emitted by latents {owner[o]} and {(s, xi)}"))
                    owner.setdefault(o, (s, xi))

    if policy is not None:
        if len(policy.rows) != S:
            out.append(Violation("shape", "policy", f"{len(policy.rows)} rows for {S} states"))
        else:
            for s in range(S):
                for xi in range(X if policy.exo_rows is not None else 1):
                    row = policy.probs(s, xi)
                    if len(row) != A:
                        out.append(Violation("shape", f"policy[{s}]", f"{len(row)} actions, expected {A}"))
                    else:
                        _check_dist(row, f"policy[{s}][{xi}]" if policy.exo_rows else f"policy[{s}]", out)

    if for_discovery and model.deterministic:
        try:
            D = diameter(model)
        except Unreachable as e:
            out.append(Violation("horizon", "diameter", str(e)))
        else:
            need = model.m + model.n + D + 1
            if model.horizon < need:
                out.append(Violation("horizon", "H", f"H={model.horizon} < m+n+D+1={need}"))
    return ValidationReport(tuple(out))


def diameter(agent, reachable_only: bool = False) -> int:
    """Longest shortest action path over ordered state pairs (BFS from every state).

    Accepts an FmPomdp or a bare transition table. With reachable_only, pairs
    whose target cannot be reached are skipped instead of raising.
    """
    table = agent.transitions if isinstance(agent, FmPomdp) else agent
    S = len(table)
    best = 0
    for src in range(S):
        dist = {src: 0}
        queue = deque([src])
        while queue:
            s = queue.popleft()
            for nxt in table[s]:
                if nxt not in dist:
                    dist[nxt] = dist[s] + 1
                    queue.append(nxt)
        if len(dist) < S and not reachable_only:
            missing = min(set(range(S)) - set(dist))
            raise Unreachable(src, missing)
        best = max(best, max(dist.values()))
    return best


def latent_marginal(model: FmPomdp, policy: Policy, t: int) -> dict:
    """Exact law of (s_t, xi_t, a_{t-1}) as a dict; a_0 is NONE."""
    if t < 1:
        raise ValueError("t must be >= 1")
    cur: dict = {}
    for s in range(model.n_states):
        for xi in range(model.n_exo):
            p = model.init_prob(s, xi)
            if p:
                cur[(s, xi, NONE)] = p
    for _ in range(t - 1):
        nxt: dict = {}
        for (s, xi, _), p in cur.items():
            for a, pa in policy.support(s, xi):
                s2 = model.step(s, a)
                for x2, px in model.exo_support(xi):
                    key = (s2, x2, a)
                    nxt[key] = nxt.get(key, 0) + p * pa * px
        cur = nxt
    return dict(sorted(cur.items()))


def reachable_latents(model: FmPomdp, policy: Policy, t: int) -> frozenset:
    return frozenset((s, xi) for s, xi, _ in latent_marginal(model, policy, t))


def successors(model: FmPomdp, policy: Policy, latents: Iterable) -> frozenset:
    """One-step image of a latent set under T, the exo support and the policy support."""
    out = set()
    for s, xi in latents:
        for a, _ in policy.support(s, xi):
            for x2, _ in model.exo_support(xi):
                out.add((model.step(s, a), x2))
    return frozenset(out)


def relabel_states(model: FmPomdp, perm: Sequence[int]) -> FmPomdp:
    """Rename agent state s to perm[s]."""
    inv = [0] * len(perm)
    for s, p in enumerate(perm):
        inv[p] = s
    trans = [[perm[model.transitions[inv[p]][a]] for a in range(model.n_actions)] for p in range(len(perm))]
    labels = tuple(model.state_label(inv[p]) for p in range(len(perm)))
    return model.with_(
        transitions=trans,
        emission=[model.emission[inv[p]] for p in range(len(perm))],
        mu_s=[model.mu_s[inv[p]] for p in range(len(perm))],
        state_labels=labels,
        mu_joint=None if model.mu_joint is None else [model.mu_joint[inv[p]] for p in range(len(perm))],
    )
