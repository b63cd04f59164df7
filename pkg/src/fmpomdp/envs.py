"""Environment constructors: the forward-jump counterexample, 1-D navigation,
a small gridworld, exogenous cycles and random deterministic chains."""
from __future__ import annotations

import itertools
import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded, Unreachable
from .model import FmPomdp, default_budget, diameter

ONE, ZERO = Fraction(1), Fraction(0)


def _onehot(i: int, width: int) -> list:
    return [ONE if j == i else ZERO for j in range(width)]


def _uniform(n: int) -> list:
    return [Fraction(1, n)] * n


def agent_model(transitions, m=0, n=0, name="agent", state_labels=None, action_labels=None,
                emit=None, n_obs=None, horizon=None) -> FmPomdp:
    """Model with a single exogenous state. By default the state itself is observed."""
    S = len(transitions)
    emit = emit or (lambda s: s)
    n_obs = S if n_obs is None else n_obs
    emission = [[_onehot(emit(s), n_obs + 1)] for s in range(S)]
    model = FmPomdp(transitions, [[ONE]], emission, _uniform(S), [ONE], m, n, 1, True, name,
                    state_labels, action_labels)
    return model.with_(horizon=horizon or _discovery_horizon(model))


def _discovery_horizon(model: FmPomdp) -> int:
    try:
        return model.m + model.n + diameter(model) + 1
    except Unreachable:
        return model.m + model.n + 1


# emission rules: (base_row, s, xi, n_exo) -> row

def keep(row, s, xi, n_exo):
    return list(row)


def blank_unless_phase(phase: int = 0):
    def rule(row, s, xi, n_exo):
        return list(row) if xi == phase else [ZERO] * (len(row) - 1) + [ONE]
    rule.__name__ = f"blank_unless_phase_{phase}"
    return rule


def exo_tagged(row, s, xi, n_exo):
    """Content symbol o becomes o * n_exo + xi, so the noise is visible in every observation."""
    n_obs = len(row) - 1
    out = [ZERO] * (n_obs * n_exo + 1)
    for o in range(n_obs):
        out[o * n_exo + xi] = row[o]
    out[-1] = row[-1]
    return out


def make_exo_cycle(period: int) -> tuple:
    if period < 1:
        raise ValueError("period must be >= 1")
    return tuple(tuple(_onehot((c + 1) % period, period)) for c in range(period))


def compose(agent_env: FmPomdp, exo, emission_rule=keep, mu_xi=None, name=None, block=None,
            horizon=None) -> FmPomdp:
    """Attach an exogenous chain to an agent model, reading emissions from its xi = 0 slice."""
    X = len(exo)
    rows = [[emission_rule(agent_env.emission[s][0], s, xi, X) for xi in range(X)]
            for s in range(agent_env.n_states)]
    model = agent_env.with_(
        exo=exo, emission=rows, mu_xi=mu_xi or _uniform(X),
        name=name or f"{agent_env.name}+exo{X}",
        block=agent_env.block and emission_rule is exo_tagged if block is None else block,
    )
    return model.with_(horizon=horizon or model.horizon)


# forward-jump counterexample

CE_STATES = [(x, b) for x in range(4) for b in (-1, 1)]
CE_ACTIONS = (-1, 1)


def fj_agent(m: int = 3, n: int = 3) -> FmPomdp:
    """s = (sA, sB): sA walks a 4-cycle by the action, sB remembers the last action."""
    idx = {st: i for i, st in enumerate(CE_STATES)}
    trans = [[idx[((x + a) % 4, a)] for a in CE_ACTIONS] for x, _ in CE_STATES]
    return agent_model(trans, m, n, "fj-agent", [str(st) for st in CE_STATES], [str(a) for a in CE_ACTIONS])


def make_fj_counterexample(exo_period: int = 4) -> FmPomdp:
    """The counterexample: the state is shown only when the exogenous counter is 0."""
    base = fj_agent()
    name = "fj-counterexample" if exo_period == 4 else f"fj-counterexample-p{exo_period}"
    return compose(base, make_exo_cycle(exo_period), blank_unless_phase(0), name=name, block=False)


# navigation

@dataclass(frozen=True)
class NavSpec:
    length: int = 5
    curtains: frozenset = frozenset()
    m: int = 2
    n: int = 2
    horizon: int | None = None


NAV_V = (-1, 0, 1)
NAV_A = (-1, 0, 1)


def _clip(x, lo, hi):
    return max(lo, min(hi, x))


def nav_step(spec: NavSpec, p: int, v: int, a: int) -> tuple[int, int]:
    v2 = _clip(v + a, -1, 1)
    p2 = p + v2
    if not 0 <= p2 < spec.length:
        return _clip(p2, 0, spec.length - 1), 0
    return p2, v2


def nav_collides(spec: NavSpec, p: int, v: int, a: int) -> bool:
    return not 0 <= p + _clip(v + a, -1, 1) < spec.length


def nav_index(p: int, v: int) -> int:
    return 3 * p + v + 1


def nav_state(i: int) -> tuple[int, int]:
    return i // 3, i % 3 - 1


def make_navigation(spec: NavSpec = NavSpec()) -> FmPomdp:
    """Point mass on a line; position is observed (BLANK under curtains), velocity never."""
    if spec.length < 2:
        raise ValueError("need L >= 2")
    S = 3 * spec.length
    trans = [[nav_index(*nav_step(spec, *nav_state(i), a)) for a in NAV_A] for i in range(S)]
    labels = [str(nav_state(i)) for i in range(S)]

    def emit(i):
        p = nav_state(i)[0]
        return spec.length if p in spec.curtains else p  # index L is the BLANK column

    # (0, +1) and (L-1, -1) can only be initial states, so the horizon uses the
    # diameter over reachable targets
    model = agent_model(trans, spec.m, spec.n, f"navigation-L{spec.length}", labels,
                        [f"{a:+d}" if a else "0" for a in NAV_A], emit, spec.length, spec.horizon)
    H = spec.horizon or spec.m + spec.n + diameter(model, reachable_only=True) + 1
    return model.with_(block=False, horizon=H)


# gridworld

GRID_MOVES = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}


def make_gridworld(rows: int = 2, cols: int = 3) -> FmPomdp:
    """Fully observed grid; moving into a wall leaves the agent in place."""
    trans = []
    for r, c in itertools.product(range(rows), range(cols)):
        row = []
        for dr, dc in GRID_MOVES.values():
            r2, c2 = r + dr, c + dc
            row.append(r2 * cols + c2 if 0 <= r2 < rows and 0 <= c2 < cols else r * cols + c)
        trans.append(row)
    labels = [str(rc) for rc in itertools.product(range(rows), range(cols))]
    return agent_model(trans, 0, 0, f"grid{rows}x{cols}", labels, list(GRID_MOVES))


# inverse-kinematics example dump

@dataclass(frozen=True)
class IkDump:
    lines: tuple
    total: int

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n" if self.lines else ""


def _ik_examples(model: FmPomdp, k_lo: int, k_hi: int, budget=None):
    if not model.deterministic:
        raise ValueError("inverse-kinematics dump needs deterministic agent dynamics")
    S, A = model.n_states, model.n_actions
    total = S * sum(A ** k for k in range(k_lo, k_hi + 1))
    budget = default_budget() if budget is None else budget
    if total > budget:
        raise BudgetExceeded(total, budget)
    for k in range(k_lo, k_hi + 1):
        rows = []
        for s in range(S):
            for seq in itertools.product(range(A), repeat=k):
                e = s
                for a in seq:
                    e = model.step(e, a)
                rows.append((s, e, seq))
        rows.sort()
        for s, e, seq in rows:
            yield k, s, e, seq


def dump_ik_examples(model: FmPomdp, k_lo: int, k_hi: int, budget=None) -> IkDump:
    """One line per (start, action sequence), sorted by (k, start, end, actions)."""
    sl = [model.state_label(s) for s in range(model.n_states)]
    al = [model.action_label(a) for a in range(model.n_actions)]
    lines = tuple(f"{sl[s]}->{sl[e]} via a:({', '.join(al[a] for a in seq)})"
                  for _, s, e, seq in _ik_examples(model, k_lo, k_hi, budget))
    return IkDump(lines, len(lines))


def first_action_marginals(model: FmPomdp, k_lo: int, k_hi: int, budget=None) -> dict:
    """(start, end, k) -> share of examples whose first action is a, by counting."""
    counts = defaultdict(lambda: [0] * model.n_actions)
    for k, s, e, seq in _ik_examples(model, k_lo, k_hi, budget):
        counts[(s, e, k)][seq[0]] += 1
    return {g: tuple(Fraction(c, sum(cs)) for c in cs) for g, cs in sorted(counts.items())}


# random deterministic chains

def _random_dist(rng: random.Random, size: int) -> list:
    w = [rng.randint(0, 3) for _ in range(size)]
    if not any(w):
        w[rng.randrange(size)] = 1
    tot = sum(w)
    return [Fraction(x, tot) for x in w]


def random_chain_model(seed: int, max_states: int = 6, max_actions: int = 3) -> FmPomdp:
    """Random strongly connected deterministic chain with a random exogenous part.

    The emission is one of: state visible; state and exo noise visible; or the
    state visible only on even phases of a 2-cycle (needs one step of memory).
    """
    rng = random.Random(seed)
    S = rng.randint(2, max_states)
    A = rng.randint(1, max_actions)
    while True:
        if A == 1:
            perm = list(range(S))
            rng.shuffle(perm)
            trans = [[0] for _ in range(S)]
            for i in range(S):
                trans[perm[i]][0] = perm[(i + 1) % S]
        else:
            trans = [[rng.randrange(S) for _ in range(A)] for _ in range(S)]
        try:
            diameter(trans)
            break
        except Unreachable:
            continue
    kind = rng.choice(["visible", "tagged", "masked"])
    if kind == "masked":
        base = agent_model(trans, 1, 1, f"random-{seed}")
        model = compose(base, make_exo_cycle(2), blank_unless_phase(0), block=False)
    else:
        X = rng.randint(1, 3)
        exo = [_random_dist(rng, X) for _ in range(X)]
        base = agent_model(trans, 0, 0, f"random-{seed}")
        model = compose(base, exo, exo_tagged if kind == "tagged" else keep, mu_xi=_random_dist(rng, X),
                        block=kind == "tagged" or X == 1)
    return model.with_(name=f"random-{seed}-{kind}", horizon=_discovery_horizon(model))
