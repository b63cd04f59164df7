"""Exact Bayes classifiers, latent multi-step inverse models and the identity checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .decodability import FUTURE, PAST, check_future_decodability, check_past_decodability, derive_decoder
from .errors import AssumptionViolated
from .model import FmPomdp, Policy, latent_marginal
from .objectives import ConditioningKey, Objective, closed_form, key_bounds, make_key
from .trajectories import enumerate_segments

ZERO, ONE = Fraction(0), Fraction(1)


@dataclass(frozen=True)
class LatentInverse:
    """kernel[k][(s, s')] = P(s_{t+k} = s' | s_t = s); rows[(s, s', k)] = P(a_t | s_t, s_{t+k})."""

    K_max: int
    n_actions: int
    kernel: dict = field(repr=False)
    rows: dict = field(repr=False)

    def __call__(self, s: int, s2: int, k: int) -> tuple:
        return self.rows[(s, s2, k)]

    def targets(self, s: int, k: int) -> list:
        return sorted(s2 for (a, s2) in self.kernel[k] if a == s)

    def to_dict(self) -> dict:
        return {
            "K_max": self.K_max,
            "kernel": {str(k): [[s, s2, str(p)] for (s, s2), p in sorted(kk.items())]
                       for k, kk in sorted(self.kernel.items())},
            "rows": [[s, s2, k, [str(p) for p in r]] for (s, s2, k), r in sorted(self.rows.items())],
        }


def latent_inverse(model: FmPomdp, policy: Policy, K_max: int) -> LatentInverse:
    """Dynamic program over the agent chain alone; the exogenous part never enters."""
    if K_max < 1:
        raise ValueError("K_max must be >= 1")
    if not policy.endogenous:
        raise ValueError("latent_inverse needs a policy that depends on the agent state only")
    S, A = model.n_states, model.n_actions
    reach = [{s: ONE} for s in range(S)]  # k = 0
    by_k = [reach]
    for _ in range(K_max):
        prev = by_k[-1]
        cur = []
        for s in range(S):
            acc: dict = {}
            for a, pa in policy.support(s):
                for s2, p in prev[model.step(s, a)].items():
                    acc[s2] = acc.get(s2, ZERO) + pa * p
            cur.append(acc)
        by_k.append(cur)
    kernel, rows = {}, {}
    for k in range(1, K_max + 1):
        kernel[k] = {(s, s2): p for s in range(S) for s2, p in sorted(by_k[k][s].items())}
        for (s, s2), tot in kernel[k].items():
            pol = policy.probs(s)
            rows[(s, s2, k)] = tuple(pol[a] * by_k[k - 1][model.step(s, a)].get(s2, ZERO) / tot for a in range(A))
    return LatentInverse(K_max, A, kernel, rows)


@dataclass(frozen=True)
class ConditionalActionDist:
    objective: Objective
    t: int
    k: int
    entries: dict = field(repr=False)  # key -> (mass, probs)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, key):
        return self.entries[key]


def _aggregate(model, policy, objective, t, ks, budget=None) -> dict:
    """Enumerate once and return {k: ConditionalActionDist} for every k in ks."""
    objective = Objective(objective)
    bounds = [key_bounds(objective, t, k, model.m, model.n, model.horizon) for k in ks]
    lo, hi = min(b[0] for b in bounds), max(b[1] for b in bounds)
    A = model.n_actions
    acc = {k: {} for k in ks}
    for tr in enumerate_segments(model, policy, lo, hi - lo + 1, budget):
        a = tr.action(t)
        for k in ks:
            key = make_key(objective, tr, t, k, model.m, model.n)
            slot = acc[k].get(key)
            if slot is None:
                slot = acc[k][key] = [ZERO] * (A + 1)
            slot[a] += tr.weight
            slot[A] += tr.weight
    out = {}
    for k in ks:
        entries = {}
        for key in sorted(acc[k]):
            slot = acc[k][key]
            mass = slot[A]
            entries[key] = (mass, tuple(p / mass for p in slot[:A]))
        out[k] = ConditionalActionDist(objective, t, k, entries)
    return out


def bayes_classifier(model: FmPomdp, policy: Policy, objective, t: int, k: int, budget=None) -> ConditionalActionDist:
    """P(a_t | key) for every reachable key, by mass-weighted aggregation over enumerated paths."""
    return _aggregate(model, policy, objective, t, [k], budget)[k]


def bayes_classifiers(model: FmPomdp, policy: Policy, objective, t: int, ks, budget=None) -> dict:
    return _aggregate(model, policy, objective, t, list(ks), budget)


def bayes_classifier_pooled(model: FmPomdp, policy: Policy, objective, ts, k: int, budget=None) -> dict:
    """Diagnostic: anchor drawn uniformly from ts, keys stripped of t. Returns {(first, second): probs}."""
    joint: dict = {}
    for t in ts:
        dist = bayes_classifier(model, policy, objective, t, k, budget)
        for key, (mass, probs) in dist.entries.items():
            slot = joint.setdefault((key.first, key.second), [ZERO] * (len(probs) + 1))
            for a, p in enumerate(probs):
                slot[a] += mass * p
            slot[-1] += mass
    return {kk: tuple(p / v[-1] for p in v[:-1]) for kk, v in sorted(joint.items())}


@dataclass
class IdentityReport:
    objective: Objective
    t: int
    K_max: int
    per_k: dict  # k -> {"form", "keys", "max_discrepancy", "violations"}

    @property
    def max_discrepancy(self) -> Fraction:
        return max((r["max_discrepancy"] for r in self.per_k.values()), default=ZERO)

    @property
    def holds(self) -> bool:
        return all(r["max_discrepancy"] == 0 and not r["violations"] for r in self.per_k.values())


def _decoders_for(model, policy, objective: Objective, t: int, K_max: int, budget=None):
    """Past (and for MIK, future) decoders over exactly the anchors the closed forms use."""
    wa = objective.with_actions
    past_anchors = tuple(range(t, t + K_max + 1))
    v = check_past_decodability(model, policy, model.m, wa, past_anchors, budget)
    if not v.holds:
        raise AssumptionViolated(f"{objective.value}: past windows (m={model.m}) are not decodable", v.witness)
    past = derive_decoder(model, policy, model.m, PAST, wa, past_anchors, budget)
    fut = None
    if objective.family == "MIK":
        fut_anchors = tuple(range(t + 1, t + K_max + 1))
        v = check_future_decodability(model, policy, model.n, wa, fut_anchors, budget)
        if not v.holds:
            raise AssumptionViolated(f"{objective.value}: future windows (n={model.n}) are not decodable", v.witness)
        fut = derive_decoder(model, policy, model.n, FUTURE, wa, fut_anchors, budget)
    return past, fut


def _claimed(key: ConditioningKey, form: str, m: int, past, fut, inv: LatentInverse, n_actions: int):
    """The closed form the theory predicts for this key, read through the decoders."""
    t, k, fam = key.t, key.k, key.objective.family
    first, second = key.first, key.second
    if fam == "AH":
        first = first[max(0, t - m - 1):]
    if form == "constant":
        if fam == "AH":
            a_t = second[t][1]
        else:
            lo2 = max(1, t + k - m)
            a_t = second[t + 1 - lo2][1]
        return tuple(ONE if a == a_t else ZERO for a in range(n_actions))
    s_t = past(first)
    if form == "multi":
        s2 = fut(second) if fam == "MIK" else past(second)
        return inv.rows.get((s_t, s2, k))
    # one-step: decode s_{t+1} from the window P(t+1, m) inside the key
    if fam == "AH":
        w = second[max(0, t - m): t + 1]
    else:
        lo1, lo2 = max(1, t - m), max(1, t + k - m)
        merged = key.first + second[t + 1 - lo2:]
        w = merged[max(1, t + 1 - m) - lo1: t + 2 - lo1]
    return inv.rows.get((s_t, past(w), 1))


def verify_identity(model: FmPomdp, policy: Policy, objective, K_max: int, t: int | None = None,
                    budget=None) -> IdentityReport:
    """Compare every Bayes classifier entry with its claimed closed form, exactly."""
    objective = Objective(objective)
    t = model.m + 1 if t is None else t
    past, fut = _decoders_for(model, policy, objective, t, K_max, budget)
    inv = latent_inverse(model, policy, K_max)
    per_k = {}
    for k, dist in bayes_classifiers(model, policy, objective, t, range(1, K_max + 1), budget).items():
        form = closed_form(objective, k, model.m)
        worst, bad = ZERO, []
        for key, (mass, probs) in dist.entries.items():
            claim = _claimed(key, form, model.m, past, fut, inv, model.n_actions)
            if claim is None:
                bad.append((key, probs, None))
                continue
            d = max(abs(p - q) for p, q in zip(probs, claim))
            if d:
                bad.append((key, probs, claim))
            worst = max(worst, d)
        per_k[k] = {"form": form, "keys": len(dist), "max_discrepancy": worst, "violations": bad}
    return IdentityReport(objective, t, K_max, per_k)


@dataclass
class DecouplingReport:
    h: int
    ts: tuple
    max_residual: Fraction
    checked: int
    witness: dict | None = None

    @property
    def holds(self) -> bool:
        return self.max_residual == 0


def _joint_after(model, policy, s, xi, a, h) -> dict:
    """Law of (s_{t+h}, xi_{t+h}) given z_t = (s, xi), a_t = a."""
    cur = {}
    s1 = model.step(s, a)
    for x1, px in model.exo_support(xi):
        cur[(s1, x1)] = cur.get((s1, x1), ZERO) + px
    for _ in range(h - 1):
        nxt = {}
        for (s_, x_), p in cur.items():
            for b, pb in policy.support(s_, x_):
                s2 = model.step(s_, b)
                for x2, px in model.exo_support(x_):
                    nxt[(s2, x2)] = nxt.get((s2, x2), ZERO) + p * pb * px
        cur = nxt
    return cur


def _exo_power(model, h) -> list:
    X = model.n_exo
    mat = [[ONE if i == j else ZERO for j in range(X)] for i in range(X)]
    for _ in range(h):
        mat = [[sum((mat[i][l] * model.exo[l][j] for l in range(X)), ZERO) for j in range(X)] for i in range(X)]
    return mat


def _obs_law(model, latents: dict) -> dict:
    out = {}
    for (s, xi), p in latents.items():
        for o, q in model.emission_support(s, xi):
            out[o] = out.get(o, ZERO) + p * q
    return out


def verify_decoupling(model: FmPomdp, policy: Policy, h: int, ts=None) -> DecouplingReport:
    """Residual of P(o' | z, a, h) against q(o'|s',xi') P(s'|s,a,h) P(xi'|xi,h).

    The agent-only kernel is the one an observer tracking s alone would use,
    P(s_{t+h} | s_t, a_t), so it averages over xi_t whenever the policy looks at xi.
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    ts = tuple(range(1, max(1, model.horizon - h) + 1)) if ts is None else tuple(ts)
    exo_h = _exo_power(model, h)
    worst, witness, checked = ZERO, None, 0
    for t in ts:
        marg = {}
        for (s, xi, _), p in latent_marginal(model, policy, t).items():
            marg[(s, xi)] = marg.get((s, xi), ZERO) + p
        cache = {}
        for (s, xi), pz in sorted(marg.items()):
            for a, _ in policy.support(s, xi):
                if (s, a) not in cache:
                    weights = {x: marg[(s, x)] * policy.probs(s, x)[a] for x in range(model.n_exo)
                               if (s, x) in marg and policy.probs(s, x)[a]}
                    total = sum(weights.values(), ZERO)
                    agent = {}
                    for x, w in weights.items():
                        for (s2, _), p in _joint_after(model, policy, s, x, a, h).items():
                            agent[s2] = agent.get(s2, ZERO) + w / total * p
                    cache[(s, a)] = agent
                agent = cache[(s, a)]
                lhs = _obs_law(model, _joint_after(model, policy, s, xi, a, h))
                rhs = _obs_law(model, {(s2, x2): ps * exo_h[xi][x2] for s2, ps in agent.items()
                                       for x2 in range(model.n_exo) if exo_h[xi][x2]})
                for o in sorted(set(lhs) | set(rhs)):
                    checked += 1
                    r = abs(lhs.get(o, ZERO) - rhs.get(o, ZERO))
                    if r > worst:
                        worst = r
                        witness = {"t": t, "s": s, "xi": xi, "a": a, "o_next": o,
                                   "lhs": lhs.get(o, ZERO), "rhs": rhs.get(o, ZERO)}
    return DecouplingReport(h, ts, worst, checked, witness)
