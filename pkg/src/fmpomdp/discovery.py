"""State discovery by exact equality of multi-step inverse row families.

An element (a past window, or a prefix for AH) is summarised by its family
{gap -> {state k steps later -> P(a_t | element, that state)}}. Elements with
equal families share a class; the classes are then compared to the true
agent state at the anchor.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .decodability import FUTURE, PAST, check_future_decodability, check_past_decodability, derive_decoder
from .errors import AssumptionViolated, DomainMismatch, OutOfRange
from .inference import latent_inverse
from .model import FmPomdp, Policy, diameter, latent_marginal
from .objectives import Objective, information_gaps
from .trajectories import enumerate_segments, future_window, past_window, strip_actions, window_payload

COARSER, FINER, EQUAL, INCOMPARABLE = "COARSER", "FINER", "EQUAL", "INCOMPARABLE"


@dataclass(frozen=True)
class Partition:
    labels: dict  # element -> dense class id, in lexicographic element order
    names: tuple | None = None  # optional display name per class

    @property
    def count(self) -> int:
        return len(set(self.labels.values()))

    def classes(self) -> list:
        out = [[] for _ in range(self.count)]
        for e, c in self.labels.items():
            out[c].append(e)
        return out

    def name(self, c: int) -> str:
        return self.names[c] if self.names else str(c)

    def to_dict(self) -> dict:
        return {"count": self.count, "classes": [[_plain(e) for e in cl] for cl in self.classes()],
                "names": list(self.names) if self.names else None}


def _plain(e):
    if isinstance(e, tuple):
        return [_plain(x) for x in e]
    return e


def partition_by(elements, key, name=None) -> Partition:
    """Group elements by key(element); ids by first occurrence in sorted element order."""
    ids, labels, names = {}, {}, []
    for e in sorted(elements):
        k = key(e)
        if k not in ids:
            ids[k] = len(ids)
            names.append(name(k) if name else None)
        labels[e] = ids[k]
    return Partition(labels, tuple(names) if name else None)


@dataclass(frozen=True)
class PartitionVerdict:
    isomorphic: bool
    refinement: str
    merged_pairs: tuple  # truth class names sharing a found class
    split_pairs: tuple  # found class ids sharing a truth class
    accuracy: Fraction
    confusion: tuple = field(repr=False)  # rows: found classes, columns: truth classes

    def to_dict(self) -> dict:
        return {"isomorphic": self.isomorphic, "refinement": self.refinement,
                "merged_pairs": [list(p) for p in self.merged_pairs],
                "split_pairs": [list(p) for p in self.split_pairs],
                "accuracy": f"{self.accuracy.numerator}/{self.accuracy.denominator}"}

    def confusion_csv(self, truth_names=None) -> str:
        cols = truth_names or [str(j) for j in range(len(self.confusion[0]) if self.confusion else 0)]
        lines = ["found," + ",".join(f'"{c}"' for c in cols)]
        lines += [f"{i}," + ",".join(map(str, row)) for i, row in enumerate(self.confusion)]
        return "\n".join(lines) + "\n"


def compare_partitions(found: Partition, truth: Partition) -> PartitionVerdict:
    if set(found.labels) != set(truth.labels):
        raise DomainMismatch("partitions cover different elements")
    F, T = found.count, truth.count
    conf = [[0] * T for _ in range(F)]
    for e, f in found.labels.items():
        conf[f][truth.labels[e]] += 1
    rows_pure = all(sum(1 for x in row if x) == 1 for row in conf)
    cols_pure = all(sum(1 for i in range(F) if conf[i][j]) == 1 for j in range(T))
    if rows_pure and cols_pure:
        ref = EQUAL
    elif cols_pure:
        ref = COARSER
    elif rows_pure:
        ref = FINER
    else:
        ref = INCOMPARABLE
    merged = tuple((truth.name(i), truth.name(j)) for row in conf
                   for i, j in itertools.combinations([j for j, x in enumerate(row) if x], 2))
    split = []
    for j in range(T):
        hit = [i for i in range(F) if conf[i][j]]
        split.extend((found.name(a), found.name(b)) for a, b in itertools.combinations(hit, 2))
    total = len(found.labels)
    if total:
        r, c = linear_sum_assignment(-np.array(conf, dtype=np.int64))
        acc = Fraction(int(sum(conf[i][j] for i, j in zip(r, c))), total)
    else:
        acc = Fraction(1)
    merged = tuple(sorted(tuple(sorted(pair)) for pair in merged))
    split = tuple(sorted(tuple(sorted(pair)) for pair in split))
    return PartitionVerdict(ref == EQUAL, ref, merged, split, acc, tuple(map(tuple, conf)))


def _state_family(inv, s: int, gaps) -> tuple:
    return tuple((g, tuple((s2, inv(s, s2, g)) for s2 in inv.targets(s, g))) for g in gaps)


def _require(verdict, what):
    if not verdict.holds:
        raise AssumptionViolated(f"{what} are not decodable", verdict.witness)


def _window_families(model: FmPomdp, policy: Policy, objective: Objective, K_max: int, t: int, budget=None):
    """Row family of every reachable element at anchor t, plus the true state of each element.

    Elements are augmented payloads (they carry the ground truth); the family is
    computed from the objective's own view of them, which drops actions for the
    action-free objectives. Second arguments go through the augmented
    ground-truth decoders.
    """
    if not policy.endogenous:
        raise AssumptionViolated("discovery needs an endogenous policy")
    if not model.deterministic:
        raise AssumptionViolated("discovery needs deterministic agent dynamics")
    m, n, H = model.m, model.n, model.horizon
    fam = objective.family
    gaps = information_gaps(objective, m, K_max)
    reach = max(gaps, default=0) + (n if fam == "MIK" and gaps else 0)
    if t + reach > H:
        raise OutOfRange(f"anchor {t} with K_max={K_max} needs horizon {t + reach}, model has {H}")

    past_anchors = {t} | ({t + g for g in gaps} if fam != "MIK" else set())
    if fam == "AH" and gaps:
        past_anchors = {t, t + 1}
    _require(check_past_decodability(model, policy, m, True, sorted(past_anchors), budget), "augmented past windows")
    past = derive_decoder(model, policy, m, PAST, True, sorted(past_anchors), budget)
    fut = None
    if fam == "MIK" and gaps:
        fa = sorted(t + g for g in gaps)
        _require(check_future_decodability(model, policy, n, True, fa, budget), "augmented future windows")
        fut = derive_decoder(model, policy, n, FUTURE, True, fa, budget)

    lo_e = 1 if fam == "AH" else max(1, t - m)
    acc: dict = {}
    truth: dict = {}
    A = model.n_actions
    for tr in enumerate_segments(model, policy, lo_e, t + reach - lo_e + 1, budget):
        elem = window_payload(tr, lo_e, t, True)
        truth[elem] = past(elem[max(0, len(elem) - m - 1):])
        view = elem if objective.with_actions else strip_actions(elem)
        if not gaps:
            acc.setdefault(view, {})
            continue
        a = tr.action(t)
        for g in gaps:
            if fam == "MIK":
                c = fut(future_window(tr, t + g, n, True).payload)
            else:
                c = past(past_window(tr, t + g, m, True).payload)
            slot = acc.setdefault(view, {}).setdefault((g, c), [Fraction(0)] * (A + 1))
            slot[a] += tr.weight
            slot[A] += tr.weight
    families = {}
    for view, rows in acc.items():
        fam_rows = {}
        for (g, c), slot in sorted(rows.items()):
            fam_rows.setdefault(g, []).append((c, tuple(p / slot[A] for p in slot[:A])))
        families[view] = tuple((g, tuple(fam_rows.get(g, ()))) for g in gaps)
    view_of = (lambda e: e) if objective.with_actions else strip_actions
    return {e: families[view_of(e)] for e in sorted(truth)}, truth


def ik_row_family(model: FmPomdp, policy: Policy, objective, K_max: int, element, t: int | None = None, budget=None):
    """Canonical row family of one element: an agent state id or an augmented payload."""
    objective = Objective(objective)
    if isinstance(element, int):
        inv = latent_inverse(model, policy, K_max)
        return _state_family(inv, element, information_gaps(objective, model.m, K_max))
    t = model.m + 1 if t is None else t
    families, _ = _window_families(model, policy, objective, K_max, t, budget)
    return families[element]


@dataclass(frozen=True)
class DiscoveryResult:
    objective: Objective
    K_max: int
    t: int
    partition: Partition = field(repr=False)
    truth: Partition = field(repr=False)
    verdict: PartitionVerdict
    state_partition: Partition  # agent states joined whenever their windows share a class

    @property
    def count(self) -> int:
        return self.partition.count

    def to_dict(self) -> dict:
        """Agent-state level summary; stable under changes of the exogenous chain."""
        return {"objective": self.objective.value, "K_max": self.K_max, "t": self.t,
                "classes": self.partition.count, "truth_classes": self.truth.count,
                "verdict": self.verdict.to_dict(),
                "state_classes": self.state_partition.classes(),
                "state_class_names": list(self.state_partition.names)}


def discover_partition(model: FmPomdp, policy: Policy, objective, K_max: int | None = None, t: int | None = None,
                       budget=None) -> DiscoveryResult:
    """Partition reachable past windows at anchor t by equality of their row families."""
    objective = Objective(objective)
    K_max = diameter(model) if K_max is None else K_max
    t = model.m + 1 if t is None else t
    families, truth_map = _window_families(model, policy, objective, K_max, t, budget)
    found = partition_by(families, families.__getitem__)
    truth = partition_by(truth_map, truth_map.__getitem__, model.state_label)
    verdict = compare_partitions(found, truth)

    parent = {s: s for s in set(truth_map.values())}

    def root(s):
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    for cl in found.classes():
        states = sorted({truth_map[e] for e in cl})
        for s in states[1:]:
            parent[root(s)] = root(states[0])
    groups = {}
    for s in sorted(parent):
        groups.setdefault(root(s), []).append(s)
    state_part = partition_by(parent, root, lambda r: "+".join(model.state_label(s) for s in groups[r]))
    return DiscoveryResult(objective, K_max, t, found, truth, verdict, state_part)


@dataclass(frozen=True)
class SeparationMatrix:
    states: tuple
    matrix: tuple  # matrix[i][j] true iff the objective's information tells states i and j apart

    def to_csv(self, labels=None) -> str:
        labels = labels or [str(s) for s in self.states]
        lines = ["," + ",".join(f'"{x}"' for x in labels)]
        lines += [f'"{labels[i]}",' + ",".join("1" if v else "0" for v in row) for i, row in enumerate(self.matrix)]
        return "\n".join(lines) + "\n"

    def unseparated(self) -> list:
        return [(self.states[i], self.states[j]) for i, j in itertools.combinations(range(len(self.states)), 2)
                if not self.matrix[i][j]]


def separation_matrix(model: FmPomdp, policy: Policy, objective, K_max: int | None = None) -> SeparationMatrix:
    """Pairwise distinguishability of agent states by their state-level row families."""
    objective = Objective(objective)
    K_max = diameter(model) if K_max is None else K_max
    gaps = information_gaps(objective, model.m, K_max)
    inv = latent_inverse(model, policy, max(K_max, 1))
    fams = [_state_family(inv, s, gaps) for s in range(model.n_states)]
    S = model.n_states
    mat = tuple(tuple(i != j and fams[i] != fams[j] for j in range(S)) for i in range(S))
    return SeparationMatrix(tuple(range(S)), mat)


def is_bayes_consistent(model: FmPomdp, policy: Policy, objective, K_max: int, labeling, t: int | None = None):
    """Would an encoder with these state codes, used in both argument slots, still
    reproduce the objective's Bayes classifier?  Returns (ok, witness).

    Codes c1, c2 predict P(a_t | phi(s_t) = c1, phi(s_{t+k}) = c2), mixing the
    members by their probability at anchor t; this must equal the latent row
    of every member pair with positive probability.
    """
    objective = Objective(objective)
    t = model.m + 1 if t is None else t
    gaps = information_gaps(objective, model.m, K_max)
    inv = latent_inverse(model, policy, max(K_max, 1))
    w = {}
    for (s, _, _), p in latent_marginal(model, policy, t).items():
        w[s] = w.get(s, Fraction(0)) + p
    for g in gaps:
        pooled = {}
        for (s, s2), p in inv.kernel[g].items():
            if s not in w:
                continue
            key = (labeling[s], labeling[s2])
            slot = pooled.setdefault(key, [Fraction(0)] * (model.n_actions + 1))
            for a, q in enumerate(inv(s, s2, g)):
                slot[a] += w[s] * p * q
            slot[-1] += w[s] * p
        for (s, s2) in inv.kernel[g]:
            if s not in w:
                continue
            slot = pooled[(labeling[s], labeling[s2])]
            mixed = tuple(x / slot[-1] for x in slot[:-1])
            if mixed != inv(s, s2, g):
                return False, {"k": g, "s": s, "s_next": s2, "pooled": mixed, "latent": inv(s, s2, g)}
    return True, None
