import itertools
from collections import defaultdict
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmpomdp.decodability import FUTURE, PAST, derive_decoder
from fmpomdp.envs import (NavSpec, agent_model, blank_unless_phase, compose, first_action_marginals,
                          make_exo_cycle, make_fj_counterexample, make_navigation)
from fmpomdp.errors import AssumptionViolated
from fmpomdp.inference import (bayes_classifier, bayes_classifier_pooled, latent_inverse, verify_decoupling,
                               verify_identity)
from fmpomdp.model import Policy
from fmpomdp.objectives import Objective, make_key
from fmpomdp.trajectories import enumerate_trajectories

from strategies import dists, model_and_policy

ONE, ZERO = Fraction(1), Fraction(0)


def test_four_cycle_one_step_inverse():
    cyc = agent_model([[(s - 1) % 4, (s + 1) % 4] for s in range(4)])
    inv = latent_inverse(cyc, Policy.uniform(cyc), 1)
    for s in range(4):
        assert inv(s, (s + 1) % 4, 1) == (ZERO, ONE)
        assert inv(s, (s - 1) % 4, 1) == (ONE, ZERO)


def test_counterexample_rows_match_counting(ce, ce_pol):
    """Under the uniform policy every action string is equally likely, so rows are example counts."""
    inv = latent_inverse(ce, ce_pol, 10)
    counted = first_action_marginals(ce, 1, 10)
    assert {(s, s2, k): r for (s, s2, k), r in counted.items()} == inv.rows
    for k in range(4, 11):
        assert all(inv.rows[(s, s2, k)] == (Fraction(1, 2),) * 2 for (s, s2) in inv.kernel[k])


def _brute_rows(model, pol, K):
    rows = {}
    for k in range(1, K + 1):
        acc = defaultdict(lambda: [ZERO] * model.n_actions)
        for s in range(model.n_states):
            for seq in itertools.product(range(model.n_actions), repeat=k):
                w, cur = ONE, s
                for a in seq:
                    w *= pol.probs(cur)[a]
                    cur = model.step(cur, a)
                if w:
                    acc[(s, cur)][seq[0]] += w
        for (s, s2), v in acc.items():
            tot = sum(v)
            rows[(s, s2, k)] = tuple(x / tot for x in v)
    return rows


@settings(max_examples=40, deadline=None)
@given(model_and_policy(), st.integers(1, 4))
def test_latent_inverse_matches_path_sums(mp, K):
    model, pol = mp
    inv = latent_inverse(model, pol, K)
    assert inv.rows == _brute_rows(model, pol, K)
    for (s, s2, k), row in inv.rows.items():
        assert sum(row) == 1
        # flow equation: I(s,s',k)(a) P(s'|s,k) = pi(a|s) P(s'|T(s,a),k-1)
        for a, p in enumerate(row):
            nxt = model.step(s, a)
            prev = ONE if k == 1 and nxt == s2 else ZERO if k == 1 else inv.kernel[k - 1].get((nxt, s2), ZERO)
            assert p * inv.kernel[k][(s, s2)] == pol.probs(s)[a] * prev


def test_latent_inverse_ignores_the_exogenous_chain():
    dicts = [latent_inverse(m, Policy.uniform(m), 3).to_dict()
             for m in (make_fj_counterexample(4), make_fj_counterexample(2), make_fj_counterexample(1))]
    assert dicts[0] == dicts[1] == dicts[2]


def test_latent_inverse_rejects_exo_dependent_policies():
    m = compose(agent_model([[0, 1], [0, 1]]), make_exo_cycle(2))
    with pytest.raises(ValueError):
        latent_inverse(m, Policy.exo_dependent([[[1, 0], [0, 1]]] * 2), 1)


def _brute_classifier(model, pol, ob, t, k):
    """Group full trajectories by key; independent of the segment enumerator."""
    need = t + k + (model.n if ob.family == "MIK" else 0)
    acc = defaultdict(lambda: [ZERO] * (model.n_actions + 1))
    for tr in enumerate_trajectories(model, pol, need):
        slot = acc[make_key(ob, tr, t, k, model.m, model.n)]
        slot[tr.action(t)] += tr.weight
        slot[-1] += tr.weight
    return {key: (v[-1], tuple(x / v[-1] for x in v[:-1])) for key, v in acc.items()}


@pytest.mark.parametrize("ob", list(Objective))
def test_classifier_matches_brute_force(ce, ce_pol, ob):
    got = bayes_classifier(ce, ce_pol, ob, 4, 2)
    assert got.entries == _brute_classifier(ce, ce_pol, ob, 4, 2)
    assert sum(m for m, _ in got.entries.values()) == 1


@settings(max_examples=40, deadline=None)
@given(model_and_policy(), st.sampled_from(list(Objective)))
def test_classifier_normalization_and_ah_a_degeneracy(mp, ob):
    model, pol = mp
    dist = bayes_classifier(model, pol, ob, 1, 1)
    assert sum(m for m, _ in dist.entries.values()) == 1
    for mass, probs in dist.entries.values():
        assert mass > 0 and sum(probs) == 1
        if ob is Objective.AH_A:
            assert sorted(probs)[-1] == 1


@settings(max_examples=20, deadline=None)
@given(st.data())
def test_one_action_models_are_point_masses(data):
    S = data.draw(st.integers(1, 4))
    model = agent_model([[data.draw(st.integers(0, S - 1))] for _ in range(S)]).with_(
        mu_s=data.draw(dists(S)), m=1, n=1, horizon=4)
    for ob in Objective:
        for _, probs in bayes_classifier(model, Policy.uniform(model), ob, 2, 1).entries.values():
            assert probs == (ONE,)


def test_mik_a_classifier_marginalizes_to_latent_rows(ce, ce_pol):
    past = derive_decoder(ce, ce_pol, 3, PAST, anchors=[4])
    fut = derive_decoder(ce, ce_pol, 3, FUTURE, anchors=[6])
    inv = latent_inverse(ce, ce_pol, 2)
    pooled = defaultdict(lambda: [ZERO] * 3)
    for key, (mass, probs) in bayes_classifier(ce, ce_pol, Objective.MIK_A, 4, 2).entries.items():
        slot = pooled[(past(key.first), fut(key.second))]
        slot[0] += mass * probs[0]
        slot[1] += mass * probs[1]
        slot[2] += mass
    assert {g: (v[0] / v[2], v[1] / v[2]) for g, v in pooled.items()} == {
        (s, s2): inv(s, s2, 2) for (s, s2) in inv.kernel[2]}


def test_pooled_classifier_is_a_distribution(ce, ce_pol):
    pooled = bayes_classifier_pooled(ce, ce_pol, Objective.MIK_A, [4, 5], 1)
    assert pooled and all(sum(p) == 1 for p in pooled.values())


def test_identity_suite_on_the_counterexample(ce, ce_pol):
    mik = verify_identity(ce, ce_pol, Objective.MIK_A, 3)
    assert mik.holds and mik.max_discrepancy == 0
    assert [mik.per_k[k]["keys"] for k in (1, 2, 3)] == [2560, 5120, 5120]
    for ob in (Objective.AH_A, Objective.FJ_A):
        rep = verify_identity(ce, ce_pol, ob, 3)
        assert rep.holds and {r["form"] for r in rep.per_k.values()} == {"constant"}


def test_action_free_objectives_need_decodable_windows(ce, ce_pol):
    for ob in (Objective.AH, Objective.FJ, Objective.MIK):
        with pytest.raises(AssumptionViolated):
            verify_identity(ce, ce_pol, ob, 3)


@pytest.mark.parametrize("ob,form", [("AH", "one-step"), ("FJ", "one-step"), ("MIK", "multi"),
                                     ("AH_A", "constant")])
def test_identities_on_the_observed_variant(observed, ob, form):
    rep = verify_identity(observed, Policy.uniform(observed), ob, 3)
    assert rep.holds and {r["form"] for r in rep.per_k.values()} == {form}


def test_ah_reduces_to_one_step_for_long_gaps(observed):
    rep = verify_identity(observed, Policy.uniform(observed), Objective.AH, 6)
    assert rep.holds and len(rep.per_k) == 6


def test_identity_refuses_undecodable_models():
    # every state emits the same symbol, so no window decodes anything
    m = agent_model([[0, 1], [1, 0]], emit=lambda s: 0, n_obs=1).with_(horizon=4)
    with pytest.raises(AssumptionViolated):
        verify_identity(m, Policy.uniform(m), Objective.MIK_A, 1)


def test_decoupling_holds_for_endogenous_policies(ce, ce_pol):
    single = agent_model([[1, 0], [0, 1]]).with_(horizon=4)
    assert verify_decoupling(single, Policy([["1/3", "2/3"], ["1/2", "1/2"]]), 2).max_residual == 0
    assert verify_decoupling(ce, ce_pol, 2).max_residual == 0
    nav = make_navigation(NavSpec(5))
    for rule in (None, blank_unless_phase(0)):
        composed = compose(nav, make_exo_cycle(4), *(rule,) if rule else ())
        for h in (1, 2):
            assert verify_decoupling(composed, Policy.uniform(composed), h).max_residual == 0


def _exo_policy_model():
    base = agent_model([[0, 1], [0, 1]]).with_(horizon=3)
    model = compose(base, [[ONE, ZERO], [ZERO, ONE]], mu_xi=["1/2", "1/2"])
    pol = Policy.exo_dependent([[["3/4", "1/4"], ["1/4", "3/4"]]] * 2)
    return model, pol


def test_decoupling_breaks_for_exo_dependent_policy():
    model, pol = _exo_policy_model()
    rep = verify_decoupling(model, pol, 2)
    assert rep.max_residual == Fraction(3, 8)
    w = rep.witness
    # direct check of the left-hand side from full trajectories
    num = den = ZERO
    for tr in enumerate_trajectories(model, pol, w["t"] + 2):
        if (tr.state(w["t"]), tr.exo[w["t"] - 1], tr.action(w["t"])) == (w["s"], w["xi"], w["a"]):
            den += tr.weight
            if tr.obs[w["t"] + 1] == w["o_next"]:
                num += tr.weight
    assert num / den == w["lhs"]
    assert abs(w["lhs"] - w["rhs"]) == Fraction(3, 8)


def test_decoupling_is_checked_over_all_anchors(ce, ce_pol):
    rep = verify_decoupling(ce, ce_pol, 1)
    assert rep.ts == tuple(range(1, ce.horizon))
    assert rep.checked > 0
