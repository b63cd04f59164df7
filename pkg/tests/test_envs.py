from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmpomdp.envs import (CE_STATES, NavSpec, agent_model, compose, dump_ik_examples, exo_tagged,
                          first_action_marginals, make_exo_cycle, make_fj_counterexample, make_gridworld,
                          make_navigation, nav_index, nav_state, nav_step, random_chain_model)
from fmpomdp.errors import BudgetExceeded
from fmpomdp.io import model_hash
from fmpomdp.model import BLANK, Policy, diameter, validate_model
from fmpomdp.trajectories import enumerate_trajectories

CE_HASH = "c72510fbb33b65dfdb88cab151ade7242b7f7da849b4a177581482b952a15a53"

REFERENCE_K2 = """\
(0, -1)->(0, -1) via a:(1, -1)
(0, -1)->(0, 1) via a:(-1, 1)
(0, -1)->(2, -1) via a:(-1, -1)
(0, -1)->(2, 1) via a:(1, 1)
(0, 1)->(0, -1) via a:(1, -1)
(0, 1)->(0, 1) via a:(-1, 1)
(0, 1)->(2, -1) via a:(-1, -1)
(0, 1)->(2, 1) via a:(1, 1)
""".splitlines()

REFERENCE_K4_FROM_0M = """\
(0, -1)->(0, -1) via a:(-1, -1, -1, -1)
(0, -1)->(0, -1) via a:(-1, 1, 1, -1)
(0, -1)->(0, -1) via a:(1, -1, 1, -1)
(0, -1)->(0, -1) via a:(1, 1, -1, -1)
(0, -1)->(0, 1) via a:(-1, -1, 1, 1)
(0, -1)->(0, 1) via a:(-1, 1, -1, 1)
(0, -1)->(0, 1) via a:(1, -1, -1, 1)
(0, -1)->(0, 1) via a:(1, 1, 1, 1)
(0, -1)->(2, -1) via a:(-1, -1, 1, -1)
(0, -1)->(2, -1) via a:(-1, 1, -1, -1)
(0, -1)->(2, -1) via a:(1, -1, -1, -1)
(0, -1)->(2, -1) via a:(1, 1, 1, -1)
(0, -1)->(2, 1) via a:(-1, -1, -1, 1)
(0, -1)->(2, 1) via a:(-1, 1, 1, 1)
(0, -1)->(2, 1) via a:(1, -1, 1, 1)
(0, -1)->(2, 1) via a:(1, 1, -1, 1)
""".splitlines()


def test_counterexample_shape(ce):
    assert (ce.n_states, ce.n_actions, ce.n_exo) == (8, 2, 4)
    assert diameter(ce) == 3 and (ce.m, ce.n, ce.horizon) == (3, 3, 10)
    s, a = CE_STATES.index((0, -1)), 1  # action +1
    assert CE_STATES[ce.step(s, a)] == (1, 1)
    assert ce.mu_s == (ce.mu_s[0],) * 8 and ce.mu_xi == (ce.mu_xi[0],) * 4


def test_counterexample_masks_all_but_phase_zero(ce):
    for s in range(8):
        assert ce.emission_support(s, 0) == [(s, 1)]
        assert all(ce.emission_support(s, x) == [(BLANK, 1)] for x in (1, 2, 3))


def test_counterexample_hash_is_frozen():
    assert model_hash(make_fj_counterexample()) == CE_HASH
    assert model_hash(make_fj_counterexample()) == model_hash(make_fj_counterexample())


def test_dump_count_and_reference_listing(ce):
    assert dump_ik_examples(ce, 1, 10).total == 16368
    k2 = dump_ik_examples(ce, 2, 2).lines
    assert [ln for ln in k2 if ln.startswith(("(0, -1)->", "(0, 1)->"))] == REFERENCE_K2
    k4 = dump_ik_examples(ce, 4, 4).lines
    assert [ln for ln in k4 if ln.startswith("(0, -1)->")] == REFERENCE_K4_FROM_0M


def test_dump_size_and_budget(ce):
    lines = dump_ik_examples(ce, 1, 3).lines
    assert len(lines) == 8 * (2 + 4 + 8)
    with pytest.raises(BudgetExceeded):
        dump_ik_examples(ce, 1, 10, budget=1000)


def test_long_gaps_are_uninformative(ce):
    marg = first_action_marginals(ce, 1, 10)
    assert all(p == (0.5, 0.5) for (s, e, k), p in marg.items() if k >= 4)
    assert any(p != (0.5, 0.5) for (s, e, k), p in marg.items() if k in (2, 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 3), st.randoms(use_true_random=False), st.integers(1, 3))
def test_dump_total_formula(S, A, rnd, k_hi):
    model = agent_model([[rnd.randrange(S) for _ in range(A)] for _ in range(S)], horizon=1)
    dump = dump_ik_examples(model, 1, k_hi)
    assert dump.total == len(dump.lines) == S * sum(A ** k for k in range(1, k_hi + 1))
    assert len(set(dump.lines)) == dump.total


def _nav_reference(L, p, v, a):
    v2 = max(-1, min(1, v + a))
    p2 = p + v2
    if p2 < 0:
        return 0, 0
    if p2 > L - 1:
        return L - 1, 0
    return p2, v2


@pytest.mark.parametrize("L", [2, 3, 5])
def test_navigation_dynamics(L):
    spec = NavSpec(L)
    model = make_navigation(spec)
    assert model.n_states == 3 * L
    for i in range(3 * L):
        p, v = nav_state(i)
        assert nav_index(p, v) == i
        for ai, a in enumerate((-1, 0, 1)):
            assert nav_step(spec, p, v, a) == _nav_reference(L, p, v, a)
            p2, v2 = nav_state(model.step(i, ai))
            assert 0 <= p2 < L and (p2, v2) == _nav_reference(L, p, v, a)


def test_navigation_wall_zeroes_velocity():
    assert nav_step(NavSpec(5), 4, 1, 1) == (4, 0)
    assert nav_step(NavSpec(5), 0, -1, 0) == (0, 0)


def test_navigation_emission_and_horizon():
    nav = make_navigation(NavSpec(5, frozenset({2})))
    assert validate_model(nav).ok and not nav.block
    assert nav.emission_support(nav_index(2, 0), 0) == [(BLANK, 1)]
    assert nav.emission_support(nav_index(3, 1), 0) == [(3, 1)]
    # (0, +1) and (4, -1) are only initial states; the horizon uses reachable targets
    assert nav.horizon == 2 + 2 + diameter(nav, reachable_only=True) + 1


def test_period_one_composition_is_the_plain_mdp():
    base = agent_model([[1, 0], [1, 1]]).with_(horizon=3)
    same = compose(base, make_exo_cycle(1))
    pol = Policy([["1/3", "2/3"], ["1/2", "1/2"]])
    strip = lambda trs: Counter({(t.states, t.obs, t.actions): t.weight for t in trs})
    assert strip(enumerate_trajectories(base, pol, 3)) == strip(enumerate_trajectories(same, pol, 3))
    assert make_exo_cycle(1) == ((1,),)


def test_compositions_validate():
    nav = make_navigation(NavSpec(4))
    for model in (compose(nav, make_exo_cycle(3)),
                  compose(make_gridworld(2, 2), make_exo_cycle(4), exo_tagged, block=True),
                  make_fj_counterexample(2)):
        assert validate_model(model, Policy.uniform(model)).ok
    with pytest.raises(ValueError):
        make_exo_cycle(0)


def test_gridworld_bumps():
    g = make_gridworld(2, 3)
    assert g.step(0, 0) == 0 and g.step(0, 2) == 0  # up and left from the corner
    assert g.step(0, 3) == 1 and g.step(0, 1) == 3
    assert diameter(g) == 3


@pytest.mark.parametrize("seed", range(25))
def test_random_chains_are_valid_and_connected(seed):
    m = random_chain_model(seed)
    assert m.n_states <= 6 and m.n_actions <= 3
    assert validate_model(m, Policy.uniform(m), for_discovery=True).ok
    assert m == random_chain_model(seed)
