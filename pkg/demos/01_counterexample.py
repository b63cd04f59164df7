"""
The forward-jump counterexample
===============================

Eight agent states (sA, sB): sA walks a 4-cycle by the action, sB remembers
the last action. An exogenous counter blanks the observation three steps out
of four, so three steps of history are needed to know where the agent is.
"""
from collections import Counter

from fmpomdp import Policy, check_future_decodability, check_past_decodability, diameter, verify_identity
from fmpomdp.envs import dump_ik_examples, first_action_marginals, make_fj_counterexample

ce = make_fj_counterexample()
pol = Policy.uniform(ce)
print(f"{ce.n_states} agent states, {ce.n_actions} actions, {ce.n_exo} counter phases, diameter {diameter(ce)}")

# %%
# Every (start, action string) pair for k = 1..10 is one inverse-kinematics example.
dump = dump_ik_examples(ce, 1, 10)
print("examples:", dump.total)
for line in dump_ik_examples(ce, 2, 2).lines[:4]:
    print("  ", line)

# From k = 3 on the first action carries no information about the endpoints.
marg = first_action_marginals(ce, 1, 10)
for k in range(1, 11):
    rows = Counter(p for (s, e, kk), p in marg.items() if kk == k)
    print(f"k={k:2d}", "uniform" if set(rows) == {(0.5, 0.5)} else f"{len(rows)} distinct first-action rows")

# %%
# Memory: two steps of augmented history are not enough, three are.
for m in (2, 3):
    v = check_past_decodability(ce, pol, m)
    print(f"past m={m}: {'decodable' if v.holds else 'ambiguous, e.g. ' + str(v.witness)}")
print("future n=3:", check_future_decodability(ce, pol, 3).holds)

# %%
# The Bayes classifiers of the action-augmented objectives match their closed forms exactly.
for ob in ("MIK_A", "AH_A", "FJ_A"):
    rep = verify_identity(ce, pol, ob, 3)
    forms = sorted({r["form"] for r in rep.per_k.values()})
    print(f"{ob:6s} forms={forms} keys={[r['keys'] for r in rep.per_k.values()]} max |diff|={rep.max_discrepancy}")
