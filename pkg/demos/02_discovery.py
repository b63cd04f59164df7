"""
Which objectives find the agent state?
======================================

Each reachable past window at the anchor is summarised by its row family:
for every usable gap k, the exact action posterior against each state k steps
later. Windows with equal families share a class.
"""
from fmpomdp import Policy, discover_partition, separation_matrix
from fmpomdp.discovery import is_bayes_consistent
from fmpomdp.envs import compose, exo_tagged, make_exo_cycle, make_fj_counterexample, make_gridworld

ce = make_fj_counterexample()
pol = Policy.uniform(ce)

for ob in ("MIK_A", "MIK", "FJ", "FJ_A", "AH_A"):
    res = discover_partition(ce, pol, ob, 3)
    print(f"{ob:6s} {res.count} classes, {res.verdict.refinement:12s} states grouped as {res.state_partition.classes()}")

# %%
# (x, -1) and (x, +1) have the same successors under every action, so no
# forward row tells them apart; only their role as a target differs.
sm = separation_matrix(ce, pol, "MIK_A", 3)
print("unseparated pairs:", [(ce.state_label(a), ce.state_label(b)) for a, b in sm.unseparated()])

codes = [(s // 4, s % 2) for s in range(8)]
print("four codes (sA // 2, sB) reproduce every MIK_A posterior:", is_bayes_consistent(ce, pol, "MIK_A", 3, codes)[0])

# %%
# With the state shown every step, AH keeps only one-step information.
obs = make_fj_counterexample(1)
res = discover_partition(obs, Policy.uniform(obs), "AH", 3)
print("AH on the observed variant:", res.count, res.verdict.refinement)

# %%
# A gridworld whose observations also carry an exogenous tag: the tag is dropped.
grid = compose(make_gridworld(2, 3), make_exo_cycle(4), exo_tagged, block=True)
res = discover_partition(grid, Policy.uniform(grid), "MIK_A")
print("gridworld x exo4:", res.count, "classes,", "isomorphic" if res.verdict.isomorphic else res.verdict.refinement)
print(res.verdict.confusion_csv(list(res.truth.names)))
