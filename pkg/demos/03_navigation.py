"""
Navigation on a line
====================

A point mass at position p with velocity v in {-1, 0, +1}; the action is an
acceleration. Only the position is observed. Running into a wall zeroes the
velocity, which erases what the velocity was.
"""
from fmpomdp import NavSpec, Policy, check_future_decodability, check_past_decodability, make_navigation
from fmpomdp import verify_decoupling
from fmpomdp.envs import agent_model, blank_unless_phase, compose, make_exo_cycle, nav_state

nav = make_navigation(NavSpec(5))
pol = Policy.uniform(nav)
print(f"{nav.n_states} states, horizon {nav.horizon}")

print("past m=2:", check_past_decodability(nav, pol, 2).holds)
fut = check_future_decodability(nav, pol, 2)
print("future n=2:", fut.holds, f"({len(fut.conflicts)} ambiguous windows)")
for w, states in fut.conflicts[:4]:
    print("  ", w, "->", [nav_state(s) for s in states])

# %%
curtain = make_navigation(NavSpec(5, frozenset({2})))
print("curtain at cell 2, past m=2:", check_past_decodability(curtain, Policy.uniform(curtain), 2).holds)

masked = compose(nav, make_exo_cycle(4), blank_unless_phase(0))
print("position shown one step in four, past m=5:",
      check_past_decodability(masked, Policy.uniform(masked), 5, anchors=[6]).holds)

# %%
# Decoupling: with a policy that ignores the exogenous chain, observation
# dynamics factor into an agent part and an exogenous part.
noisy = compose(nav, make_exo_cycle(4))
for h in (1, 2, 3):
    print(f"h={h} residual", verify_decoupling(noisy, Policy.uniform(noisy), h).max_residual)

# A policy that reads the exogenous bit breaks it.
two = compose(agent_model([[0, 1], [0, 1]]).with_(horizon=3), [[1, 0], [0, 1]], mu_xi=["1/2", "1/2"])
peeking = Policy.exo_dependent([[["3/4", "1/4"], ["1/4", "3/4"]]] * 2)
rep = verify_decoupling(two, peeking, 2)
print("xi-dependent policy residual", rep.max_residual, rep.witness)
