# %% [markdown]
# # Tracking a random third-order plant
#
# The true state must stay inside every computed set.  `simulate` checks
# this and validates each polytope as it goes.

# %%
from lagset import Scenario, random_stable_plant, simulate

p = random_stable_plant(3, seed=7)
print("n =", [str(c) for c in p.n], " d =", [str(c) for c in p.d])

# %%
for mode in ("ptu", "utp"):
    trace = simulate(Scenario(p, 12, seed=7, mode=mode))
    counts = [(e["k"], e["n_f_final"], e["n_v_final"]) for e in trace.entries]
    print(mode, "(k, facets, vertices):", counts)

# %% [markdown]
# The float backend follows the same combinatorics on well-conditioned runs.

# %%
exact = simulate(Scenario(p, 12, seed=7))
flt = simulate(Scenario(p, 12, seed=7, backend="float"))
print("same facet counts:",
      [e["n_f_final"] for e in exact.entries] == [e["n_f_final"] for e in flt.entries])
