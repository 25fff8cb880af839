# %% [markdown]
# # Lockstep verification against the projection oracle
#
# Each step is recomputed by Fourier-Motzkin elimination with redundancy
# removal and compared exactly.  Dropping the ridge block is caught at the
# first step with a qualifying ridge.

# %%
from lagset import Scenario, from_vertices, parse_plant, random_stable_plant, verify

for m in (2, 3):
    for seed in range(3):
        print(f"m={m} seed={seed}:", verify(Scenario(random_stable_plant(m, seed), 6, seed=seed)))

# %%
swap = parse_plant((0, 1, 0), (1, 0, -1))
diamond = from_vertices([(1, 0), (0, 1), (-1, 0), (0, -1)])
sc = Scenario(swap, 3, initial=diamond)
print("correct pipeline:", verify(sc))
print("ridges skipped:  ", verify(sc, fault="skip-ridges"))
