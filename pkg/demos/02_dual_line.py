# %% [markdown]
# # Dual line and the set M(x, f, z)
#
# For a vertex x and a facet direction f, the dual line collects the
# directions reachable one step later.  Its crossing of the u* = 0 axis
# decides whether a ridge facet is needed.

# %%
from lagset import compute_M, from_vertices, parse_plant, verify_theorem1
from lagset.recursion import dual_line
from lagset.harness import example

p = parse_plant((0, 1, 0), (1, 0, -1))
x, f, z = (0, 0), (1, 0), 0
line = dual_line(f, p)
print("u* at y* = 0:", line.u_star(0))
M = compute_M(x, f, z, p)
print("M(x, f, z) =", sorted(M.points()))

# %% [markdown]
# Theorem 1 ties support values before and after a step.  Sample it on the
# diamond with measurement z = 0.

# %%
from lagset import step

diamond = from_vertices([(1, 0), (0, 1), (-1, 0), (0, -1)])
nxt, _ = step(diamond, 0, p, mode="utp")
print(verify_theorem1(diamond, nxt, 0, p, samples=32))

# %%
print(example("fig1"))
