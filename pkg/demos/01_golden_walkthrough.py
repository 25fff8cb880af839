# %% [markdown]
# # Golden cases: square and diamond
#
# Plant n = (0, 1, 0), d = (1, 0, -1), i.e. x1+ = x2 + u, x2+ = x1.
# The square maps to conv{(+-1, +-2)}.  The diamond has two qualifying
# ridges, so two new facets with direction (+-1, 0) appear and the image
# is a hexagon.

# %%
from lagset import HRep, from_vertices, lag_propagate, oracle_step, parse_plant, set_equal, validate
from lagset.harness import example

p = parse_plant((0, 1, 0), (1, 0, -1))
square = from_vertices([(1, 1), (-1, 1), (-1, -1), (1, -1)])
diamond = from_vertices([(1, 0), (0, 1), (-1, 0), (0, -1)])

# %%
for name, S in (("square", square), ("diamond", diamond)):
    out, rep = lag_propagate(S, p)
    ref = oracle_step(HRep.from_polytope(S), 0, p, "utp")
    print(f"{name}: {S.n_facets} facets -> {out.n_facets} facets, {rep.n_R} ridges, "
          f"oracle agrees: {set_equal(out, ref)}, valid: {validate(out).ok}")
    print("  vertices:", sorted(out.vertices))
    print("  facets:  ", sorted(zip(out.normals, out.offsets)))

# %% [markdown]
# The full walkthrough prints every intermediate incidence block.

# %%
print(example("diamond"))
