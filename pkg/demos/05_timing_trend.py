# %% [markdown]
# # Incidence updates versus the oracle
#
# Both methods compute the same sets.  The oracle time grows much faster
# with the facet count.  Takes about a minute.

# %%
from lagset.harness import bench, timing_summary

recs = bench(3, 13, seed=4, check=True)
print(f"{'k':>3} {'n_f':>4} {'t_fv ms':>9} {'t_fm ms':>10} {'ratio':>7}")
for r in recs:
    fm = f"{r.t_fm * 1e3:10.1f}" if r.t_fm is not None else f"{'censored':>10}"
    ratio = f"{r.ratio:7.1f}" if r.ratio is not None else ""
    print(f"{r.k:>3} {r.n_f:>4} {r.t_fv * 1e3:9.1f} {fm} {ratio}")
print(timing_summary(recs, 50))
