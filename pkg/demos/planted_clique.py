# %% [markdown]
# All-or-nothing recovery of a planted clique
#
# Below p_it the planted k-clique is the only one and recovery is exact;
# above it extra cliques appear and the posterior draw is a guess.

# %%
from sharpthresh import planted

n, k = 25, 5
p_it = planted.p_it_analytic(n, k)
curve = planted.aon_curve(n, k, planted.auto_grid(n, k), trials=200, seed=0, jobs=4)
print(f"p_it = {p_it:.4f}")
for p, s in zip(curve.p_grid, curve.success):
    print(f"p={p:.3f}  p/p_it={p / p_it:.2f}  success={s:.3f}")
print("crosses 0.9 -> 0.1:", curve.crosses())

# %%
for eps in (0.1, 0.3, 0.5):
    print(f"eps={eps}  E[extra k-cliques] <= {planted.first_moment_bound(n, k, eps):.3g}")
