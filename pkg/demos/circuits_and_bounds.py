# %% [markdown]
# Small circuits and the lower-bound calculator
#
# Builds tribes and iterated tribes, the depth-4 estimator for the
# triangle property, and evaluates the depth/size formulas on a measured
# window. Bound values hold only up to unknown universal constants.

# %%
import numpy as np

from sharpthresh import bounds, constructions, properties
from sharpthresh.thresholds import disagreement, window

for c in (constructions.tribes(256), constructions.iterated_tribes(256, 4)):
    print(c)

# %%
n = 30
tri = properties.triangle(n)
grid = [0.05, 0.07, 0.09]
spec = constructions.ConverseSpec(n=n, p_c=0.07, S_blocks=4, q_points=grid,
                                  minimal_element_lists=[constructions.PRESETS["triangle"]] * 3)
est = constructions.converse_estimator(spec)
print(est)
for p in grid:
    print(p, "disagreement", disagreement(est, tri, p, 2000, seed=0).estimate)

# %%
r = window(properties.majority(10001))
b = bounds.BoundInput.from_report(r, d=3)
print("key quantity", round(bounds.key_quantity(b), 2))
print("depth bound ", round(bounds.depth_bound(b).value, 3))
print("log2 size   ", round(bounds.size_bound(b).log2_value, 3))
print("hypotheses  ", b.hypotheses_hold)
