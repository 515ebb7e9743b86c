# %% [markdown]
# Threshold windows of a few monotone functions
#
# Majority narrows like 1/sqrt(N), tribes like 1/log N, and a dictator not
# at all. Everything here uses closed-form expectations, so it runs in a
# second or two.

# %%
import numpy as np

from sharpthresh import properties
from sharpthresh.thresholds import window, window_scaling_exponent

for f in (properties.dictator(100), properties.majority(1001), properties.tribes(1 << 12)):
    r = window(f, xi=0.25)
    print(f"{f.name:>12}  p_c={r.p_c:.4f}  eps={r.epsilon:.4f}  {r.classification}")

# %%
fit = window_scaling_exponent(properties.majority, [101, 301, 1001, 3001, 10001])
print("majority slope", round(fit.slope, 3))

sizes = [1 << k for k in range(8, 21, 2)]
eps = [window(properties.tribes(N)).epsilon for N in sizes]
print("tribes eps * log2 N", np.round(np.array(eps) * np.log2(sizes), 3))

# %% [markdown]
# The same sweep can be written out and plotted.

# %%
from sharpthresh.plotting import plot_sweep
from sharpthresh.thresholds import read_sweep_csv, sweep, sweep_csv

grid = np.linspace(0.3, 0.7, 21)
rows = [("maj", n, e) for n in (11, 101, 1001) for e in sweep(properties.majority(n), grid)]
svg = plot_sweep(read_sweep_csv(sweep_csv(rows)))
with open("majority_sweep.svg", "wb") as fh:
    fh.write(svg)
