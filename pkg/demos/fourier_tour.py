# %% [markdown]
# p-biased spectra and the Russo-Margulis identity
#
# For a monotone f the derivative of E_p f equals the total influence
# divided by p(1-p). For anything else it is only an upper bound.

# %%
from sharpthresh import fourier, properties

maj = properties.majority(7)
rep = fourier.spectrum(maj, 0.3)
print("E_p f      ", round(rep.expectation, 6))
print("sum fhat^2 ", round(rep.parseval_sum, 6))
print("I_p(f)     ", round(rep.total_influence, 6), "spectral", round(rep.spectral_total_influence, 6))
print("weight by degree", rep.degree_weights.round(4))

# %%
for f in (maj, properties.parity(5), properties.random_function(6, seed=3)):
    rm = fourier.russo_margulis_check(f, 0.3)
    print(f"{f.name:>10}  |d/dp E|={rm.lhs:.4f}  I/(p(1-p))={rm.rhs:.4f}  monotone={rm.monotone}")
