# %% [markdown]
# # Interleaved randomized benchmarking of the LRU
#
# Channel-level simulation: random Clifford sequences in the Pauli-transfer
# picture, with and without the LRU channel interleaved.

# %%
import numpy as np

from fluxlru.analytics import ErrorModel, coherence_limit_error, irb_fit, pure_dephasing, simulate_rb

# %% [markdown]
# ## Coherence budget
# With T1 = 13.4 us and T2* = 10.8 us, a 54.5 ns operation cannot do better
# than the idle-limited error below.

# %%
print(f"T_phi = {pure_dephasing(13.4, 10.8):.2f} us")
print(f"coherence limit = {100 * coherence_limit_error(13.4, 10.8, 54.5):.3f} %")

# %% [markdown]
# ## Planted channel
# Reference Cliffords carry 0.1 % error; the interleaved operation adds 0.25 %.

# %%
model = ErrorModel(p_depol_per_clifford=0.002, interleaved_error=0.0025)
ref = simulate_rb(model, n_seeds=30, rng_seed=1)
inter = simulate_rb(model, n_seeds=30, rng_seed=2, interleaved=True)
for m, a, b in zip(ref.lengths, ref.mean, inter.mean):
    print(f"{m:5d}  {a:.4f}  {b:.4f}")
r = irb_fit(ref, inter)
print(f"interleaved error {100 * r.error_int:.3f} % +- {100 * r.sigma_error_int:.3f} %")
