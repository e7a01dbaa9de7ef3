# %% [markdown]
# # Choosing the modulation operating point
#
# The LRU swaps |f0> into |e1> by modulating the transmon flux around its
# sweet spot.  This script walks from the bundled device parameters to the
# modulation frequency, the sideband coupling and the pulse spectrum.

# %%
import numpy as np

from fluxlru import DeviceParams, build_composite, dress_basis
from fluxlru.analytics import damping_regime, parametric_coupling, resonance_modulation_freq
from fluxlru.pulse import (
    FluxPulse,
    calibrate_flux_amplitude,
    flux_trajectory,
    frequency_calculator,
    instantaneous_frequency,
    pulse_modulation_amplitude,
    sideband_spectrum,
)

dev = DeviceParams.qubit_a()
print(dev)

# %% [markdown]
# ## Dressed spectrum
# Diagonalize transmon, readout resonator and Purcell filter together, then
# label each eigenstate by its largest bare component.

# %%
db = dress_basis(build_composite(dev))
w_ge = db.energy(1) - db.energy(0)
w_ef = db.energy(2) - db.energy(1)
print(f"dressed f_ge = {w_ge:.4f} GHz, anharmonicity = {1e3 * (w_ef - w_ge):.1f} MHz")
for lab in [(1, 1, 0), (1, 0, 1), (2, 0, 0)]:
    print(lab, f"{db.energy(*lab) - db.energy(1):.4f} GHz above |e00>")

# %% [markdown]
# ## Resonance condition
# The transmon frequency oscillates at twice the flux frequency, so the
# first sideband of the ef transition meets the resonator when
# `2 omega_m = |omega_ge + alpha - omega_r|`.

# %%
print(f"{resonance_modulation_freq(6.153, -0.154, 7.129):.1f} MHz")

# %% [markdown]
# ## Flux amplitude and coupling
# Solve for the flux amplitude that gives a 128 MHz peak-to-peak excursion
# of f_ge, then evaluate the Bessel-function sideband coupling.

# %%
D = calibrate_flux_amplitude(dev, 128.0, omega_m=564.0)
p = FluxPulse(omega_m=564.0, tau=34.5, sigma=5.0, tau_B=10.0, D=D)
# calibration uses a 40 ns plateau; the shorter one reads back slightly lower
print(f"D = {D:.4f} rad, measured omega_a = {pulse_modulation_amplitude(dev, p):.2f} MHz")
g = parametric_coupling(float(dev.g_qr_c), 128.0, 564.0)
print(f"g = {g:.2f} MHz -> {damping_regime(g, 16.4)}")

# %% [markdown]
# ## Why the edges are smoothed
# A hard-edged pulse leaks spectral weight to the |e0> -> |g1> detuning near
# 979 MHz.  Gaussian filtering of the edges removes it.

# %%
idle = frequency_calculator(dev).transition(0.0, "ef")
for sigma in (0.1, 1.0, 5.0):
    fr = instantaneous_frequency(dev, flux_trajectory(p.with_(sigma=sigma), 0.02), "ef")
    spec = sideband_spectrum(fr, baseline=idle)
    print(f"sigma = {sigma:4.1f} ns: |DFT| at 979 MHz = {np.interp(979.0, spec.freqs, spec.magnitude):.3e}")
