# %% [markdown]
# # Depleting |f> with a flux pulse
#
# Integrate the master equation of the transmon-resonator-filter system from
# the dressed |f00> state and look for the shortest pulse that empties |f>.
# Runs for several minutes on one core.

# %%
import numpy as np

from fluxlru import DeviceParams, FluxPulse, calibrate_flux_amplitude
from fluxlru.dynamics import evolve, find_tau_lru, model_for, track_resonance

dev = DeviceParams.qubit_a()
model = model_for(dev)
D = calibrate_flux_amplitude(dev, 128.0, omega_m=564.0)
template = FluxPulse(omega_m=564.0, tau=34.5, sigma=5.0, tau_B=10.0, D=D)

# %% [markdown]
# ## Populations during one pulse
# |f0> exchanges with |e1>; the photon leaks out through the filter, so
# P_e grows while P_f falls.

# %%
traj = evolve(None, dev, template, (2, 0, 0), np.arange(0, template.duration + 1e-9, 5.0), model=model)
for t, (pg, pe, pf) in zip(traj.t, traj.P):
    print(f"t = {t:5.1f} ns  P_g = {pg:.4f}  P_e = {pe:.4f}  P_f = {pf:.2e}")

# %% [markdown]
# ## Plateau duration scan

# %%
res = find_tau_lru(dev, template, scan=(10.0, 60.0), step=2.0, model=model)
print(f"tau_LRU = {res.tau_lru:.2f} ns, total {res.total_duration:.2f} ns, P_f = {res.Pf_min:.2e}")
for t, pf in zip(res.scan_tau, res.scan_Pf):
    print(f"{t:5.1f}  {pf:.3e}")

# %% [markdown]
# ## Stronger modulation, faster swap
# Follow the resonance to other amplitudes and repeat the scan.

# %%
for wa in (96.0, 144.0):
    wm, Dw = track_resonance(dev, wa)
    r = find_tau_lru(dev, template.with_(omega_m=wm, D=Dw), scan=(10.0, 76.0), model=model)
    print(f"omega_a = {wa:.0f} MHz, omega_m = {wm:.1f} MHz: tau_LRU = {r.tau_lru:.1f} ns")
