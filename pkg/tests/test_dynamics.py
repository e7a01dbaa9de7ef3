import numpy as np
import pytest

from fluxlru.dynamics import (LandscapeResult, auto_step, dressed_model, evolve, evolve_batch,
                              extract_resonances, final_pf, find_tau_lru, landscape, model_for, populations,
                              track_resonance)
from fluxlru.errors import DimensionError, NoMinimum, OutOfRange
from fluxlru.hilbert import build_composite, dress_basis
from fluxlru.pulse import FluxPulse, calibrate_flux_amplitude


def _diag_weight(traj, column, value=1):
    pops = np.real(np.einsum("tii->ti", traj.rho))
    return (pops * (traj.labels[:, column] == value)).sum(axis=1)


@pytest.fixture(scope="module")
def small_model(small_device):
    return model_for(small_device, None)


@pytest.fixture(scope="module")
def op_pulse(qubit_a):
    D = calibrate_flux_amplitude(qubit_a, 128.0)
    return FluxPulse(omega_m=564.0, tau=34.5, sigma=5.0, tau_B=10.0, D=D)


def test_ground_state_is_stationary(small_device, small_model):
    p = FluxPulse(564, tau=10, D=0.0)
    traj = evolve(None, small_device, p, (0, 0, 0), np.linspace(0, p.duration, 6), model=small_model)
    assert np.allclose(traj.P_g, 1.0, atol=1e-6)


def test_damped_cavity_matches_exponential(small_device):
    dev = small_device.with_(g_qr_c=0.0, J=0.0)
    model = model_for(dev, None)
    kappa = 2 * np.pi * dev.kappa_p * 1e-3
    t_end = 3 / kappa
    p = FluxPulse(564, tau=t_end, sigma=1.0, tau_B=0.0, D=0.0)
    traj = evolve(None, dev, p, (0, 0, 1), [0.0, t_end], model=model)
    n = _diag_weight(traj, 2, 1) + 2 * _diag_weight(traj, 2, 2)
    assert traj.t[-1] == pytest.approx(t_end, abs=traj.h)
    assert n[-1] == pytest.approx(np.exp(-kappa * traj.t[-1]), rel=1e-4)


def test_density_matrix_invariants(small_device, small_model):
    D = calibrate_flux_amplitude(small_device, 128.0)
    p = FluxPulse(564, tau=20, D=D)
    traj = evolve(None, small_device, p, (2, 0, 0), np.linspace(0, p.duration, 9), model=small_model)
    for rho in traj.rho:
        assert abs(np.trace(rho).real - 1) < 1e-8
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
        assert np.linalg.eigvalsh(rho).min() > -1e-8
    assert np.all(traj.P.sum(axis=1) <= 1 + 1e-8)


def test_step_halving_small_model(small_device, small_model):
    D = calibrate_flux_amplitude(small_device, 128.0)
    p = FluxPulse(564, tau=15, D=D)
    h = auto_step(small_model, p)
    a = final_pf(small_model, [p], h=h)[0]
    b = final_pf(small_model, [p], h=h / 2)[0]
    assert abs(a - b) < 1e-6


def test_closed_decoupled_energy_conservation(small_device):
    dev = small_device.with_(kappa_p=0.0)
    parts = build_composite(dev)
    model = dressed_model(parts, max_excitation=None)
    psi = (model.vectors[:, model.index((0, 0, 0))] + model.vectors[:, model.index((1, 1, 0))]) / np.sqrt(2)
    rho0 = np.outer(psi, psi.conj())
    traj = evolve(parts, dev, FluxPulse(564, tau=20, D=0.0), rho0, np.linspace(0, 40, 9), model=model)
    energy = np.real(np.einsum("tii,i->t", traj.rho, model.energies))
    assert np.max(np.abs(energy - energy[0])) < 1e-8 * abs(energy[0])


def test_counter_rotating_photon_number_bound(small_device):
    dev = small_device.with_(g_qr_c=0.0, kappa_p=0.0)
    parts = build_composite(dev)
    model = dressed_model(parts, max_excitation=None)
    nt, nr, nf = parts.dims
    N = (np.kron(np.kron(np.eye(nt), np.diag(np.arange(nr))), np.eye(nf))
         + np.kron(np.kron(np.eye(nt), np.eye(nr)), np.diag(np.arange(nf))))
    N_d = model.vectors.conj().T @ N @ model.vectors
    bare = np.zeros(parts.dim)
    bare[1 * nf + 0] = 1.0  # |0, 1, 0>
    traj = evolve(parts, dev, FluxPulse(564, tau=30, D=0.0), np.outer(bare, bare), np.linspace(0, 50, 201),
                  model=model)
    n = np.real(np.einsum("tij,ji->t", traj.rho, N_d))
    bound = (dev.J * 1e-3 / (dev.omega_r_bare + dev.omega_p)) ** 2
    assert np.ptp(n) / 2 < 1e-3
    assert np.ptp(n) / 2 < 10 * bound


def test_populations_projectors(qubit_a):
    parts = build_composite(qubit_a)
    db = dress_basis(parts)
    v = db.state(1, 1, 0)
    P = populations(np.outer(v, v.conj()), db)
    assert P[1] == pytest.approx(1.0, abs=1e-12)
    rho = np.eye(parts.dim) / parts.dim
    P = populations(rho, db)
    assert np.allclose(P, 1 / 6, atol=1e-12)
    with pytest.raises(DimensionError):
        populations(np.eye(5), db)


def test_initial_state_checks(small_device, small_model):
    p = FluxPulse(564, tau=5, D=0.0)
    with pytest.raises(DimensionError):
        evolve(None, small_device, p, np.eye(3), model=small_model)
    truncated = model_for(small_device, 2)
    full = np.zeros((truncated.vectors.shape[0],) * 2)
    full[-1, -1] = 1.0
    with pytest.raises(DimensionError):
        evolve(None, small_device, p, full, model=truncated)


def test_flux_beyond_branch(small_device, small_model):
    with pytest.raises(OutOfRange):
        evolve(None, small_device, FluxPulse(564, tau=30, D=1.7), (0, 0, 0), model=small_model)


def test_batch_matches_single_and_reproducible(small_device, small_model):
    D = calibrate_flux_amplitude(small_device, 128.0)
    pulses = [FluxPulse(564, tau=t, D=D) for t in (6.0, 12.0)]
    h = auto_step(small_model, pulses)
    batch = final_pf(small_model, pulses, h=h)
    single = [final_pf(small_model, [p], h=h)[0] for p in pulses]
    assert np.allclose(batch, single, atol=1e-13)
    assert np.array_equal(batch, final_pf(small_model, pulses, h=h))


def test_out_times_snapped(small_device, small_model):
    p = FluxPulse(564, tau=5, D=0.0)
    tr = evolve_batch(small_model, [p], (0, 0, 0), [[0.0, 3.3, p.duration]])[0]
    assert tr.t[0] == 0.0 and tr.t[-1] == pytest.approx(p.duration, abs=tr.h)
    assert len(tr.t) == 3


def test_overdamped_has_no_minimum(small_device):
    model = model_for(small_device)
    p = FluxPulse(564, tau=10, D=0.0)
    with pytest.raises(NoMinimum):
        find_tau_lru(small_device, p, scan=(4, 20), step=4, model=model)


def test_pair_conservation_early_in_pulse(qubit_a, op_pulse):
    traj = evolve(None, qubit_a, op_pulse.with_(tau=30.0), (2, 0, 0), [0.0, 18.0])
    assert traj.P_f[-1] < 0.9  # exchange has started
    assert traj.P_e[-1] + traj.P_f[-1] == pytest.approx(1.0, abs=0.02)


def test_track_resonance_slope(qubit_a):
    wm_lo, _ = track_resonance(qubit_a, 108.0)
    wm_hi, _ = track_resonance(qubit_a, 148.0)
    assert track_resonance(qubit_a, 128.0)[0] == pytest.approx(564.0)
    assert (wm_hi - wm_lo) / 40.0 == pytest.approx(0.5, abs=0.1)


def _planted(slope=0.5, intercept=500.0):
    wm = np.linspace(520, 600, 81)
    wa = np.linspace(60, 140, 9)
    center = slope * wa + intercept
    Pf = 1 - 0.95 * np.exp(-((wm[:, None] - center[None, :]) / 4.0) ** 2)
    return LandscapeResult(wm, wa / 100, wa, wa, Pf, 100.0)


def test_extract_planted_slope():
    res = extract_resonances(_planted())
    assert len(res) == 1
    assert res[0].slope == pytest.approx(0.5, abs=0.02)
    assert res[0].omega_m_at(100.0) == pytest.approx(550.0, abs=1.0)


def test_extract_flat_landscape():
    r = _planted()
    flat = LandscapeResult(r.omega_m_axis, r.D, r.omega_a, r.omega_a_linear, np.ones_like(r.Pf), 100.0)
    assert extract_resonances(flat) == []


def test_landscape_small_grid(small_device):
    res = landscape(small_device, [560.0, 570.0], [100.0, 128.0], fixed_duration=40.0, max_excitation=3)
    assert res.Pf.shape == (2, 2)
    assert np.all((res.Pf >= 0) & (res.Pf <= 1 + 1e-8))
    assert res.omega_a_linear[1] == pytest.approx(128.0)
