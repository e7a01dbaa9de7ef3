"""Master-equation dynamics of the flux-modulated transmon, LRU duration scans and calibration landscapes.

The state is propagated in the dressed eigenbasis of the static Hamiltonian,
restricted to dressed states with at most ``max_excitation`` quanta in total
(transmon level plus both photon labels).  The static part is integrated
exactly through the interaction picture; the flux drive and the filter
dissipator are stepped with classical fixed-step RK4 (no rotating-wave
approximation anywhere).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionError, NoMinimum, OutOfRange, StepInstability
from .hilbert import build_composite, delta_ej, dress_basis
from .pulse import (FluxPulse, calibrate_flux_amplitude, flux_trajectory, instantaneous_frequency)

TWO_PI = 2.0 * np.pi
LEVELS = ("g", "e", "f")


@dataclass(frozen=True)
class DressedModel:
    """Operators of the truncated dressed-basis model (frequencies in GHz)."""

    labels: np.ndarray  # (n, 3)
    energies: np.ndarray
    drive: np.ndarray  # cos(phi_t) in the kept dressed states
    collapse: np.ndarray  # filter annihilation operator in the kept dressed states
    vectors: np.ndarray  # kept dressed eigenvectors as columns in the bare basis
    kappa: float  # rad/ns
    E_J_max: float
    d: float

    @property
    def dim(self):
        return len(self.energies)

    def index(self, label):
        hits = np.flatnonzero((self.labels == np.asarray(label)).all(axis=1))
        if len(hits) == 0:
            raise KeyError(f"state {label} not in the kept subspace")
        return int(hits[0])

    def pure(self, label):
        rho = np.zeros((self.dim, self.dim), complex)
        k = self.index(label)
        rho[k, k] = 1.0
        return rho


def dressed_model(parts, dressed=None, max_excitation=4):
    if dressed is None:
        dressed = dress_basis(parts)
    if max_excitation is None:
        keep = np.arange(len(dressed.energies))
    else:
        keep = np.flatnonzero(dressed.labels.sum(axis=1) <= max_excitation)
    keep = keep[np.argsort(dressed.energies[keep], kind="stable")]
    U = dressed.vectors[:, keep]
    drive = U.conj().T @ parts.drive_op @ U
    collapse = U.conj().T @ parts.collapse_op @ U
    dev = parts.device
    return DressedModel(
        labels=dressed.labels[keep],
        energies=dressed.energies[keep],
        drive=0.5 * (drive + drive.conj().T),
        collapse=collapse,
        vectors=U,
        kappa=TWO_PI * dev.kappa_p * 1e-3,
        E_J_max=dev.E_J_max,
        d=dev.d,
    )


@lru_cache(maxsize=8)
def _cached_model(device, max_excitation):
    parts = build_composite(device)
    return parts, dressed_model(parts, max_excitation=max_excitation)


def model_for(device, max_excitation=4):
    return _cached_model(device, max_excitation)[1]


@dataclass
class Trajectory:
    t: np.ndarray
    rho: np.ndarray  # (n_t, n, n) in the kept dressed basis
    P: np.ndarray  # (n_t, 3) transmon populations g, e, f
    labels: np.ndarray
    h: float
    meta: dict = field(default_factory=dict)

    @property
    def P_g(self):
        return self.P[:, 0]

    @property
    def P_e(self):
        return self.P[:, 1]

    @property
    def P_f(self):
        return self.P[:, 2]

    def to_csv(self, path):
        from .pulse import write_columns

        write_columns(path, ["t (ns)", "P_g", "P_e", "P_f"], [self.t, *self.P.T])


def transmon_populations(rho, labels, levels=3):
    diag = np.real(np.einsum("...ii->...i", rho))
    return np.stack([diag[..., labels[:, 0] == i].sum(axis=-1) for i in range(levels)], axis=-1)


def populations(trajectory, dressed=None):
    """Transmon populations P_g, P_e, P_f, tracing over both bosonic modes.

    ``trajectory`` may be a Trajectory or a density matrix; a density matrix on
    the full composite space is first rotated into the dressed basis.
    """
    if isinstance(trajectory, Trajectory):
        return transmon_populations(trajectory.rho, trajectory.labels)
    rho = np.asarray(trajectory)
    if dressed is None:
        raise DimensionError("a dressed basis is needed for a bare density matrix")
    n = dressed.vectors.shape[0]
    if rho.shape[-2:] != (n, n):
        raise DimensionError(f"density matrix shape {rho.shape} does not match dimension {n}")
    U = dressed.vectors
    rho_d = U.conj().T @ rho @ U
    return transmon_populations(rho_d, dressed.labels)


def _initial_state(model, rho0):
    if isinstance(rho0, (tuple, list)) and len(rho0) == 3 and np.isscalar(rho0[0]):
        return model.pure(tuple(rho0))
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape == (model.dim, model.dim):
        return rho0.copy()
    n_bare = model.vectors.shape[0]
    if rho0.shape == (n_bare, n_bare):
        U = model.vectors
        out = U.conj().T @ rho0 @ U
        if abs(np.trace(out).real - np.trace(rho0).real) > 1e-8:
            raise DimensionError("initial state has weight outside the kept dressed subspace")
        return out
    raise DimensionError(f"initial state of shape {rho0.shape} does not match model dimension {model.dim}")


def drive_norm(model):
    """Half the spectral width of the drive operator (its identity part commutes with everything)."""
    ev = np.linalg.eigvalsh(model.drive)
    return 0.5 * (ev[-1] - ev[0])


# RK4 stability would allow 0.05.  At 0.0125 step halving already changes P_f by < 1e-6, but
# the smallest eigenvalue of rho (an almost empty level-4 state) only stays above -1e-8 at 0.00625.
DEFAULT_SAFETY = 0.00625


def auto_step(model, pulse, safety=DEFAULT_SAFETY):
    """Largest step with ``h * (|drive| + kappa) <= safety`` that also resolves the flux grid."""
    pulses = pulse if isinstance(pulse, (list, tuple)) else [pulse]
    h = np.inf
    for p in pulses:
        phi_max = abs(p.D) + abs(p.phi_DC)
        dej = TWO_PI * delta_ej(min(phi_max, np.pi / 2), model.E_J_max, model.d)
        rate = dej * drive_norm(model) + model.kappa
        if rate > 0:
            h = min(h, safety / rate)
        h = min(h, p.default_dt)
    return h


def parity_blocks(model, rho, tol=1e-12):
    """Split the kept states into the two total-parity sectors when that is exact.

    The static Hamiltonian and the drive conserve transmon-plus-photon parity
    and the filter jump flips it, so a state without inter-sector coherence
    stays block diagonal.  Falls back to a single block otherwise.
    """
    par = model.labels.sum(axis=1) % 2
    blocks = [np.flatnonzero(par == p) for p in (0, 1)]
    blocks = [b for b in blocks if len(b)]
    single = [np.arange(model.dim)]
    if len(blocks) < 2:
        return single
    same = par[:, None] == par[None, :]
    scale = max(np.max(np.abs(model.drive)), np.max(np.abs(model.collapse)), 1.0)
    if (np.max(np.abs(model.drive[~same]), initial=0) > tol * scale
            or np.max(np.abs(model.collapse[same]), initial=0) > tol * scale
            or np.max(np.abs(rho[..., ~same]), initial=0) > tol):
        return single
    return blocks


def _propagate(model, dej_q, rho, h, record):
    """Batched integrating-factor RK4.

    ``dej_q`` holds 2 pi dE_J on the quarter-step grid, shape (B, 4 n + 1);
    ``rho`` is (B, n, n); ``record`` is (B, n_out) step indices.  Returns the
    snapshots, shape (B, n_out, n, n).

    The diagonal of H(t) (static energies plus the diagonal drive) is
    integrated exactly; RK4 only sees the off-diagonal drive and the
    dissipator in the interaction picture.
    """
    B, n_q = dej_q.shape
    n_steps = (n_q - 1) // 4
    dej = dej_q[:, ::2]
    area = np.zeros((B, 2 * n_steps + 1))
    area[:, 1:] = np.cumsum((h / 12.0) * (dej_q[:, :-2:2] + 4 * dej_q[:, 1:-1:2] + dej_q[:, 2::2]),
                            axis=1)

    blocks = parity_blocks(model, rho)
    nb = len(blocks)
    V = model.drive
    v_diag = np.real(np.diagonal(V)).copy()
    V_off = V - np.diag(v_diag)
    C = model.collapse
    N = C.conj().T @ C
    kappa = model.kappa
    omega = TWO_PI * model.energies
    Vb = [V_off[np.ix_(b, b)] for b in blocks]
    Nb = [-0.5 * kappa * N[np.ix_(b, b)] for b in blocks]
    # jump terms C_pq rho_q C_pq^dag feeding block p from block q
    jumps = []
    if kappa:
        for p, bp in enumerate(blocks):
            for q, bq in enumerate(blocks):
                Cpq = C[np.ix_(bp, bq)]
                if np.any(Cpq):
                    jumps.append((p, q, np.sqrt(kappa) * Cpq, np.sqrt(kappa) * Cpq.conj().T))

    def phase(j):
        u = np.exp(1j * (omega[None, :] * (0.5 * h * j) + v_diag[None, :] * area[:, j, None]))
        out = []
        for b in blocks:
            ub = u[:, b]
            out.append(ub[:, :, None] * ub.conj()[:, None, :])
        return out

    def rhs(rt, ph, amp):
        r = [rt[p] * ph[p].conj() for p in range(nb)]
        out = []
        for p in range(nb):
            M = (-1j * amp[:, None, None]) * Vb[p] + Nb[p]
            x = M @ r[p]
            out.append(x + np.conj(np.swapaxes(x, 1, 2)))
        for p, q, Cpq, Cpq_d in jumps:
            out[p] += (Cpq @ r[q]) @ Cpq_d
        return [out[p] * ph[p] for p in range(nb)]

    def axpy(a, x, y):
        return [xi + a * yi for xi, yi in zip(x, y)]

    n_out = record.shape[1]
    snaps = np.zeros((B, n_out, model.dim, model.dim), complex)
    wanted = {}
    for b in range(B):
        for pos, k in enumerate(record[b]):
            wanted.setdefault(int(k), []).append((b, pos))
    for b, pos in wanted.get(0, []):
        snaps[b, pos] = rho[b]

    rt = [rho[:, b][:, :, b].copy() for b in blocks]  # equals rho at t = 0
    last = int(record.max())
    ph0 = phase(0)
    for k in range(last):
        ph_mid = phase(2 * k + 1)
        ph1 = phase(2 * k + 2)
        a0, am, a1 = dej[:, 2 * k], dej[:, 2 * k + 1], dej[:, 2 * k + 2]
        k1 = rhs(rt, ph0, a0)
        k2 = rhs(axpy(0.5 * h, rt, k1), ph_mid, am)
        k3 = rhs(axpy(0.5 * h, rt, k2), ph_mid, am)
        k4 = rhs(axpy(h, rt, k3), ph1, a1)
        rt = [r + (h / 6.0) * (s1 + 2 * s2 + 2 * s3 + s4) for r, s1, s2, s3, s4 in zip(rt, k1, k2, k3, k4)]
        ph0 = ph1
        for b, pos in wanted.get(k + 1, ()):
            for p, idx in enumerate(blocks):
                snaps[b, pos][np.ix_(idx, idx)] = rt[p][b] * ph1[p][b].conj()
    return snaps


def _check_trace(snaps, rho0, times, tol):
    tr = np.real(np.einsum("...ii->...", snaps))
    tr0 = np.real(np.einsum("...ii->...", rho0))[..., None]
    bad = ~np.isfinite(tr) | (np.abs(tr - tr0) > tol)
    if np.any(bad):
        b, pos = np.argwhere(bad)[0]
        raise StepInstability(f"trace drifted to {tr[b, pos]:.3e} at t={times[b, pos]:.3f} ns")


def evolve_batch(model, pulses, rho0, out_times, h=None, trace_tol=1e-6):
    """Propagate several pulses on one common step grid.

    ``out_times`` is a sequence (one array per pulse) of output times.  All
    pulses share the step ``h``; output times are snapped to the nearest step.
    Returns one Trajectory per pulse.
    """
    pulses = list(pulses)
    out_times = [np.atleast_1d(np.asarray(o, dtype=float)) for o in out_times]
    if len(out_times) != len(pulses):
        raise ValueError("need one output-time array per pulse")
    rho = _initial_state(model, rho0)
    T = max(float(o.max()) for o in out_times)
    h_max = auto_step(model, pulses) if h is None else h
    n_steps = max(int(np.ceil(T / h_max - 1e-9)), 1)
    h = T / n_steps
    n_out = max(len(o) for o in out_times)
    record = np.zeros((len(pulses), n_out), int)
    for b, o in enumerate(out_times):
        idx = np.clip(np.rint(o / h).astype(int), 0, n_steps)
        record[b, : len(idx)] = idx
        record[b, len(idx):] = idx[-1]
    quarter = np.arange(4 * n_steps + 1) * (0.25 * h)
    dej_q = np.empty((len(pulses), len(quarter)))
    for b, p in enumerate(pulses):
        phi = p.flux(quarter)
        if np.any(np.abs(phi) >= np.pi / 2):
            raise OutOfRange("flux leaves the sweet-spot branch (|phi| >= pi/2)")
        dej_q[b] = TWO_PI * delta_ej(phi, model.E_J_max, model.d)
    rho_b = np.broadcast_to(rho, (len(pulses),) + rho.shape).copy()
    snaps = _propagate(model, dej_q, rho_b, h, record)
    _check_trace(snaps, rho_b, record * h, trace_tol)
    out = []
    for b, o in enumerate(out_times):
        s = snaps[b, : len(o)]
        out.append(Trajectory(record[b, : len(o)] * h, s, transmon_populations(s, model.labels),
                              model.labels, h, meta={"n_steps": int(record[b].max()), "dim": model.dim}))
    return out


def evolve(parts, device, pulse, rho0, out_times=None, *, model=None, max_excitation=4,
           h=None, trace_tol=1e-6):
    """Integrate the Lindblad equation with filter decay under a flux pulse.

    Parameters
    ----------
    parts : HamiltonianParts or None
        Composite operators; built from ``device`` when None.
    device : DeviceParams
    pulse : FluxPulse
    rho0 : tuple or ndarray
        Dressed label such as ``(2, 0, 0)``, or a density matrix on either the
        kept dressed subspace or the full composite space.
    out_times : array_like, optional
        Output times in ns, snapped to the step grid.  Defaults to the start
        and end of the pulse.
    max_excitation : int or None
        Keep dressed states whose labels sum to at most this value (None keeps all).
    h : float, optional
        Fixed RK4 step in ns; chosen by `auto_step` when omitted.

    Returns
    -------
    Trajectory

    Notes
    -----
    No trace renormalization is applied.  A drift beyond ``trace_tol`` raises
    StepInstability.
    """
    if model is None:
        model = dressed_model(parts, max_excitation=max_excitation) if parts is not None \
            else model_for(device, max_excitation)
    if out_times is None:
        out_times = np.array([0.0, pulse.duration])
    return evolve_batch(model, [pulse], rho0, [out_times], h=h, trace_tol=trace_tol)[0]


def final_pf(model, pulses, rho0=(2, 0, 0), h=None):
    """|f> population at the end of each pulse (batched)."""
    trajs = evolve_batch(model, pulses, rho0, [[p.duration] for p in pulses], h=h)
    return np.array([tr.P_f[-1] for tr in trajs])


@dataclass(frozen=True)
class LruResult:
    tau_lru: float  # plateau duration at the first minimum, ns
    total_duration: float  # including both buffers, ns
    Pf_min: float
    g_fit: float = None  # MHz
    scan_tau: np.ndarray = None
    scan_Pf: np.ndarray = None

    def __post_init__(self):
        if not self.tau_lru > 0 or self.Pf_min < -1e-12:
            raise ValueError("invalid LRU result")


def find_tau_lru(device, pulse_template, rho0=(2, 0, 0), scan=(4.0, 60.0), step=2.0, tol=0.25,
                 *, model=None, h=None, max_excitation=4):
    """Shortest plateau duration that minimizes the final |f> population.

    A coarse scan (``step`` ns) locates the first local minimum, which is then
    refined by golden-section search to a bracket of ``tol`` ns.
    """
    if model is None:
        model = model_for(device, max_excitation)
    taus = np.arange(scan[0], scan[1] + 1e-9, step)
    if len(taus) < 3:
        raise ValueError("scan needs at least three durations")
    h = auto_step(model, pulse_template) if h is None else h
    pf = final_pf(model, [pulse_template.with_(tau=t) for t in taus], rho0, h)
    first = None
    for i in range(1, len(taus) - 1):
        if pf[i] < pf[i - 1] and pf[i] <= pf[i + 1]:
            first = i
            break
    if first is None:
        raise NoMinimum("final P_f is monotone over the scanned durations")

    def cost(t):
        return final_pf(model, [pulse_template.with_(tau=t)], rho0, h)[0]

    invphi = (np.sqrt(5.0) - 1) / 2
    a, b = taus[first - 1], taus[first + 1]
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = cost(c), cost(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = cost(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = cost(d)
    cands = [(pf[first], taus[first]), (fc, c), (fd, d)]
    pf_min, tau = min(cands)
    return LruResult(float(tau), float(tau + 2 * pulse_template.tau_B), float(max(pf_min, 0.0)),
                     None, taus, pf)


def mean_ef_frequency(device, omega_a, omega_m=564.0, sigma=5.0, tau=40.0):
    """Plateau-averaged dressed ef frequency (GHz) under modulation of amplitude ``omega_a``."""
    D = calibrate_flux_amplitude(device, omega_a, omega_m=omega_m, sigma=sigma, tau=tau)
    p = FluxPulse(omega_m=omega_m, tau=tau, sigma=sigma, D=D)
    _, vals = instantaneous_frequency(device, flux_trajectory(p), "ef").window(*p.plateau_window)
    return float(np.mean(vals)), D


def track_resonance(device, omega_a, anchor=(564.0, 128.0), sigma=5.0):
    """Follow a first-harmonic resonance chain from ``anchor`` = (omega_m, omega_a) to a new amplitude.

    The sideband condition fixes ``2 omega_m + mean(omega_ef)``, so the chain
    moves by half the change of the averaged ef frequency.  Returns (omega_m, D).
    """
    wm0, wa0 = anchor
    ref, _ = mean_ef_frequency(device, wa0, wm0, sigma)
    wm = wm0
    for _ in range(3):
        cur, D = mean_ef_frequency(device, omega_a, wm, sigma)
        wm = wm0 + 0.5e3 * (ref - cur)
    return float(wm), float(D)


@dataclass(frozen=True)
class LandscapeResult:
    omega_m_axis: np.ndarray  # MHz
    D: np.ndarray  # flux amplitude per column
    omega_a: np.ndarray  # calibrated modulation amplitude per column, MHz
    omega_a_linear: np.ndarray  # single-reference linear rescaling, MHz
    Pf: np.ndarray  # (n_omega_m, n_amplitude)
    duration: float

    def __post_init__(self):
        if self.Pf.shape != (len(self.omega_m_axis), len(self.D)):
            raise DimensionError("Pf shape does not match the axes")

    def to_csv(self, path):
        from .pulse import write_columns

        mm, jj = np.meshgrid(np.arange(len(self.omega_m_axis)), np.arange(len(self.D)), indexing="ij")
        mm, jj = mm.ravel(), jj.ravel()
        write_columns(path, ["omega_m (MHz)", "D (rad)", "omega_a (MHz)", "omega_a_linear (MHz)", "P_f"],
                      [self.omega_m_axis[mm], self.D[jj], self.omega_a[jj], self.omega_a_linear[jj],
                       self.Pf.ravel()])


def _landscape_chunk(args):
    device, max_excitation, pulses, rho0, h = args
    model = model_for(device, max_excitation)
    return final_pf(model, pulses, rho0, h)


def amplitude_axis(device, omega_a, omega_m_ref=564.0, sigma=5.0, ref_index=None):
    """Flux amplitudes for target modulation amplitudes plus the linearly rescaled axis.

    Each column is calibrated exactly.  ``omega_a_linear`` instead takes the
    column ``ref_index`` (default: the middle one) as the only calibration point
    and scales the others by their flux amplitude.
    """
    omega_a = np.asarray(omega_a, dtype=float)
    D = np.array([calibrate_flux_amplitude(device, w, omega_m=omega_m_ref, sigma=sigma) for w in omega_a])
    ref = len(D) // 2 if ref_index is None else ref_index
    linear = omega_a[ref] * D / D[ref] if D[ref] > 0 else omega_a.copy()
    return D, linear


def landscape(device, omega_m_grid, omega_a_grid, fixed_duration=100.0, rho0=(2, 0, 0), *, sigma=5.0,
              tau_B=None, omega_m_ref=564.0, workers=1, h=None, max_excitation=4):
    """Final |f> population on an (omega_m, omega_a) grid after a pulse of fixed total duration."""
    omega_m_grid = np.asarray(omega_m_grid, dtype=float)
    omega_a_grid = np.asarray(omega_a_grid, dtype=float)
    tau_B = 2 * sigma if tau_B is None else tau_B
    tau = fixed_duration - 2 * tau_B
    D, linear = amplitude_axis(device, omega_a_grid, omega_m_ref, sigma)
    pulses = [FluxPulse(omega_m=wm, tau=tau, sigma=sigma, tau_B=tau_B, D=d)
              for wm in omega_m_grid for d in D]
    model = model_for(device, max_excitation)
    if h is None:
        h = auto_step(model, pulses)
    workers = max(int(workers), 1)
    chunks = np.array_split(np.arange(len(pulses)), workers)
    tasks = [(device, max_excitation, [pulses[i] for i in c], rho0, h) for c in chunks if len(c)]
    pf = np.empty(len(pulses))
    if workers == 1:
        results = [_landscape_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_landscape_chunk, tasks))
    for c, r in zip([c for c in chunks if len(c)], results):
        pf[c] = r
    Pf = pf.reshape(len(omega_m_grid), len(D))
    return LandscapeResult(omega_m_grid, D, omega_a_grid.copy(), linear, Pf, float(fixed_duration))


@dataclass(frozen=True)
class Resonance:
    slope: float  # d omega_m / d omega_a
    intercept: float  # MHz
    depth: float  # lowest P_f on the chain
    points: np.ndarray  # (k, 2): omega_a, omega_m

    def omega_m_at(self, omega_a):
        return self.slope * omega_a + self.intercept


def _row_minima(x, y, threshold):
    out = []
    for i in range(1, len(y) - 1):
        if y[i] < threshold and y[i] < y[i - 1] and y[i] <= y[i + 1]:
            # parabola through the three neighbours
            denom = y[i - 1] - 2 * y[i] + y[i + 1]
            shift = 0.5 * (y[i - 1] - y[i + 1]) / denom if denom > 0 else 0.0
            out.append((x[i] + shift * (x[i + 1] - x[i]), y[i]))
    return out


def extract_resonances(result, threshold=0.5, max_jump=None, min_points=2, axis="omega_a"):
    """Chain the P_f minima of each amplitude column into straight resonance lines.

    Returns a list of Resonance, longest chain first and deeper first among
    equal lengths.  Two-point chains on a fringed landscape are often
    artifacts, so length outranks depth.
    """
    x = np.asarray(result.omega_m_axis, dtype=float)
    amp = np.asarray(getattr(result, axis), dtype=float)
    Pf = np.asarray(result.Pf)
    if Pf.shape[1] < 2:
        raise DimensionError("need at least two amplitude columns")
    if max_jump is None:
        # chains with slope up to ~0.75 move this far between neighbouring columns
        max_jump = 3.0 * np.min(np.diff(x)) + 0.75 * np.min(np.diff(np.sort(amp)))
    chains = []
    for j in np.argsort(amp, kind="stable"):
        mins = _row_minima(x, Pf[:, j], threshold)
        taken = set()
        for wm, depth in sorted(mins, key=lambda m: m[1]):
            best, dist = None, max_jump
            for c_idx, chain in enumerate(chains):
                if c_idx in taken or chain[-1][0] == amp[j]:
                    continue
                d = abs(chain[-1][1] - wm)
                if d <= dist:
                    best, dist = c_idx, d
            if best is None:
                chains.append([(amp[j], wm, depth)])
                taken.add(len(chains) - 1)
            else:
                chains[best].append((amp[j], wm, depth))
                taken.add(best)
    out = []
    for chain in chains:
        if len(chain) < min_points:
            continue
        pts = np.array(chain)
        slope, intercept = np.polyfit(pts[:, 0], pts[:, 1], 1)
        out.append(Resonance(float(slope), float(intercept), float(pts[:, 2].min()), pts[:, :2]))
    out.sort(key=lambda r: (-len(r.points), r.depth))
    return out


def doublet_separation(resonances, omega_a):
    """omega_m spacing (MHz) between the two leading chains at a given omega_a."""
    if len(resonances) < 2:
        raise ValueError("need two resonance chains")
    a, b = resonances[:2]
    return abs(a.omega_m_at(omega_a) - b.omega_m_at(omega_a))
