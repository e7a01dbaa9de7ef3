"""Gaussian-filtered parametric flux pulses, instantaneous qubit frequencies and sideband spectra.

Times are in ns, modulation frequencies in MHz, qubit frequencies in GHz and
flux in reduced units (radians, ``pi * Phi / Phi_0``).
"""

import csv
import threading
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh
from scipy.special import erf

from .errors import OutOfRange, StepTooLarge, WindowEmpty
from .hilbert import build_composite, delta_ej, dress_basis

# reduced-flux amplitude that gives omega_a ~ 128 MHz at 564 MHz for qubit A
D_NOMINAL = 2 * 0.34


@dataclass(frozen=True)
class FluxPulse:
    """Parametric modulation pulse with erf rise and fall.

    ``D`` is the reduced-flux amplitude reached on the plateau (the flux is
    ``D / V_a`` times the voltage), so the flux does not depend on ``V_a``.
    """

    omega_m: float  # MHz
    tau: float  # plateau duration, ns
    sigma: float = 5.0
    tau_B: float = None
    D: float = D_NOMINAL
    V_a: float = 1.0
    phi_DC: float = 0.0

    def __post_init__(self):
        if self.tau_B is None:
            object.__setattr__(self, "tau_B", 2.0 * self.sigma)
        if self.sigma <= 0 or self.omega_m <= 0:
            raise ValueError("sigma and omega_m must be positive")
        if self.tau < 0 or self.tau_B < 0:
            raise ValueError("durations must be non-negative")

    @property
    def duration(self):
        return self.tau + 2.0 * self.tau_B

    @property
    def omega_m_rad(self):
        """Modulation frequency in rad/ns."""
        return 2e-3 * np.pi * self.omega_m

    @property
    def default_dt(self):
        return 1.0 / (40.0 * self.omega_m * 1e-3)

    @property
    def plateau_window(self):
        return (self.tau_B + 2 * self.sigma, self.tau_B + self.tau - 2 * self.sigma)

    def with_(self, **changes):
        return replace(self, **changes)

    def bracket(self, t):
        """erf((t - tau_B)/(sqrt2 sigma)) - erf((t - tau_B - tau)/(sqrt2 sigma))."""
        t = np.asarray(t, dtype=float)
        s = np.sqrt(2.0) * self.sigma
        return erf((t - self.tau_B) / s) - erf((t - self.tau_B - self.tau) / s)

    def voltage(self, t):
        t = np.asarray(t, dtype=float)
        return 0.5 * self.V_a * np.cos(self.omega_m_rad * t) * self.bracket(t)

    def flux(self, t):
        t = np.asarray(t, dtype=float)
        return 0.5 * self.D * np.cos(self.omega_m_rad * t) * self.bracket(t) + self.phi_DC


@dataclass(frozen=True)
class SampledSignal:
    t: np.ndarray
    values: np.ndarray
    dt: float
    name: str = "value"
    unit: str = ""

    def __post_init__(self):
        if len(self.t) != len(self.values):
            raise ValueError("time grid and values differ in length")

    def window(self, start, stop):
        mask = (self.t >= start - 1e-9) & (self.t <= stop + 1e-9)
        return self.t[mask], self.values[mask]

    def to_csv(self, path):
        write_columns(path, [f"t (ns)", f"{self.name} ({self.unit})" if self.unit else self.name],
                      [self.t, self.values])


def write_columns(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(x)) for x in row])


def read_columns(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    return rows[0], data.T


def time_grid(duration, dt):
    n = int(np.floor(duration / dt + 1e-9))
    return np.arange(n + 1) * dt


def _check_dt(pulse, dt):
    if dt > 1.0 / (20.0 * pulse.omega_m * 1e-3) * (1 + 1e-12):
        raise StepTooLarge(
            f"dt={dt} ns does not resolve the {pulse.omega_m} MHz carrier (need <= 1/(20 f_m))")


def voltage_envelope(pulse, dt=None):
    """Sample the voltage waveform on [0, tau + 2 tau_B]."""
    dt = pulse.default_dt if dt is None else dt
    _check_dt(pulse, dt)
    t = time_grid(pulse.duration, dt)
    return SampledSignal(t, pulse.voltage(t), dt, "v", "V_a units")


def flux_trajectory(pulse, dt=None, transfer=None):
    """Reduced flux at the SQUID; ``transfer`` is an optional flux-line response (identity by default)."""
    dt = pulse.default_dt if dt is None else dt
    _check_dt(pulse, dt)
    t = time_grid(pulse.duration, dt)
    phi = pulse.flux(t)
    if transfer is not None:
        phi = transfer(t, phi)
    return SampledSignal(t, phi, dt, "phi", "rad")


class FrequencyCalculator:
    """Dressed transition frequencies of the composite system as a function of static flux.

    Diagonalizations are cached on a grid of |phi| with spacing ``quantum``;
    values in between are linearly interpolated.  The lock keeps concurrent
    insertion deterministic.
    """

    LABELS = {"g": (0, 0, 0), "e": (1, 0, 0), "f": (2, 0, 0)}

    def __init__(self, device, quantum=1e-3, n_lowest=24):
        self.device = device
        self.parts = build_composite(device)
        self.dressed = dress_basis(self.parts)
        self.quantum = quantum
        self.n_lowest = min(n_lowest, self.parts.dim)
        self._cache = {}
        self._lock = threading.Lock()
        self._refs = np.column_stack([self.dressed.state(*lab) for lab in self.LABELS.values()])

    def _levels_at(self, phi):
        dev = self.device
        dej = delta_ej(phi, dev.E_J_max, dev.d)
        H = self.parts.H_static + dej * self.parts.drive_op
        vals, vecs = eigh(H, subset_by_index=(0, self.n_lowest - 1))
        ov = np.abs(self._refs.conj().T @ vecs)
        out = []
        for row in ov:
            out.append(vals[int(np.argmax(row))])
        return np.array(out)

    def _cached(self, k):
        hit = self._cache.get(k)
        if hit is None:
            hit = self._levels_at(k * self.quantum)
            with self._lock:
                self._cache.setdefault(k, hit)
        return hit

    def levels(self, phi):
        """Energies (GHz) of the dressed g, e, f states at flux ``phi``."""
        x = abs(float(phi))
        if not self.quantum:
            return self._levels_at(x)
        k, frac = divmod(x / self.quantum, 1.0)
        k = int(k)
        lo = self._cached(k)
        if frac < 1e-12:
            return lo
        return lo + frac * (self._cached(k + 1) - lo)

    def transition(self, phi, transition="ge"):
        lv = self.levels(phi)
        if transition == "ge":
            return lv[1] - lv[0]
        if transition == "ef":
            return lv[2] - lv[1]
        if transition == "gf":
            return lv[2] - lv[0]
        raise ValueError(f"unknown transition {transition!r}")


_CALCULATORS = {}


def frequency_calculator(device, quantum=1e-3):
    key = (device, quantum)
    calc = _CALCULATORS.get(key)
    if calc is None:
        calc = _CALCULATORS[key] = FrequencyCalculator(device, quantum)
    return calc


def instantaneous_frequency(device, flux, transition="ge", quantum=1e-3):
    """Per-sample dressed transition frequency (GHz) for a flux trajectory."""
    if np.any(np.abs(flux.values) >= np.pi / 2):
        raise OutOfRange("flux leaves the sweet-spot branch (|phi| >= pi/2)")
    calc = frequency_calculator(device, quantum)
    vals = np.array([calc.transition(p, transition) for p in flux.values])
    return SampledSignal(flux.t, vals, flux.dt, f"omega_{transition}", "GHz")


def modulation_amplitude(freq, plateau_window, period=None):
    """``max - mean`` of the frequency over the plateau window, returned in MHz.

    Raises WindowEmpty when the window is shorter than ``period`` (one modulation
    period, ns) or holds fewer than two samples.
    """
    start, stop = plateau_window
    _, vals = freq.window(start, stop)
    if stop <= start or len(vals) < 2 or (period is not None and stop - start < period):
        raise WindowEmpty(f"plateau window [{start}, {stop}] too short")
    return 1e3 * (np.max(vals) - np.mean(vals))


def pulse_modulation_amplitude(device, pulse, dt=None, quantum=1e-3):
    flux = flux_trajectory(pulse, dt)
    freq = instantaneous_frequency(device, flux, "ge", quantum)
    return modulation_amplitude(freq, pulse.plateau_window, period=1e3 / pulse.omega_m)


def calibrate_flux_amplitude(device, omega_a, omega_m=564.0, sigma=5.0, tau=40.0,
                             quantum=1e-3, bracket=(0.05, 1.2)):
    """Plateau flux amplitude D giving modulation amplitude ``omega_a`` (MHz)."""
    from scipy.optimize import brentq

    if omega_a <= 0:
        return 0.0
    base = FluxPulse(omega_m=omega_m, tau=tau, sigma=sigma)

    def resid(D):
        return pulse_modulation_amplitude(device, base.with_(D=D), quantum=quantum) - omega_a

    return brentq(resid, *bracket, xtol=1e-6)


@dataclass(frozen=True)
class SidebandSpectrum:
    freqs: np.ndarray  # MHz
    magnitude: np.ndarray
    df: float
    n_fft: int

    def power_sum(self):
        """Two-sided energy (1/N) sum |X_k|^2 reconstructed from the one-sided magnitude."""
        w = np.full(len(self.magnitude), 2.0)
        w[0] = 1.0
        if self.n_fft % 2 == 0:
            w[-1] = 1.0
        return float(np.sum(w * self.magnitude ** 2) / self.n_fft)

    def to_csv(self, path):
        write_columns(path, ["frequency (MHz)", "magnitude (GHz)"], [self.freqs, self.magnitude])


def sideband_spectrum(freq, baseline=None):
    """One-sided |DFT| of a uniformly sampled frequency trace, zero-padded to a power of two.

    No window is applied.  ``baseline`` (same units as the samples) is
    subtracted first; pass the idle frequency to remove the record-edge step.
    """
    x = np.asarray(freq.values, dtype=float)
    if baseline is not None:
        x = x - baseline
    n = 1 << int(np.ceil(np.log2(max(len(x), 1))))
    mag = np.abs(np.fft.rfft(x, n))
    freqs = np.fft.rfftfreq(n, freq.dt) * 1e3
    return SidebandSpectrum(freqs, mag, float(freqs[1] - freqs[0]), n)


def sideband_overlap(spec, center, linewidth):
    """Fraction of spectral weight within ``center +- linewidth/2`` (MHz)."""
    if not spec.freqs[0] <= center <= spec.freqs[-1]:
        raise OutOfRange(f"center {center} MHz outside spectrum")
    if linewidth <= 0:
        return 0.0
    mask = np.abs(spec.freqs - center) <= 0.5 * linewidth
    total = np.sum(spec.magnitude)
    return float(np.sum(spec.magnitude[mask]) / total) if total > 0 else 0.0
