"""Closed-form relations for the parametric LRU and a channel-level randomized-benchmarking simulator.

Frequencies are in GHz or MHz as noted per function; coherence times in µs;
gate durations in ns.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, curve_fit

from .errors import ConfigError, FitError, Unphysical


# ---------------------------------------------------------------------------
# Bessel function of the first kind, order one
# ---------------------------------------------------------------------------

_SERIES_LIMIT = 8.0


def _j1_series(x):
    """Ascending series sum (-1)^k (x/2)^(2k+1) / (k! (k+1)!)."""
    half = 0.5 * x
    term = half
    total = half
    q = -half * half
    k = 0
    while True:
        k += 1
        term = term * q / (k * (k + 1))
        total += term
        if abs(term) <= 1e-17 * max(abs(total), 1e-300):
            return total


def _j1_miller(x):
    """Backward recurrence normalized with J0 + 2 sum J_2k = 1 (for |x| > 8)."""
    n_start = 2 * ((int(x) + 30 + int(np.sqrt(40.0 * x))) // 2)
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    j1 = 0.0
    for n in range(n_start, 0, -1):
        j_prev = 2.0 * n / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_next *= 1e-250
            j_cur *= 1e-250
            norm *= 1e-250
            j1 *= 1e-250
        # j_cur now holds J_{n-1}
        if n - 1 == 1:
            j1 = j_cur
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur  # J_0
    return j1 / norm


def bessel_j1(x):
    """Bessel function J1, accurate to about 1e-15 absolute for real arguments.

    Uses the ascending power series for ``|x| <= 8`` and Miller's backward
    recurrence beyond.
    """
    arr = np.asarray(x, dtype=float)
    flat = arr.ravel()
    out = np.empty_like(flat)
    for i, v in enumerate(flat):
        a = abs(v)
        val = _j1_series(a) if a <= _SERIES_LIMIT else _j1_miller(a)
        out[i] = val if v >= 0 else -val
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Resonance condition, coupling and damping
# ---------------------------------------------------------------------------

def resonance_modulation_freq(omega_ge_bar, alpha, omega_r):
    """Modulation frequency (MHz) that brings |f0> into resonance with |e1>.

    The transmon frequency oscillates at twice the flux modulation frequency,
    so the condition is ``2 omega_m = |omega_ge_bar + alpha - omega_r|``.
    Inputs are in GHz.
    """
    return 1e3 * abs(omega_ge_bar + alpha - omega_r) / 2.0


def parametric_coupling(g_qr, omega_a, omega_m):
    """Sideband coupling ``sqrt(2) g_qr J1(omega_a / (2 omega_m))`` in MHz."""
    if omega_m <= 0:
        raise ValueError("omega_m must be positive")
    return np.sqrt(2.0) * g_qr * bessel_j1(omega_a / (2.0 * omega_m))


class DampingRegime(Enum):
    UNDERDAMPED = "Underdamped"
    CRITICAL = "Critical"
    OVERDAMPED = "Overdamped"

    def __str__(self):
        return self.value


def damping_regime(g, kappa_r, rtol=1e-9):
    """Compare the sideband coupling with kappa_r / 4 (both in MHz)."""
    if g < 0 or kappa_r < 0:
        raise ValueError("g and kappa_r must be non-negative")
    edge = kappa_r / 4.0
    if g > edge * (1 + rtol):
        return DampingRegime.UNDERDAMPED
    if g < edge * (1 - rtol):
        return DampingRegime.OVERDAMPED
    return DampingRegime.CRITICAL


# ---------------------------------------------------------------------------
# Coherence
# ---------------------------------------------------------------------------

def pure_dephasing(T1, T2_star):
    """``T_phi = 2 T1 T2* / (2 T1 - T2*)``; raises Unphysical when T2* >= 2 T1."""
    if T1 <= 0 or T2_star <= 0:
        raise Unphysical("coherence times must be positive")
    if T2_star >= 2.0 * T1:
        raise Unphysical(f"T2*={T2_star} us is not below 2 T1={2 * T1} us")
    return 2.0 * T1 * T2_star / (2.0 * T1 - T2_star)


@dataclass(frozen=True)
class CoherenceSet:
    T1: float  # µs
    T2_star: float  # µs
    T2_echo: float = None  # µs

    def __post_init__(self):
        if self.T1 <= 0 or self.T2_star <= 0 or (self.T2_echo is not None and self.T2_echo <= 0):
            raise Unphysical("coherence times must be positive")
        if self.T2_star > 2.0 * self.T1 + 1e-9:
            raise Unphysical("T2* exceeds 2 T1")

    @property
    def T_phi(self):
        return pure_dephasing(self.T1, self.T2_star)


def coherence_limit_error(T1, T2, tau):
    """Average gate error of an idle of ``tau`` ns under T1 and T2 (µs).

    ``1/2 - exp(-tau/T2)/3 - exp(-tau/T1)/6``.
    """
    if T1 <= 0 or T2 <= 0 or tau < 0:
        raise ValueError("T1, T2 must be positive and tau non-negative")
    t = tau * 1e-3
    return 0.5 - np.exp(-t / T2) / 3.0 - np.exp(-t / T1) / 6.0


# ---------------------------------------------------------------------------
# Randomized benchmarking in the Pauli-transfer picture
# ---------------------------------------------------------------------------

PAULIS = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def ptm(U):
    """Pauli transfer matrix ``R_ij = Tr(P_i U P_j U^dag) / 2``."""
    return np.real(np.einsum("iab,bc,jcd,ad->ij", PAULIS, U, PAULIS, U.conj())) / 2.0


@lru_cache(maxsize=1)
def clifford_group():
    """The 24 single-qubit Cliffords as (unitaries, PTMs, multiplication table).

    Elements are enumerated breadth-first from the identity with generators
    H then S, giving a fixed canonical order.  ``table[a, b]`` is the index of
    ``C_a C_b`` (apply b first).
    """
    H = np.array([[1, 1], [1, -1]], complex) / np.sqrt(2)
    S = np.array([[1, 0], [0, 1j]], complex)
    units = [np.eye(2, dtype=complex)]
    ptms = [ptm(units[0])]
    queue = [0]
    while queue:
        cur = queue.pop(0)
        for G in (H, S):
            U = G @ units[cur]
            R = ptm(U)
            if not any(np.allclose(R, r, atol=1e-9) for r in ptms):
                units.append(U)
                ptms.append(R)
                queue.append(len(units) - 1)
    ptms = np.array(ptms)
    n = len(ptms)
    table = np.empty((n, n), dtype=int)
    for a in range(n):
        for b in range(n):
            prod = ptms[a] @ ptms[b]
            table[a, b] = int(np.argmin(np.abs(ptms - prod).sum(axis=(1, 2))))
    inverse = np.array([int(np.flatnonzero(table[a] == 0)[0]) for a in range(n)])
    return np.array(units), np.round(ptms, 12), table, inverse


def depolarizing_ptm(p):
    """``rho -> (1 - p) rho + p I/2``."""
    return np.diag([1.0, 1 - p, 1 - p, 1 - p])


def amplitude_damping_ptm(gamma):
    R = np.diag([1.0, np.sqrt(1 - gamma), np.sqrt(1 - gamma), 1 - gamma])
    R[3, 0] = gamma
    return R


def average_gate_error(R):
    """Average gate infidelity of a single-qubit channel given by its PTM."""
    F_e = np.trace(R[:4, :4]) / 4.0
    return 1.0 - (2.0 * F_e + 1.0) / 3.0


def channel_with_error(error, kind="amplitude_damping"):
    """PTM of a channel with the given average gate error."""
    if not 0 <= error <= 0.5:
        raise ConfigError("average error must lie in [0, 1/2]")
    if error == 0:
        return np.eye(4)
    if kind == "depolarizing":
        return depolarizing_ptm(2.0 * error)
    if kind == "amplitude_damping":
        if error > 1.0 / 3.0:
            raise ConfigError("amplitude damping cannot exceed an average error of 1/3")
        gamma = brentq(lambda g: average_gate_error(amplitude_damping_ptm(g)) - error, 0.0, 1.0)
        return amplitude_damping_ptm(gamma)
    raise ConfigError(f"unknown channel kind {kind!r}")


@dataclass(frozen=True)
class ErrorModel:
    """Per-operation error budget for RB.

    ``p_depol_per_clifford`` is the depolarizing parameter applied after each
    Clifford (its average error is half of it).  ``interleaved_error`` is the
    average error of the interleaved operation, realized as a channel of kind
    ``interleaved_kind``.  ``leakage_per_op`` removes population from the
    qubit subspace after every operation.
    """

    p_depol_per_clifford: float = 0.0
    interleaved_error: float = 0.0
    leakage_per_op: float = 0.0
    interleaved_kind: str = "amplitude_damping"

    def __post_init__(self):
        for name in ("p_depol_per_clifford", "interleaved_error", "leakage_per_op"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0 or not np.isfinite(v):
                raise ConfigError(f"{name}={v} is not a probability")


@dataclass(frozen=True)
class RbCurve:
    lengths: np.ndarray
    survival: np.ndarray  # (n_seeds, n_lengths)
    interleaved: bool

    @property
    def mean(self):
        return self.survival.mean(axis=0)

    @property
    def std(self):
        return self.survival.std(axis=0, ddof=1) if len(self.survival) > 1 else np.zeros(len(self.lengths))

    def to_csv(self, path):
        from .pulse import write_columns

        write_columns(path, ["length", "mean_survival", "std_survival"], [self.lengths, self.mean, self.std])


def default_lengths(max_length=1000, n=20):
    return np.unique(np.round(np.logspace(0, np.log10(max_length), n)).astype(int))


def seed_streams(rng_seed, n):
    """Independent generators derived from one master seed by SeedSequence.spawn."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(rng_seed).spawn(n)]


def simulate_rb(model, lengths=None, n_seeds=30, rng_seed=0, interleaved=False, shots=None):
    """Survival probabilities of single-qubit (interleaved) Clifford RB.

    Every sequence of ``m`` random Cliffords is closed by the recovery
    Clifford.  Noise follows every Clifford, the interleaved channel follows
    every random Clifford when ``interleaved`` is set.  With ``shots`` the
    exact survival of each sequence is replaced by a binomial estimate.
    """
    if not isinstance(model, ErrorModel):
        model = ErrorModel(**model)
    lengths = default_lengths() if lengths is None else np.asarray(lengths, dtype=int)
    if len(np.unique(lengths)) < 2 or np.any(lengths < 1):
        raise ConfigError("need at least two distinct positive sequence lengths")
    _, ptms, table, inverse = clifford_group()
    noise = depolarizing_ptm(model.p_depol_per_clifford) * (1.0 - model.leakage_per_op)
    lru = channel_with_error(model.interleaved_error, model.interleaved_kind) * (1.0 - model.leakage_per_op)
    noisy = np.einsum("ij,cjk->cik", noise, ptms)
    step = np.einsum("ij,cjk->cik", lru, noisy) if interleaved else noisy

    streams = seed_streams(rng_seed, n_seeds)
    m_max = int(lengths.max())
    survival = np.empty((n_seeds, len(lengths)))
    for s, rng in enumerate(streams):
        seq = rng.integers(0, len(ptms), size=(len(lengths), m_max))
        state = np.tile(np.array([1.0, 0.0, 0.0, 1.0]), (len(lengths), 1))
        net = np.zeros(len(lengths), dtype=int)
        for k in range(m_max):
            active = lengths > k
            c = seq[active, k]
            state[active] = np.einsum("nij,nj->ni", step[c], state[active])
            net[active] = table[c, net[active]]
        rec = inverse[net]
        state = np.einsum("nij,nj->ni", noisy[rec], state)
        p = np.clip(0.5 * (state[:, 0] + state[:, 3]), 0.0, 1.0)
        if shots:
            p = rng.binomial(int(shots), p) / float(shots)
        survival[s] = p
    return RbCurve(lengths, survival, interleaved)


@dataclass(frozen=True)
class RbResult:
    p_ref: float
    p_int: float
    error_ref: float
    error_int: float
    sigma_p_ref: float
    sigma_p_int: float
    sigma_error_int: float

    def __post_init__(self):
        if not (0 < self.p_ref <= 1 and 0 < self.p_int <= 1 + 1e-12):
            raise FitError("decay constants outside (0, 1]")

    def to_dict(self):
        return {k: float(v) for k, v in self.__dict__.items()}


def _decay(m, A, p, B):
    return A * p ** m + B


def fit_decay(lengths, survival):
    """Least-squares fit of ``A p^m + B``; returns (A, p, B) and their standard errors."""
    m = np.asarray(lengths, dtype=float)
    y = np.asarray(survival, dtype=float)
    if np.all(np.abs(y - 1.0) < 1e-9):
        # error-free channel: the decay rate is exactly zero
        return np.array([0.5, 1.0, 0.5]), np.zeros(3)
    if np.ptp(y) < 1e-12:
        raise FitError("survival does not decay")
    B0 = 0.5
    A0 = max(y[0] - B0, 1e-3)
    ratio = np.clip((y[-1] - B0) / A0, 1e-6, 1 - 1e-9)
    p0 = ratio ** (1.0 / max(m[-1] - m[0], 1.0)) if m[-1] > m[0] else 0.99
    try:
        popt, pcov = curve_fit(_decay, m, y, p0=(A0, p0, B0),
                               bounds=([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]), max_nfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"decay fit failed: {exc}") from exc
    perr = np.sqrt(np.clip(np.diag(pcov), 0.0, None)) if np.all(np.isfinite(pcov)) else np.full(3, np.nan)
    if popt[1] >= 1.0 - 1e-12 or popt[0] <= 1e-9:
        raise FitError("fitted curve does not decay")
    return popt, perr


def irb_fit(ref_curve, int_curve, lengths=None):
    """Interleaved-RB estimator ``r = (1 - p_int / p_ref) / 2``.

    Curves may be RbCurve objects or mean-survival arrays with ``lengths``.
    """
    if isinstance(ref_curve, RbCurve):
        lengths, ref = ref_curve.lengths, ref_curve.mean
    else:
        ref = np.asarray(ref_curve, dtype=float)
    if isinstance(int_curve, RbCurve):
        if lengths is not None and not np.array_equal(int_curve.lengths, lengths):
            raise FitError("reference and interleaved curves use different lengths")
        lengths, inter = int_curve.lengths, int_curve.mean
    else:
        inter = np.asarray(int_curve, dtype=float)
    if lengths is None or len(ref) != len(inter) or len(ref) != len(lengths):
        raise FitError("curves need a common length grid")
    (_, p_ref, _), (_, s_ref, _) = fit_decay(lengths, ref)
    (_, p_int, _), (_, s_int, _) = fit_decay(lengths, inter)
    err_int = 0.5 * (1.0 - p_int / p_ref)
    s_err = 0.5 * np.hypot(s_int / p_ref, p_int * s_ref / p_ref ** 2)
    return RbResult(float(p_ref), float(p_int), float(0.5 * (1.0 - p_ref)), float(err_int),
                    float(s_ref), float(s_int), float(s_err))
