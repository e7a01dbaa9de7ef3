"""Transmon eigensystems, the transmon/resonator/filter Hamiltonian and its dressed basis.

Energies are kept as ordinary frequencies (omega / 2pi) in GHz throughout this
module; conversion to angular units happens only in the integrator.
"""

import configparser
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal

from .errors import ConfigError, ConvergenceError, DimensionError, LabelingError

DEFAULT_CHARGE_CUTOFF = 25
CUTOFF_STABILITY_TOL = 1e-9  # GHz


def ej_of_flux(phi, E_J_max, d):
    """Josephson energy of an asymmetric SQUID at reduced flux ``phi`` (radians).

    Uses ``E_J_max * sqrt(cos(phi)**2 + d**2 sin(phi)**2)``, which equals
    ``E_J_max |cos phi| sqrt(1 + d**2 tan(phi)**2)`` but stays finite at pi/2.
    """
    phi = np.asarray(phi, dtype=float)
    out = E_J_max * np.sqrt(np.cos(phi) ** 2 + (d * np.sin(phi)) ** 2)
    return float(out) if out.ndim == 0 else out


def delta_ej(phi, E_J_max, d):
    """Reduction of the Josephson energy relative to the sweet spot."""
    return E_J_max - ej_of_flux(phi, E_J_max, d)


@dataclass(frozen=True)
class DeviceParams:
    """Circuit constants of one flux-tunable transmon with readout resonator and Purcell filter.

    Units follow the config file: ``E_C``, ``g_qr_c``, ``J`` and ``kappa_p`` in MHz;
    ``E_J_max``, ``omega_r_bare`` and ``omega_p`` in GHz.
    """

    E_C: float
    E_J_max: float
    d: float
    g_qr_c: float
    omega_r_bare: float
    omega_p: float
    J: float
    kappa_p: float
    n_transmon: int = 6
    n_res: int = 6
    n_filt: int = 6
    charge_cutoff: int = DEFAULT_CHARGE_CUTOFF
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.d < 1.0:
            raise ConfigError(f"junction asymmetry d={self.d} outside [0, 1)")
        for name in ("E_C", "E_J_max", "omega_r_bare", "omega_p"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive")
        for name in ("g_qr_c", "J", "kappa_p"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.E_J_max / self.E_C_GHz <= 20:
            raise ConfigError("E_J_max / E_C must exceed 20 (transmon regime)")
        if self.n_transmon < 4 or self.n_res < 2 or self.n_filt < 2:
            raise ConfigError("need n_transmon >= 4 and n_res, n_filt >= 2")
        if self.charge_cutoff < 3 * np.sqrt(self.E_J_max / (8 * self.E_C_GHz)):
            raise ConfigError("charge_cutoff too small for E_J_max / E_C")

    @property
    def E_C_GHz(self):
        return self.E_C * 1e-3

    @property
    def dims(self):
        return (self.n_transmon, self.n_res, self.n_filt)

    def with_(self, **changes):
        return replace(self, **changes)

    @classmethod
    def from_mapping(cls, values):
        known = {f.name: f for f in fields(cls) if f.name != "extras"}
        kwargs, extras = {}, {}
        for key, raw in values.items():
            if key in known:
                typ = int if known[key].type in (int, "int") else float
                try:
                    kwargs[key] = typ(float(raw)) if typ is int else typ(raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key}: {raw!r}") from exc
            else:
                extras[key] = raw
        try:
            return cls(**kwargs, extras=extras)
        except TypeError as exc:
            raise ConfigError(f"incomplete device config: {exc}") from exc

    @classmethod
    def load(cls, path):
        return cls.from_mapping(read_config(path))

    @classmethod
    def qubit_a(cls):
        """Bundled parameters of auxiliary qubit A."""
        return cls.from_mapping(read_config(bundled_config_path()))


def bundled_config_path():
    return Path(str(resources.files("fluxlru") / "data" / "qubitA.cfg"))


def read_config(path):
    """Parse a flat ``key = value`` file (``#`` comments allowed) into a dict of strings."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return dict(parser["config"])


@dataclass(frozen=True)
class TransmonEigensystem:
    energies: np.ndarray  # GHz, absolute, ascending
    vectors: np.ndarray  # charge basis, columns
    n_op: np.ndarray  # charge operator in the eigenbasis
    cos_op: np.ndarray  # cos(phi) in the eigenbasis
    E_C: float
    E_J: float

    @property
    def omega_ge(self):
        return self.energies[1] - self.energies[0]

    @property
    def omega_ef(self):
        return self.energies[2] - self.energies[1]

    @property
    def alpha(self):
        return self.omega_ef - self.omega_ge

    @property
    def levels(self):
        return [(e, self.vectors[:, i]) for i, e in enumerate(self.energies)]


def _charge_basis_spectrum(E_C, E_J, cutoff, n_levels):
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    diag = 4.0 * E_C * n ** 2
    off = np.full(2 * cutoff, -0.5 * E_J)
    return eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))


def build_transmon(E_C, E_J, charge_cutoff=DEFAULT_CHARGE_CUTOFF, n_transmon=6):
    """Diagonalize ``4 E_C n^2 - E_J cos(phi)`` in the charge basis (energies in GHz).

    Raises ConvergenceError when the lowest ``n_transmon`` levels move by more than
    1e-9 GHz when the charge cutoff grows by five.
    """
    vals, vecs = _charge_basis_spectrum(E_C, E_J, charge_cutoff, n_transmon)
    check, _ = _charge_basis_spectrum(E_C, E_J, charge_cutoff + 5, n_transmon)
    if np.max(np.abs(check - vals)) > CUTOFF_STABILITY_TOL:
        raise ConvergenceError(
            f"charge cutoff {charge_cutoff} not converged (shift {np.max(np.abs(check - vals)):.2e} GHz)")
    # deterministic sign: largest-magnitude component positive
    pivots = np.argmax(np.abs(vecs), axis=0)
    vecs = vecs * np.sign(vecs[pivots, np.arange(vecs.shape[1])])

    n = np.arange(-charge_cutoff, charge_cutoff + 1, dtype=float)
    n_op = vecs.T @ (n[:, None] * vecs)
    # cos(phi) = (|n><n+1| + |n+1><n|) / 2
    shifted = 0.5 * (np.vstack([vecs[1:], np.zeros((1, n_transmon))])
                     + np.vstack([np.zeros((1, n_transmon)), vecs[:-1]]))
    cos_op = vecs.T @ shifted
    cos_op = 0.5 * (cos_op + cos_op.T)
    n_op = 0.5 * (n_op + n_op.T)
    return TransmonEigensystem(vals, vecs, n_op, cos_op, E_C, E_J)


def destroy(n):
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


@dataclass(frozen=True)
class HamiltonianParts:
    H_static: np.ndarray  # GHz
    drive_op: np.ndarray  # cos(phi_t) lifted to the composite space
    collapse_op: np.ndarray  # bare filter annihilation operator
    dims: tuple
    device: DeviceParams
    transmon: TransmonEigensystem

    @property
    def dim(self):
        return int(np.prod(self.dims))


def build_composite(device, transmon=None):
    """Assemble the static composite Hamiltonian, the flux-drive operator and the filter collapse operator.

    Counter-rotating terms of both couplings are kept.
    """
    if transmon is None:
        transmon = build_transmon(device.E_C_GHz, device.E_J_max,
                                  device.charge_cutoff, device.n_transmon)
    nt, nr, nf = device.dims
    if len(transmon.energies) != nt:
        raise DimensionError(
            f"transmon has {len(transmon.energies)} levels, device expects {nt}")
    it, ir, if_ = np.eye(nt), np.eye(nr), np.eye(nf)
    a, f = destroy(nr), destroy(nf)

    def lift(t=it, r=ir, fl=if_):
        return np.kron(np.kron(t, r), fl)

    energies = transmon.energies - transmon.energies[0]
    g = device.g_qr_c * 1e-3
    J = device.J * 1e-3
    H = lift(t=np.diag(energies))
    H = H + g * lift(t=transmon.n_op, r=1j * (a - a.T))
    H = H + device.omega_r_bare * lift(r=a.T @ a)
    H = H + device.omega_p * lift(fl=f.T @ f)
    H = H - J * lift(r=a - a.T, fl=f - f.T)
    H = 0.5 * (H + H.conj().T)
    return HamiltonianParts(
        H_static=H,
        drive_op=lift(t=transmon.cos_op).astype(complex),
        collapse_op=lift(fl=f).astype(complex),
        dims=device.dims,
        device=device,
        transmon=transmon,
    )


def _normal_mode_basis(omega_r, omega_p, J, nr, nf):
    """Eigenstates of the excitation-conserving resonator/filter block, labelled by normal-mode occupations.

    Within each manifold of fixed total photon number the eigenvectors are
    ordered by energy and receive labels ``(lower, upper)`` with the upper-mode
    count increasing.  Returns (basis columns in the bare Fock basis, labels).
    """
    dim = nr * nf
    basis = np.zeros((dim, dim))
    labels = [None] * dim
    for total in range(nr + nf - 1):
        pairs = [(j, total - j) for j in range(nr) if 0 <= total - j < nf]
        pairs.sort(key=lambda p: p[1])
        idx = [j * nf + k for j, k in pairs]
        h = np.zeros((len(pairs), len(pairs)))
        for a_, (j, k) in enumerate(pairs):
            h[a_, a_] = j * omega_r + k * omega_p
            for b_, (j2, k2) in enumerate(pairs):
                if j2 == j - 1 and k2 == k + 1:  # a f^dagger
                    h[b_, a_] = J * np.sqrt(j * (k + 1))
                    h[a_, b_] = h[b_, a_]
        _, vecs = np.linalg.eigh(h)
        for col, (j, k) in enumerate(pairs):
            v = vecs[:, col]
            v = v * np.sign(v[np.argmax(np.abs(v))])
            basis[idx, j * nf + k] = v
            labels[j * nf + k] = (j, k)
    return basis, labels


def _pulled_resonator_frequencies(parts):
    """Single-photon resonator frequency for each transmon level, with the filter decoupled."""
    dev = parts.device
    nt, nr, _ = parts.dims
    tm = parts.transmon
    a = destroy(nr)
    E = tm.energies - tm.energies[0]
    H = (np.kron(np.diag(E), np.eye(nr))
         + dev.g_qr_c * 1e-3 * np.kron(tm.n_op, 1j * (a - a.T))
         + dev.omega_r_bare * np.kron(np.eye(nt), a.T @ a))
    vals, vecs = eigh(0.5 * (H + H.conj().T))
    overlap = np.abs(vecs) ** 2  # rows: bare product (i, n); columns: eigenvectors
    order = np.argsort(-overlap.ravel(), kind="stable")
    ref_used = np.zeros(len(vals), bool)
    eig_used = np.zeros(len(vals), bool)
    energy_of = {}
    for flat in order:
        r, e = divmod(int(flat), len(vals))
        if ref_used[r] or eig_used[e]:
            continue
        ref_used[r] = eig_used[e] = True
        energy_of[divmod(r, nr)] = vals[e]
    out = np.empty(nt)
    for i in range(nt):
        if nr > 1 and (i, 1) in energy_of and (i, 0) in energy_of:
            out[i] = energy_of[(i, 1)] - energy_of[(i, 0)]
        else:
            out[i] = dev.omega_r_bare
    # the top level has no partner above it and is not trusted
    out[-1] = out[-2] if nt > 1 else out[-1]
    return out


@dataclass(frozen=True)
class DressedBasis:
    """Eigenstates of the static Hamiltonian labelled by (transmon, lower mode, upper mode).

    ``labels[n]`` is the triple assigned to eigenvector ``vectors[:, n]``; the
    photon labels count quanta in the lower- and higher-frequency normal modes
    of the resonator/filter pair.
    """

    labels: np.ndarray  # (dim, 3) int
    energies: np.ndarray  # GHz relative to the dressed ground state
    vectors: np.ndarray
    overlap_quality: np.ndarray
    dims: tuple

    def __post_init__(self):
        lookup = {tuple(int(x) for x in lab): n for n, lab in enumerate(self.labels)}
        object.__setattr__(self, "_lookup", lookup)

    def index(self, i, j=0, k=0):
        return self._lookup[(i, j, k)]

    def state(self, i, j=0, k=0):
        return self.vectors[:, self.index(i, j, k)]

    def energy(self, i, j=0, k=0):
        return self.energies[self.index(i, j, k)]

    def projector(self, i, j=0, k=0):
        v = self.state(i, j, k)
        return np.outer(v, v.conj())

    def transmon_indices(self, level):
        return np.flatnonzero(self.labels[:, 0] == level)


def dress_basis(parts):
    """Diagonalize ``H_static`` and label each eigenvector by greedy maximum overlap.

    The reference product basis is transmon eigenstates times the normal modes of
    the resonator/filter pair.  Pairs are assigned in descending overlap order
    with exclusion (ties go to the lower reference index).
    """
    H = parts.H_static
    if np.max(np.abs(H - H.conj().T)) > 1e-12 * max(np.max(np.abs(H)), 1.0):
        raise LabelingError("static Hamiltonian is not Hermitian")
    energies, vectors = eigh(H)
    nt, nr, nf = parts.dims
    dev = parts.device
    # normal modes per transmon level, using the resonator frequency pulled by that level
    pulled = _pulled_resonator_frequencies(parts)
    reference = np.zeros((nt * nr * nf, nt * nr * nf))
    block = nr * nf
    for i in range(nt):
        modes, mode_labels = _normal_mode_basis(pulled[i], dev.omega_p, dev.J * 1e-3, nr, nf)
        reference[i * block:(i + 1) * block, i * block:(i + 1) * block] = modes
    overlap = np.abs(reference.T @ vectors)
    dim = overlap.shape[0]
    order = np.argsort(-overlap.ravel(), kind="stable")
    ref_used = np.zeros(dim, bool)
    eig_used = np.zeros(dim, bool)
    assign = np.full(dim, -1)
    quality = np.zeros(dim)
    remaining = dim
    for flat in order:
        r, e = divmod(int(flat), dim)
        if ref_used[r] or eig_used[e]:
            continue
        ref_used[r] = eig_used[e] = True
        assign[e] = r
        quality[e] = overlap[r, e]
        remaining -= 1
        if remaining == 0:
            break
    labels = np.empty((dim, 3), dtype=int)
    for e, r in enumerate(assign):
        i, rest = divmod(r, nr * nf)
        labels[e] = (i, *mode_labels[rest])
    # fix eigenvector phases against their reference state
    phase = reference[:, assign].T @ vectors
    phase = np.diagonal(phase)
    vectors = vectors * (np.abs(phase) / np.where(phase == 0, 1, phase))
    # states at the Fock/transmon truncation edge are numerical artifacts
    converged = labels.sum(axis=1) < min(parts.dims)
    if np.any(quality[converged] <= 0.5):
        bad = int(np.flatnonzero(converged)[np.argmin(quality[converged])])
        raise LabelingError(
            f"dressed state {tuple(labels[bad])} has maximum overlap {quality[bad]:.3f} <= 0.5")
    energies = energies - energies[assign.tolist().index(0)] if 0 in assign else energies
    return DressedBasis(labels, energies, vectors, quality, tuple(parts.dims))
