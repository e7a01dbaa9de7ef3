"""Monte-Carlo model of a repeated weight-two parity check with a leaking auxiliary qubit.

Each cycle follows the circuit order: two entangling gates (leakage
injection), an optional LRU on the auxiliary, readout (state-dependent
leakage, then assignment through a 3x3 confusion matrix) and finally decay
and transport of |f> across the cycle boundary.  States are 0 = g, 1 = e,
2 = f.  Cycles are numbered 1..n_cycles; cycle 0 is the prepared state.
"""

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigError, DomainError, NoEvents

G, E, F = 0, 1, 2
INPUT_STATES = ("gg", "ge", "eg", "ee")
F_POLICIES = ("map_f_to_random", "map_f_to_e")

# rows: true g, e, f; columns: assigned g, e, f
DEFAULT_CONFUSION = (
    (0.9949, 0.0050, 0.0001),
    (0.0100, 0.9887, 0.0013),
    (0.0035, 0.0260, 0.9705),
)


@dataclass(frozen=True)
class StabilizerConfig:
    """Rates of the cycle model (probabilities per event unless noted)."""

    cycle_time: float = 0.7  # µs
    n_cycles: int = 50
    n_shots: int = 100_000
    lru_enabled: bool = False
    gate_leak_aux: float = 3e-4  # per two-qubit gate
    n_aux_gates: int = 2
    gate_leak_data: tuple = (1e-4, 0.0)  # per cycle, data qubits 1 and 2
    readout_leak_gg: float = 4e-4
    readout_leak_ee: float = 3.7e-3
    lru_residual: float = 6e-4
    background_residual: float = 2e-3
    f_lifetime_cycles: float = 24.6
    transport_prob: float = 0.06
    data_f_lifetime_cycles: float = 200.0
    pauli_error_prob: float = 0.035
    readout_confusion: tuple = DEFAULT_CONFUSION
    f_policy: str = "map_f_to_random"
    rng_seed: int = 0
    chunk_size: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "gate_leak_data", tuple(float(x) for x in self.gate_leak_data))
        object.__setattr__(self, "readout_confusion",
                           tuple(tuple(float(x) for x in row) for row in self.readout_confusion))
        probs = {
            "gate_leak_aux": self.gate_leak_aux,
            "readout_leak_gg": self.readout_leak_gg,
            "readout_leak_ee": self.readout_leak_ee,
            "lru_residual": self.lru_residual,
            "background_residual": self.background_residual,
            "transport_prob": self.transport_prob,
            "pauli_error_prob": self.pauli_error_prob,
        }
        for i, v in enumerate(self.gate_leak_data):
            probs[f"gate_leak_data[{i}]"] = v
        for name, v in probs.items():
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name}={v} is not a probability")
        if len(self.gate_leak_data) != 2:
            raise ConfigError("gate_leak_data needs one value per data qubit")
        if self.lru_residual + self.background_residual > 1.0:
            raise ConfigError("lru_residual + background_residual exceeds 1")
        conf = np.asarray(self.readout_confusion)
        if conf.shape != (3, 3) or np.any(conf < 0) or np.any(np.abs(conf.sum(axis=1) - 1) > 1e-12):
            raise ConfigError("readout_confusion must be a 3x3 row-stochastic matrix")
        if self.f_lifetime_cycles <= 0 or self.data_f_lifetime_cycles <= 0:
            raise ConfigError("lifetimes must be positive (use inf for no decay)")
        if self.n_cycles < 1 or self.n_shots < 1 or self.chunk_size < 1 or self.n_aux_gates < 0:
            raise ConfigError("n_cycles, n_shots and chunk_size must be positive")
        if self.f_policy not in F_POLICIES:
            raise ConfigError(f"f_policy must be one of {F_POLICIES}")

    def with_(self, **changes):
        return replace(self, **changes)

    @property
    def gate_injection(self):
        return 1.0 - (1.0 - self.gate_leak_aux) ** self.n_aux_gates

    @property
    def lru_survival(self):
        """Probability that |f> survives one LRU application."""
        return self.lru_residual + self.background_residual

    def readout_leak(self, n_excited):
        """Readout-induced auxiliary leakage for 0, 1 or 2 excited data qubits (linear in between)."""
        return self.readout_leak_gg + (self.readout_leak_ee - self.readout_leak_gg) * np.asarray(n_excited) / 2.0

    @classmethod
    def from_mapping(cls, values):
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                continue
            default = known[key].default
            try:
                if isinstance(default, bool):
                    kwargs[key] = str(raw).strip().lower() in ("1", "true", "yes", "on")
                elif isinstance(default, int):
                    kwargs[key] = int(float(raw))
                elif isinstance(default, float):
                    kwargs[key] = float(raw)
                elif key == "gate_leak_data":
                    kwargs[key] = tuple(float(x) for x in str(raw).replace(",", " ").split())
                elif key == "readout_confusion":
                    vals = [float(x) for x in str(raw).replace(",", " ").replace(";", " ").split()]
                    kwargs[key] = tuple(tuple(vals[3 * i:3 * i + 3]) for i in range(3))
                else:
                    kwargs[key] = str(raw).strip()
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return cls(**kwargs)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def syndrome(s_m, s_prev):
    """``sigma = (1 - s_m s_prev) / 2`` for stabilizer values in {-1, +1}."""
    a = np.asarray(s_m)
    b = np.asarray(s_prev)
    if not (np.all(np.isin(a, (-1, 1))) and np.all(np.isin(b, (-1, 1)))):
        raise DomainError("stabilizer values must be +1 or -1")
    out = (1 - a * b) // 2
    return int(out) if out.ndim == 0 else out.astype(np.int8)


@dataclass
class CycleRecords:
    """Per-shot, per-cycle outcomes; arrays have shape (n_shots, n_cycles)."""

    initial_state: str
    aux_state: np.ndarray  # true auxiliary state at readout
    assigned: np.ndarray  # readout assignment
    data_states: np.ndarray  # (n_shots, n_cycles, 2) at readout
    flip: np.ndarray  # +-1 computational error on the measured value
    data_coin: np.ndarray  # +-1 when a data qubit is leaked (random parity), else 0
    f_coin: np.ndarray  # +-1 random value used for |f> assignments under map_f_to_random
    config: StabilizerConfig = field(repr=False, default=None)

    @property
    def n_shots(self):
        return self.assigned.shape[0]

    @property
    def n_cycles(self):
        return self.assigned.shape[1]

    @property
    def s0(self):
        return parity(self.initial_state)

    def measured_s(self, f_policy=None):
        """Stabilizer values s_m in {-1, +1}; assigned |f> handled by ``f_policy``."""
        policy = f_policy or (self.config.f_policy if self.config else "map_f_to_random")
        if policy not in F_POLICIES:
            raise ConfigError(f"f_policy must be one of {F_POLICIES}")
        base = np.where(self.assigned == G, 1, -1).astype(np.int8)
        base = np.where(self.data_coin != 0, self.data_coin, base)
        s = base * self.flip
        if policy == "map_f_to_random":
            s = np.where(self.assigned == F, self.f_coin, s)
        return s.astype(np.int8)

    def sigma(self, f_policy=None):
        s = self.measured_s(f_policy)
        prev = np.concatenate([np.full((self.n_shots, 1), self.s0, np.int8), s[:, :-1]], axis=1)
        return ((1 - s * prev) // 2).astype(np.int8)

    def to_csv(self, path, f_policy=None):
        """One row per shot and cycle: shot, cycle, assignment, s, sigma."""
        s = self.measured_s(f_policy)
        sig = self.sigma(f_policy)
        shots, cycles = np.meshgrid(np.arange(self.n_shots), np.arange(1, self.n_cycles + 1), indexing="ij")
        letters = np.array(list("gef"))[self.assigned]
        with open(path, "w") as fh:
            fh.write("shot,cycle,aux,s,sigma\n")
            for row in zip(shots.ravel(), cycles.ravel(), letters.ravel(), s.ravel(), sig.ravel()):
                fh.write("%d,%d,%s,%d,%d\n" % row)


def parity(state):
    if state not in INPUT_STATES:
        raise ConfigError(f"initial data state must be one of {INPUT_STATES}")
    return 1 if state in ("gg", "ee") else -1


def _chunk_streams(config):
    n_chunks = -(-config.n_shots // config.chunk_size)
    seqs = np.random.SeedSequence(config.rng_seed).spawn(n_chunks)
    sizes = [min(config.chunk_size, config.n_shots - i * config.chunk_size) for i in range(n_chunks)]
    return [(np.random.default_rng(s), n) for s, n in zip(seqs, sizes)]


def _decay_prob(lifetime):
    return 0.0 if np.isinf(lifetime) else 1.0 - np.exp(-1.0 / lifetime)


def _run_chunk(config, initial_state, rng, n):
    m = config.n_cycles
    conf_cdf = np.cumsum(np.asarray(config.readout_confusion), axis=1)
    p_aux_decay = _decay_prob(config.f_lifetime_cycles)
    p_data_decay = _decay_prob(config.data_f_lifetime_cycles)
    q_gate = config.gate_injection
    leak_data = np.asarray(config.gate_leak_data)
    s_true = parity(initial_state)

    data0 = np.array([E if c == "e" else G for c in initial_state], dtype=np.int8)
    data = np.tile(data0, (n, 1))
    aux = np.full(n, G, np.int8)

    out_aux = np.empty((n, m), np.int8)
    out_assigned = np.empty((n, m), np.int8)
    out_data = np.empty((n, m, 2), np.int8)
    out_flip = np.empty((n, m), np.int8)
    out_dcoin = np.empty((n, m), np.int8)
    out_fcoin = np.empty((n, m), np.int8)

    for c in range(m):
        u = rng.random((n, 9))
        # gates
        comp = aux != F
        aux[comp & (u[:, 0] < q_gate)] = F
        for j in range(2):
            hit = (data[:, j] != F) & (u[:, 1 + j] < leak_data[j])
            data[hit, j] = F
        # LRU
        if config.lru_enabled:
            pumped = (aux == F) & (u[:, 3] >= config.lru_survival)
            aux[pumped] = E
        # readout: state-dependent leakage, then assignment
        n_exc = (data != G).sum(axis=1)
        comp = aux != F
        aux[comp & (u[:, 4] < config.readout_leak(n_exc))] = F
        data_leaked = (data == F).any(axis=1)
        # a computational auxiliary reports the data parity
        true_row = np.where(aux == F, F, np.where(s_true > 0, G, E)).astype(np.int8)
        assigned = (u[:, 5, None] >= conf_cdf[true_row]).sum(axis=1).astype(np.int8)
        out_aux[:, c] = aux
        out_assigned[:, c] = assigned
        out_data[:, c] = data
        out_flip[:, c] = np.where(u[:, 6] < config.pauli_error_prob, -1, 1)
        coins = rng.integers(0, 2, size=(n, 2)) * 2 - 1
        out_dcoin[:, c] = np.where(data_leaked, coins[:, 0], 0)
        out_fcoin[:, c] = coins[:, 1]
        # decay and transport across the cycle boundary
        leaked = aux == F
        move = leaked & (u[:, 7] < config.transport_prob)
        target = (u[:, 8] < 0.5).astype(int)
        idx = np.flatnonzero(move)
        data[idx, target[idx]] = F
        aux[move] = G
        decay = (aux == F) & (rng.random(n) < p_aux_decay)
        aux[decay] = E
        dd = (data == F) & (rng.random((n, 2)) < p_data_decay)
        data[dd] = np.broadcast_to(data0, data.shape)[dd]
    return out_aux, out_assigned, out_data, out_flip, out_dcoin, out_fcoin


def run_cycles(config, initial_data_state="gg"):
    """Simulate ``config.n_shots`` shots of ``config.n_cycles`` cycles.

    Shots are processed in chunks of ``config.chunk_size``; every chunk has its
    own generator spawned from ``rng_seed``, so results do not depend on how
    the chunks are scheduled.
    """
    parity(initial_data_state)
    parts = [_run_chunk(config, initial_data_state, rng, n) for rng, n in _chunk_streams(config)]
    cols = [np.concatenate([p[i] for p in parts]) for i in range(6)]
    return CycleRecords(initial_data_state, *cols, config=config)


def run_all_inputs(config):
    """One record set per input data state (gg, ge, eg, ee), each with its own seed offset."""
    return [run_cycles(config.with_(rng_seed=config.rng_seed * 4 + k), s)
            for k, s in enumerate(INPUT_STATES)]


def _as_list(records):
    return records if isinstance(records, (list, tuple)) else [records]


@dataclass(frozen=True)
class LeakageCurves:
    cycles: np.ndarray
    aux: np.ndarray  # fraction of shots assigned |f>
    aux_sem: np.ndarray
    data: np.ndarray  # (n_cycles, 2) true data |f> population

    def to_csv(self, path):
        from .pulse import write_columns

        write_columns(path, ["cycle", "aux_Pf", "aux_Pf_sem", "data1_Pf", "data2_Pf"],
                      [self.cycles, self.aux, self.aux_sem, self.data[:, 0], self.data[:, 1]])


def leakage_population(records):
    """Per-cycle |f> population of the auxiliary (assigned) and data qubits (true state)."""
    recs = _as_list(records)
    if not recs:
        raise ValueError("no records")
    aux = np.concatenate([r.assigned == F for r in recs]).astype(float)
    data = np.concatenate([r.data_states == F for r in recs]).astype(float)
    mean = aux.mean(axis=0)
    sem = np.sqrt(mean * (1 - mean) / aux.shape[0])
    return LeakageCurves(np.arange(1, aux.shape[1] + 1), mean, sem, data.mean(axis=0))


def leakage_runs(records):
    """Lengths of runs of consecutive |f> assignments, one per detection event."""
    lengths = []
    for r in _as_list(records):
        f = (r.assigned == F).astype(np.int8)
        padded = np.pad(f, ((0, 0), (1, 1)))
        d = np.diff(padded, axis=1)
        starts = np.argwhere(d == 1)
        ends = np.argwhere(d == -1)
        # row-major order pairs each start with its end
        lengths.append(ends[:, 1] - starts[:, 1])
    return np.concatenate(lengths) if lengths else np.array([], int)


def leakage_lifetime(records):
    """Mean number of consecutive cycles read out in |f> per detection event, and its standard error."""
    runs = leakage_runs(records)
    if len(runs) == 0:
        raise NoEvents("no auxiliary leakage was detected")
    sem = runs.std(ddof=1) / np.sqrt(len(runs)) if len(runs) > 1 else np.inf
    return float(runs.mean()), float(sem)


def mean_syndrome(records, f_policy=None):
    """Mean syndrome element per cycle, averaged over shots and input states."""
    recs = _as_list(records)
    sig = np.concatenate([r.sigma(f_policy) for r in recs]).astype(float)
    return sig.mean(axis=0)


def leakage_reject(records, f_policy=None):
    """Drop, for each cycle m, the shots with an |f> assignment at or before m.

    Returns (mean syndrome of the retained shots, retained fraction), both per cycle.
    """
    recs = _as_list(records)
    sig = np.concatenate([r.sigma(f_policy) for r in recs]).astype(float)
    seen = np.concatenate([np.logical_or.accumulate(r.assigned == F, axis=1) for r in recs])
    keep = ~seen
    retained = keep.mean(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        sigma = np.where(keep.sum(axis=0) > 0, (sig * keep).sum(axis=0) / keep.sum(axis=0), np.nan)
    return sigma, retained


def markov_oracle(q, r, keep=1.0, n_cycles=50, q_readout=0.0, p0=0.0):
    """Exact auxiliary |f> population at each readout for the reduced model.

    Per cycle: injection ``q`` into the computational population, LRU
    survival ``keep``, readout injection ``q_readout``, then survival ``r``
    across the cycle boundary.  Returns (P_f for cycles 1..n, steady state).
    For small ``q`` the steady state approaches ``q / (1 - r keep)``.
    """
    out = np.empty(n_cycles)
    p = p0
    for m in range(n_cycles):
        p = keep * (p + (1 - p) * q)
        p = p + (1 - p) * q_readout
        out[m] = p
        p = r * p
    # fixed point of p -> keep (q + (1 - q) r p), then the readout step
    a = keep * (1 - q) * r
    base = keep * q / (1 - a) if a < 1 else 1.0
    steady = base + (1 - base) * q_readout
    return out, steady
