import numpy as np
import pytest

from fluxlru.errors import ConfigError, DomainError, NoEvents
from fluxlru.stabilizer import (
    StabilizerConfig,
    leakage_lifetime,
    leakage_population,
    leakage_reject,
    markov_oracle,
    mean_syndrome,
    run_all_inputs,
    run_cycles,
    syndrome,
)

IDENTITY = np.eye(3)

# every error channel switched off
QUIET = dict(
    gate_leak_aux=0.0, gate_leak_data=(0.0, 0.0), readout_leak_gg=0.0, readout_leak_ee=0.0,
    lru_residual=0.0, background_residual=0.0, transport_prob=0.0, pauli_error_prob=0.0,
    readout_confusion=IDENTITY, f_lifetime_cycles=np.inf, data_f_lifetime_cycles=np.inf,
)


def quiet(**changes):
    return StabilizerConfig(**{**QUIET, **changes})


@pytest.mark.parametrize("s, prev, expected", [(1, 1, 0), (-1, 1, 1), (1, -1, 1), (-1, -1, 0)])
def test_syndrome_table(s, prev, expected):
    assert syndrome(s, prev) == expected


def test_syndrome_domain():
    with pytest.raises(DomainError):
        syndrome(0, 1)
    with pytest.raises(DomainError):
        syndrome(np.array([1, 2]), np.array([1, 1]))
    assert np.array_equal(syndrome(np.array([1, -1]), np.array([-1, -1])), [1, 0])


def test_config_validation():
    with pytest.raises(ConfigError):
        StabilizerConfig(transport_prob=1.5)
    with pytest.raises(ConfigError):
        StabilizerConfig(readout_confusion=((1, 0, 0), (0, 1, 0), (0, 0.5, 0.4)))
    with pytest.raises(ConfigError):
        StabilizerConfig(f_policy="drop")
    with pytest.raises(ConfigError):
        run_cycles(StabilizerConfig(n_shots=10), "gf")


def test_config_from_mapping():
    cfg = StabilizerConfig.from_mapping({"lru_enabled": "on", "n_shots": "200", "gate_leak_data": "1e-4, 2e-4",
                                         "unrelated": "x"})
    assert cfg.lru_enabled and cfg.n_shots == 200 and cfg.gate_leak_data == (1e-4, 2e-4)
    with pytest.raises(ConfigError):
        StabilizerConfig.from_mapping({"transport_prob": "lots"})


@pytest.mark.parametrize("state", ["gg", "ge", "eg", "ee"])
def test_zero_error_run(state):
    rec = run_cycles(quiet(n_shots=300, n_cycles=20), state)
    assert np.all(rec.aux_state != 2)
    assert np.all(rec.sigma() == 0)
    curves = leakage_population(rec)
    assert np.all(curves.aux == 0) and np.all(curves.data == 0)
    assert np.all(mean_syndrome(rec) == 0)
    sigma, retained = leakage_reject(rec)
    assert np.all(retained == 1) and np.all(sigma == 0)
    with pytest.raises(NoEvents):
        leakage_lifetime(rec)


def test_injection_only_accumulation():
    cfg = quiet(n_shots=20000, n_cycles=50, gate_leak_aux=0.005, n_aux_gates=1, rng_seed=5)
    curves = leakage_population(run_cycles(cfg))
    for m in (1, 10, 50):
        expected = 1 - (1 - 0.005) ** m
        sem = np.sqrt(expected * (1 - expected) / cfg.n_shots)
        assert abs(curves.aux[m - 1] - expected) < 3 * sem + 1e-12


def test_retained_fraction():
    q = 0.01
    cfg = quiet(n_shots=20000, n_cycles=50, gate_leak_aux=q, n_aux_gates=1, rng_seed=6)
    _, retained = leakage_reject(run_cycles(cfg))
    for m in (5, 20, 50):
        expected = (1 - q) ** m
        sem = np.sqrt(expected * (1 - expected) / cfg.n_shots)
        assert abs(retained[m - 1] - expected) < 3 * sem


def test_geometric_lifetime():
    r = 0.5
    cfg = quiet(n_shots=5000, n_cycles=200, gate_leak_aux=1e-3, n_aux_gates=1,
                f_lifetime_cycles=-1.0 / np.log(r), rng_seed=7)
    mean, sem = leakage_lifetime(run_cycles(cfg))
    assert abs(mean - 1.0 / (1.0 - r)) < 3 * sem


def test_pauli_only_syndrome():
    q = 0.05
    cfg = quiet(n_shots=20000, n_cycles=30, pauli_error_prob=q, rng_seed=8)
    sig = mean_syndrome(run_cycles(cfg, "ge"))
    n = cfg.n_shots
    assert abs(sig[0] - q) < 3 * np.sqrt(q * (1 - q) / n)
    expected = 2 * q * (1 - q)
    sem = np.sqrt(expected * (1 - expected) / n)
    for m in (2, 10, 30):
        assert abs(sig[m - 1] - expected) < 3 * sem


def test_markov_oracle_trivial():
    out, steady = markov_oracle(0.0, 0.9, n_cycles=10, p0=0.4)
    assert np.allclose(out, 0.4 * 0.9 ** np.arange(10), atol=1e-15)
    assert steady == 0.0


def test_markov_oracle_steady_state():
    q, r, keep = 1e-3, 0.95, 0.2
    out, steady = markov_oracle(q, r, keep, n_cycles=2000)
    assert out[-1] == pytest.approx(steady, rel=1e-12)
    # leading order of the fixed point
    assert steady == pytest.approx(q * keep / (1 - r * keep), rel=2 * q)


@pytest.mark.parametrize("lru", [False, True])
def test_run_matches_markov_oracle(lru):
    q_gate, lifetime, q_ro = 2e-3, 10.0, 1e-3
    cfg = quiet(n_shots=100_000, n_cycles=50, gate_leak_aux=q_gate, n_aux_gates=1,
                f_lifetime_cycles=lifetime, readout_leak_gg=q_ro, readout_leak_ee=q_ro,
                lru_enabled=lru, lru_residual=0.05, background_residual=0.0, rng_seed=11)
    curves = leakage_population(run_cycles(cfg))
    keep = 0.05 if lru else 1.0
    oracle, _ = markov_oracle(q_gate, np.exp(-1 / lifetime), keep, 50, q_readout=q_ro)
    for m in (10, 50):
        sem = np.sqrt(oracle[m - 1] * (1 - oracle[m - 1]) / cfg.n_shots)
        assert abs(curves.aux[m - 1] - oracle[m - 1]) < 3 * sem


def test_reproducible_records():
    cfg = StabilizerConfig(n_shots=3000, n_cycles=20, rng_seed=42, chunk_size=1000)
    a, b = run_cycles(cfg, "eg"), run_cycles(cfg, "eg")
    for name in ("aux_state", "assigned", "data_states", "flip", "data_coin", "f_coin"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = run_cycles(cfg.with_(rng_seed=43), "eg")
    assert not np.array_equal(a.assigned, c.assigned)


def test_records_csv(tmp_path):
    rec = run_cycles(StabilizerConfig(n_shots=4, n_cycles=3, rng_seed=1))
    rec.to_csv(tmp_path / "rec.csv")
    lines = (tmp_path / "rec.csv").read_text().splitlines()
    assert lines[0] == "shot,cycle,aux,s,sigma"
    assert len(lines) == 1 + 4 * 3


def test_curves_are_probabilities():
    recs = run_all_inputs(StabilizerConfig(n_shots=2000, n_cycles=30, rng_seed=2))
    curves = leakage_population(recs)
    assert np.all((curves.aux >= 0) & (curves.aux <= 1))
    assert np.all((curves.data >= 0) & (curves.data <= 1))
    sig = mean_syndrome(recs)
    assert np.all((sig >= 0) & (sig <= 1))


def test_monotone_harm():
    base = StabilizerConfig(n_shots=20000, n_cycles=50, rng_seed=3)
    low = leakage_population(run_cycles(base)).aux[-1]
    high_curves = leakage_population(run_cycles(base.with_(gate_leak_aux=1e-3)))
    high = high_curves.aux[-1]
    assert high > low - 3 * high_curves.aux_sem[-1]


def test_lru_reduces_data_leakage():
    base = StabilizerConfig(n_shots=20000, n_cycles=50, rng_seed=4)
    off = leakage_population(run_all_inputs(base))
    on = leakage_population(run_all_inputs(base.with_(lru_enabled=True)))
    assert on.data[-1].sum() < off.data[-1].sum()
    assert on.aux[-1] < off.aux[-1] - 3 * np.hypot(on.aux_sem[-1], off.aux_sem[-1])


def test_f_policy_choice_matters_only_for_leaked_shots():
    cfg = StabilizerConfig(n_shots=2000, n_cycles=20, rng_seed=12)
    rec = run_cycles(cfg)
    a = rec.measured_s("map_f_to_random")
    b = rec.measured_s("map_f_to_e")
    differ = a != b
    assert np.all(rec.assigned[differ] == 2)
