import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from qrho.algorithms import BackendFailure, ClassicalBackend, quantum_rho, quantum_rho_linear
from qrho.arith import CapacityError
from qrho.quantum_sim import (
    CircuitBackend,
    CircuitConfig,
    adder_shift,
    apply_u,
    continued_fraction_convergents,
    dumps_trace,
    extract_period,
    hadamard_layer,
    inverse_qft,
    inverse_qft_distribution,
    outcome_distribution,
    prepare_initial,
    register_sizes,
    run_period_finding,
    sample,
    simulate,
    trace,
)
from qrho.sequences import QuadraticFamily, closed_form_context, closed_form_g

from oracles import least_period


def config_143():
    ctx = closed_form_context(QuadraticFamily(1, 2, 143), 2)
    return CircuitConfig.build(143, lambda i: closed_form_g(ctx, i))


@pytest.fixture(scope="module")
def states():
    cfg = config_143()
    out = simulate(cfg)
    out["psi5"] = inverse_qft(out["psi4"], cfg.ell)
    return cfg, out


def dft_oracle(table, ell):
    """Direct double sum over the first register for each oracle class."""
    size = 2**ell
    probs = [0.0] * size
    for y in set(table):
        js = [j for j in range(size) if table[j] == y]
        for c in range(size):
            amp = sum(cmath.exp(2j * math.pi * j * c / size) for j in js) / size
            probs[c] += abs(amp) ** 2
    return np.array(probs)


def test_register_sizes():
    assert register_sizes(143) == (8, 15)
    assert register_sizes(209) == (8, 16)
    assert register_sizes(15) == (4, 8)
    for N in range(3, 2000):
        n, ell = register_sizes(N)
        assert 2 ** (n - 1) <= N < 2**n
        assert N * N < 2**ell <= 2 * N * N


def test_config_validation():
    with pytest.raises(ValueError):
        CircuitConfig(143, 7, 15, lambda i: 0, 143)
    with pytest.raises(ValueError):
        CircuitConfig(143, 8, 14, lambda i: 0, 143)


def test_initial_and_hadamard(states):
    cfg, s = states
    s0 = s["psi0"]
    assert s0.as_dict() == {(143, 0, 0): 1}
    s1 = s["psi1"]
    assert len(s1) == 32768
    assert np.allclose(s1.amplitudes, 1 / math.sqrt(32768), atol=1e-15, rtol=0)
    assert abs(s1.norm - 1) < 1e-12


def test_adder(states):
    _, s = states
    s1, s2 = s["psi1"], s["psi2"]
    assert sorted(s2.second) == list(range(143, 143 + 32768))
    back = adder_shift(s2, 143, "reverse")
    assert np.array_equal(back.second, s1.second)
    with pytest.raises(ValueError):
        adder_shift(s1, 143, "reverse")
    with pytest.raises(ValueError):
        adder_shift(s1, 143, "sideways")


def test_oracle_classes(states):
    _, s = states
    s3 = s["psi3"]
    lookup = dict(zip(s3.second.tolist(), s3.third.tolist()))
    assert [lookup[v] for v in (143, 144, 145, 146)] == [125, 2, 8, 80]
    assert s3.classes() == {125: 8192, 2: 8192, 8: 8192, 80: 8192}
    assert s["psi4"].classes() == s3.classes()


def test_operators_are_injective_and_norm_preserving(states):
    _, s = states
    for label in ("psi1", "psi2", "psi3", "psi4", "psi5"):
        st = s[label]
        assert abs(st.norm - 1) < 1e-12, label
        triples = set(zip(st.first.tolist(), st.second.tolist(), st.third.tolist()))
        assert len(triples) == len(st), label


def test_apply_u_requires_clean_target(states):
    cfg, s = states
    with pytest.raises(ValueError):
        apply_u(s["psi3"], cfg)
    with pytest.raises(ValueError):
        hadamard_layer(s["psi1"], cfg.ell)


def test_distribution_143(states):
    cfg, s = states
    dist = inverse_qft_distribution(s["psi4"], cfg.ell)
    assert abs(dist.probabilities.sum() - 1) < 1e-12
    for c in (0, 8192, 16384, 24576):
        assert abs(dist.probabilities[c] - 0.25) < 1e-9
    rest = np.delete(dist.probabilities, [0, 8192, 16384, 24576])
    assert rest.max() < 1e-9
    assert sorted(dist.support()) == [0, 8192, 16384, 24576]


def test_psi5_matches_distribution(states):
    cfg, s = states
    psi5 = s["psi5"]
    probs = np.zeros(2**cfg.ell)
    np.add.at(probs, psi5.second, np.abs(psi5.amplitudes) ** 2)
    assert np.allclose(probs, outcome_distribution(cfg).probabilities, atol=1e-12)


@pytest.mark.parametrize("N,a,shift", [(15, 2, 0), (15, 7, 3), (21, 2, 0), (21, 5, 21)])
def test_distribution_against_direct_sum(N, a, shift):
    cfg = CircuitConfig.build(N, lambda i: pow(a, i, N), shift=shift)
    got = outcome_distribution(cfg).probabilities
    want = dft_oracle([pow(a, shift + j, N) for j in range(2**cfg.ell)], cfg.ell)
    assert np.allclose(got, want, atol=1e-12)


def test_constant_oracle():
    cfg = CircuitConfig.build(35, lambda i: 7)
    dist = outcome_distribution(cfg)
    assert abs(dist.probabilities[0] - 1) < 1e-12
    assert run_period_finding(cfg)[0] == 1


@pytest.mark.parametrize("N,a", [(209, 3), (143, 2), (221, 2), (247, 5), (85, 2)])
def test_mass_concentrates_near_multiples(N, a):
    cfg = CircuitConfig.build(N, lambda i: pow(a, i, N), shift=0)
    probs = outcome_distribution(cfg).probabilities
    size = 2**cfg.ell
    r = least_period([pow(a, i, N) for i in range(2 * N)])
    c = np.arange(size)
    near = np.abs(c - np.round(c * r / size) * size / r) <= 0.5
    if size % r == 0:
        assert probs[~near].max() < 1e-12
        assert abs(probs[near].sum() - 1) < 1e-12
    else:
        assert probs[near].sum() >= 4 / math.pi**2


def test_sample_distribution(states):
    cfg, _ = states
    dist = outcome_distribution(cfg)
    rng = np.random.default_rng(0)
    draws = [sample(dist, rng) for _ in range(10_000)]
    assert set(draws) <= {0, 8192, 16384, 24576}
    sigma = math.sqrt(10_000 * 0.25 * 0.75)
    for c in (0, 8192, 16384, 24576):
        assert abs(draws.count(c) - 2500) <= 3 * sigma
    assert sample(dist, 5) == sample(dist, 5)


def test_sample_point_mass():
    cfg = CircuitConfig.build(35, lambda i: 7)
    assert sample(outcome_distribution(cfg), 0) == 0


def test_continued_fractions():
    assert [str(f) for f in continued_fraction_convergents(Fraction(3, 4))] == ["0", "1", "3/4"]
    assert list(continued_fraction_convergents(Fraction(415, 93)))[-1] == Fraction(415, 93)


def test_extract_period():
    assert extract_period(8192, 15, 143) == 4
    assert extract_period(24576, 15, 143) == 4
    assert extract_period(16384, 15, 143) == 2
    assert extract_period(0, 15, 143) is None
    with pytest.raises(ValueError):
        extract_period(2**15, 15, 143)


def test_extract_period_finds_reduced_denominators():
    ell, N = 16, 209
    for r in (5, 18, 45, 90):
        for k in range(1, r):
            c = round(k * 2**ell / r)
            q = extract_period(c, ell, N)
            assert q == Fraction(k, r).denominator


def test_run_period_finding_examples():
    cfg = config_143()
    rng = np.random.default_rng(0)
    attempts = []
    for _ in range(200):
        period, log = run_period_finding(cfg, rng=rng)
        assert period == 4
        attempts.append(len(log))
    # c = 0 (one draw in four) carries no phase information
    assert np.mean(attempts) < 2
    cfg = CircuitConfig.build(209, lambda i: pow(3, i, 209), shift=0)
    assert run_period_finding(cfg, rng=np.random.default_rng(1))[0] == 90


def test_run_period_finding_exhaustion():
    cfg = CircuitConfig.build(35, lambda i: pow(2, i, 35), shift=0)
    with pytest.raises(BackendFailure):
        run_period_finding(cfg, max_attempts=0)


def test_circuit_backend_end_to_end():
    res = quantum_rho(143, QuadraticFamily(1, 2, 143), 2, CircuitBackend(seed=4))
    assert res.factor == 13 and res.diagnostics["r_g"] == 4
    assert res.diagnostics["backend"] == "circuit-simulation"
    res = quantum_rho_linear(3, 209, CircuitBackend(seed=4))
    assert res.factor == 11 and res.diagnostics["r_g"] == 90


def test_circuit_backend_matches_classical_on_small_moduli():
    classical = ClassicalBackend()
    for N in (15, 21, 33, 35, 39, 51, 55, 57, 65, 77, 85, 91, 95):
        for a in range(2, 12):
            if math.gcd(a, N) != 1:
                continue
            c = quantum_rho_linear(a, N, classical)
            q = quantum_rho_linear(a, N, CircuitBackend(seed=a))
            assert (q.factor, q.diagnostics["r_g"]) == (c.factor, c.diagnostics["r_g"])


def test_circuit_backend_capacity_guard():
    with pytest.raises(CapacityError):
        quantum_rho_linear(3, 62615533, CircuitBackend())


def test_trace_format(states):
    cfg, _ = states
    t = trace(cfg, ("psi0", "psi3"))
    assert [s["label"] for s in t["stages"]] == ["psi0", "psi3"]
    assert t["stages"][0]["entries"] == [[143, 0, 0, 1.0, 0.0]]
    assert t["stages"][1]["classes"] == {"2": 8192, "8": 8192, "80": 8192, "125": 8192}
    assert t["distribution"] == {"0": 0.25, "8192": 0.25, "16384": 0.25, "24576": 0.25}
    assert dumps_trace(t) == dumps_trace(trace(cfg, ("psi0", "psi3")))
    brief = trace(cfg, ("psi3",), entries=False)
    assert "entries" not in brief["stages"][0]
