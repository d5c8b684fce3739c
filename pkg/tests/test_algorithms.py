import math
import random

import pytest

from qrho.algorithms import (
    BackendFailure,
    ClassicalBackend,
    FactorConfig,
    PeriodQuery,
    cyclotomic_cofactor,
    divisors,
    extended_shor,
    factor,
    pollard_rho_classical,
    quantum_rho,
    quantum_rho_linear,
    shor,
)
from qrho.arith import CapacityError, PrimePower
from qrho.sequences import LinearFamily, Polynomial, QuadraticFamily

from oracles import factor_trial, is_prime_trial, naive_order, sequence, slow_pow

N_SEMI = 62615533
BACKEND = ClassicalBackend()
SMALL_PRIMES = [p for p in range(3, 120) if is_prime_trial(p)]


def rho_oracle(N, c, x0):
    """Floyd by explicit sequence: first i with x_i != x_2i mod N but equal mod some factor."""
    step = Polynomial.raw(2, c).step(N)
    seq = [x0 % N]
    i = 0
    while True:
        i += 1
        while len(seq) <= 2 * i:
            seq.append(step(seq[-1]))
        g = math.gcd(seq[2 * i] - seq[i], N)
        if g == N:
            return None
        if g > 1:
            return g


def search_oracle(values_at, anchor, r, N):
    """Try d over the small primes dividing r, pairs (anchor, anchor + r/d)."""
    primes = [p for p in range(2, 10**4) if is_prime_trial(p)][: N.bit_length()]
    for d in primes:
        if r % d:
            continue
        g = math.gcd(values_at(anchor + r // d) - values_at(anchor), N)
        if 1 < g < N:
            return g, d
    return None, None


def test_divisors_examples():
    # 15649927 = 37 * 59 * 67 * 107; 37 is the first small prime that divides it
    assert divisors(15649927, N_SEMI) == [37, 59, 67]
    assert divisors(15649927, N_SEMI)[0] == 37
    assert divisors(608652, N_SEMI)[0] == 2
    assert divisors(1, N_SEMI) == []
    assert divisors(90, 209) == [2, 3, 5]


def test_cyclotomic_cofactor_identity():
    N = 9991
    for x in (2, 3, 10, 1234):
        r = naive_order(x, N)
        assert cyclotomic_cofactor(x, r, 1, N) == 1
        for d in (2, 3, 5, 7):
            if r % d:
                continue
            s = cyclotomic_cofactor(x, r, d, N)
            assert (pow(x, r // d, N) - 1) * s % N == (pow(x, r, N) - 1) % N
            if d == 2:
                assert s == (pow(x, r // 2, N) + 1) % N
            if d == 3:
                assert s == (1 + pow(x, r // 3, N) + pow(x, 2 * r // 3, N)) % N
    with pytest.raises(ValueError):
        cyclotomic_cofactor(2, 10, 3, N)


def test_rho_examples():
    res = pollard_rho_classical(3127, Polynomial.raw(2, 8), 2)
    assert res.found and 3127 % res.factor == 0
    assert res.factor == rho_oracle(3127, 8, 2) == 59
    assert not pollard_rho_classical(3551, Polynomial.raw(2, 8), 38).found
    res = pollard_rho_classical(3127, Polynomial.raw(2, -2), 2)
    assert not res.found and res.diagnostics["iterations"] == 1


def test_rho_matches_oracle():
    rng = random.Random(1)
    for _ in range(300):
        p, q = rng.sample(SMALL_PRIMES, 2)
        N, c, x0 = p * q, rng.randrange(-3, 30), rng.randrange(p * q)
        assert pollard_rho_classical(N, Polynomial.raw(2, c), x0).factor == rho_oracle(N, c, x0)


def test_shor_examples():
    res = shor(3, 209, BACKEND)
    assert res.factor == 11 and res.diagnostics["r"] == 90
    res = shor(3, N_SEMI, BACKEND)
    assert not res.found and res.diagnostics["r"] == 15649927
    # 12^2 = 1 mod 143 with 12 != +-1
    assert slow_pow(12, 2, 143) == 1
    assert shor(12, 143, BACKEND).factor == 11
    assert shor(22, 143, BACKEND).factor == 11


def test_extended_shor_examples():
    res = extended_shor(3, N_SEMI, BACKEND)
    assert res.factor == 7907 and res.diagnostics["d"] == 37
    res = extended_shor(3, 209, BACKEND)
    assert res.factor == 11 and res.diagnostics["d"] == 2
    # -1 has order 2, its only divisor gives gcd(-2, N) = 1
    assert not extended_shor(142, 143, BACKEND).found


def test_shor_family_matches_oracle():
    for p, q in [(3, 5), (5, 7), (7, 11), (11, 13), (13, 17), (11, 19)]:
        N = p * q
        for x in range(2, N - 1):
            if math.gcd(x, N) != 1:
                continue
            r = naive_order(x, N)
            expect = None
            if r % 2 == 0 and slow_pow(x, r // 2, N) != N - 1:
                g = math.gcd(slow_pow(x, r // 2, N) - 1, N)
                expect = g if 1 < g < N else None
            assert shor(x, N, BACKEND).factor == expect
            g, _ = search_oracle(lambda i: slow_pow(x, i, N), 0, r, N)
            assert extended_shor(x, N, BACKEND).factor == g


def test_preconditions():
    for bad in (7, 49, 2, 1):
        with pytest.raises(ValueError):
            shor(3, bad, BACKEND)
    with pytest.raises(ValueError):
        quantum_rho_linear(3, 121, BACKEND)


def test_quantum_rho_small_example():
    res = quantum_rho(143, QuadraticFamily(1, 2, 143), 2, BACKEND)
    d = res.diagnostics
    assert res.factor == 13 and d["d"] == 2 and d["r_g"] == 4 and d["r"] == 15
    assert d["witness"]["i"] == 143 and d["witness"]["j"] == 145


def test_quantum_rho_alpha_shares_factor():
    res = quantum_rho(143, QuadraticFamily(1, 2, 143), 10, BACKEND)
    assert res.factor == 11


def test_quantum_rho_matches_iteration_oracle():
    rng = random.Random(7)
    checked = 0
    while checked < 150:
        p, q = rng.sample(SMALL_PRIMES, 2)
        N = p * q
        a = rng.randrange(1, N)
        if math.gcd(2 * a, N) != 1:
            continue
        fam = QuadraticFamily(a, rng.randrange(N), N)
        x0 = rng.randrange(N)
        if math.gcd(fam.alpha(x0), N) != 1:
            continue
        # iterate past N, then find the period of the tail by brute force
        seq = sequence(fam.step(), x0, 3 * N + 2)
        r_g = next(k for k in range(1, N + 1) if seq[N] == seq[N + k])
        g, d = search_oracle(lambda i: seq[i], N, r_g, N)
        res = quantum_rho(N, fam, x0, BACKEND)
        assert res.diagnostics["r_g"] == r_g
        assert res.factor == g and res.diagnostics.get("d") == d
        checked += 1


def test_quantum_rho_linear_examples():
    res = quantum_rho_linear(3, 209, BACKEND)
    d = res.diagnostics
    assert res.factor == 11 and d["r_g"] == 90
    assert (d["witness"]["i"], d["witness"]["j"]) == (0, 45)
    res = quantum_rho_linear(3, N_SEMI, BACKEND)
    assert res.factor == 7907 and res.diagnostics["d"] == 37 and res.diagnostics["r_g"] == 15649927
    res = quantum_rho_linear(142, 143, BACKEND)
    assert not res.found and res.diagnostics["r_g"] == 2


def test_classical_backend_period_checks():
    q = PeriodQuery(lambda i: pow(3, i, 209), 0, 209)
    assert BACKEND.period_of(q) == 90
    q = PeriodQuery(lambda i: pow(3, i, 209), 0, 209, LinearFamily(3, 209).step())
    assert BACKEND.period_of(q) == 90
    with pytest.raises(CapacityError):
        ClassicalBackend(max_steps=10).order_of(3, 209)


@pytest.mark.parametrize(
    "N,expected",
    [
        (143, [(11, 1), (13, 1)]),
        (N_SEMI, [(7907, 1), (7919, 1)]),
        (343, [(7, 3)]),
        (7, [(7, 1)]),
        (2**10 * 3**4, [(2, 10), (3, 4)]),
    ],
)
def test_factor_examples(N, expected):
    fz = factor(N)
    assert fz.complete and fz.factors == [PrimePower(p, e) for p, e in expected]


def test_factor_without_trial_division_uses_strategies():
    fz = factor(N_SEMI, FactorConfig(trial_bound=2))
    assert str(fz) == "7907 * 7919"
    assert any(s.get("algorithm") for s in fz.steps)
    fz = factor(1000003 * 1000033, FactorConfig(trial_bound=100))
    assert str(fz) == "1000003 * 1000033"


def test_factor_matches_trial_oracle():
    rng = random.Random(3)
    for _ in range(200):
        N = rng.randrange(2, 10**7)
        fz = factor(N, FactorConfig(trial_bound=50, seed=N))
        assert fz.complete
        assert dict(fz.factors) == factor_trial(N)


def test_factor_partial_when_strategies_exhausted():
    fz = factor(3127, FactorConfig(trial_bound=2, strategies=(), attempts=1))
    assert not fz.complete and fz.remainder == 3127
    assert "[3127]" in str(fz)
