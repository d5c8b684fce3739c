"""Amplitude-exact simulation of the period-finding circuit.

Three registers: |N>_n |i>_ell |y>_n.  The operators act as whole-register
maps on basis states (Hadamard layer, shift adder, oracle U, inverse QFT);
there is no gate-level decomposition.  A state is a sparse list of basis
triples with complex amplitudes, stored as parallel numpy arrays.

The inverse QFT is evaluated per value of the third register (implicit
measurement of that register), so no 2^(n+ell+n) vector is ever built.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .algorithms import BackendFailure, PeriodQuery
from .arith import CapacityError, trial_factor

MAX_ELL = 24
NORM_TOL = 1e-12


def register_sizes(N: int) -> tuple[int, int]:
    """``(n, ell)``: bits of N, and the smallest ell with 2^ell > N^2."""
    n = N.bit_length()
    ell = (N * N).bit_length()
    return n, ell


@dataclass(frozen=True)
class CircuitConfig:
    N: int
    n: int
    ell: int
    oracle: Callable[[int], int]
    shift: int
    seed: int = 0

    def __post_init__(self):
        if self.n != self.N.bit_length():
            raise ValueError(f"n must be {self.N.bit_length()} for N = {self.N}")
        if 2**self.ell < self.N * self.N:
            raise ValueError(f"2^{self.ell} < N^2")

    @classmethod
    def build(cls, N: int, oracle: Callable[[int], int], shift: int | None = None, seed: int = 0) -> "CircuitConfig":
        """Standard sizing; the adder shifts by N unless told otherwise."""
        n, ell = register_sizes(N)
        return cls(N, n, ell, oracle, N if shift is None else shift, seed)

    def table(self) -> np.ndarray:
        """Oracle values over the shifted second register ``shift + i``; built once."""
        cached = self.__dict__.get("_table")
        if cached is None:
            cached = np.fromiter(
                (self.oracle(self.shift + i) for i in range(2**self.ell)), dtype=np.int64, count=2**self.ell
            )
            cached.setflags(write=False)
            object.__setattr__(self, "_table", cached)
        return cached


@dataclass(frozen=True)
class RegisterState:
    label: str
    first: np.ndarray
    second: np.ndarray
    third: np.ndarray
    amplitudes: np.ndarray

    def __len__(self) -> int:
        return len(self.amplitudes)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def as_dict(self) -> dict[tuple[int, int, int], complex]:
        return {
            (int(a), int(b), int(c)): complex(z)
            for a, b, c, z in zip(self.first, self.second, self.third, self.amplitudes)
        }

    def classes(self) -> dict[int, int]:
        """Third-register value -> number of basis states carrying it."""
        values, counts = np.unique(self.third, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def to_json(self, digits: int = 12, entries: bool = True) -> dict:
        keep = np.abs(self.amplitudes) >= 10.0**-digits
        out = {
            "label": self.label,
            "support_size": int(np.count_nonzero(keep)),
            "norm": round(self.norm, digits),
            "classes": {str(k): v for k, v in self.classes().items()},
        }
        if entries:
            out["entries"] = [
                [int(a), int(b), int(c), round(float(z.real), digits), round(float(z.imag), digits)]
                for a, b, c, z in zip(
                    self.first[keep], self.second[keep], self.third[keep], self.amplitudes[keep]
                )
            ]
        return out


def _check_norm(state: RegisterState) -> RegisterState:
    if abs(state.norm - 1.0) > NORM_TOL * max(1, math.sqrt(len(state))):
        raise AssertionError(f"{state.label}: norm {state.norm} drifted from 1")
    return state


def prepare_initial(config: CircuitConfig) -> RegisterState:
    one = np.array([0], dtype=np.int64)
    return RegisterState("psi0", one + config.N, one.copy(), one.copy(), np.ones(1, dtype=complex))


def hadamard_layer(state: RegisterState, ell: int) -> RegisterState:
    """H on every qubit of the second register, which must hold |0>."""
    if np.any(state.second != 0):
        raise ValueError("second register is not |0>")
    size = 2**ell
    idx = np.repeat(np.arange(len(state)), size)
    second = np.tile(np.arange(size, dtype=np.int64), len(state))
    amps = state.amplitudes[idx] / math.sqrt(size)
    return _check_norm(RegisterState("psi1", state.first[idx], second, state.third[idx], amps))


def adder_shift(state: RegisterState, amount: int, direction: str = "forward") -> RegisterState:
    """Second register ``i -> amount + i`` (or back).

    Register values are exact integers, so the adder's overflow qubit is
    implicit.
    """
    if direction == "forward":
        second, label = state.second + amount, "psi2"
    elif direction == "reverse":
        second, label = state.second - amount, "psi4"
        if np.any(second < 0):
            raise ValueError("reverse adder applied to an unshifted register")
    else:
        raise ValueError(f"direction must be 'forward' or 'reverse', got {direction!r}")
    return RegisterState(label, state.first, second, state.third, state.amplitudes)


def apply_u(state: RegisterState, config: CircuitConfig, table: np.ndarray | None = None) -> RegisterState:
    """``|i>|y> -> |i>|y XOR oracle(i)>`` on the second/third registers.

    ``table`` is the oracle tabulated over ``shift + i``; it is built from the
    config when not supplied.
    """
    if np.any(state.third != 0):
        raise ValueError("third register is not |0>")
    if table is None:
        values = np.array([config.oracle(int(j)) for j in state.second], dtype=np.int64)
    else:
        values = table[state.second - config.shift]
    return _check_norm(
        RegisterState("psi3", state.first, state.second, state.third ^ values, state.amplitudes)
    )


def _class_spectra(state: RegisterState, ell: int):
    """Yield (first-register value, third-register value, inverse-QFT column)."""
    size = 2**ell
    keys = np.stack([state.first, state.third], axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    for k, (first, third) in enumerate(uniq):
        mask = inverse == k
        column = np.zeros(size, dtype=complex)
        np.add.at(column, state.second[mask], state.amplitudes[mask])
        # sum_j a_j exp(+2 pi i j k / 2^ell) / 2^(ell/2)
        yield int(first), int(third), np.fft.ifft(column) * math.sqrt(size)


def inverse_qft(state: RegisterState, ell: int, cutoff: float = 1e-13) -> RegisterState:
    """Full psi5; amplitudes with modulus below ``cutoff`` are dropped."""
    if np.any((state.second < 0) | (state.second >= 2**ell)):
        raise ValueError("second register outside [0, 2^ell)")
    parts = []
    for first, third, spec in _class_spectra(state, ell):
        nz = np.flatnonzero(np.abs(spec) >= cutoff)
        parts.append((np.full(len(nz), first), nz, np.full(len(nz), third), spec[nz]))
    first, second, third, amps = (np.concatenate(p) for p in zip(*parts))
    return RegisterState("psi5", first.astype(np.int64), second.astype(np.int64), third.astype(np.int64), amps)


@dataclass(frozen=True)
class OutcomeDistribution:
    ell: int
    probabilities: np.ndarray  # dense over c in [0, 2^ell)

    @property
    def cdf(self) -> np.ndarray:
        cached = self.__dict__.get("_cdf")
        if cached is None:
            cached = np.cumsum(self.probabilities)
            object.__setattr__(self, "_cdf", cached)
        return cached

    def support(self, tol: float = 1e-9) -> dict[int, float]:
        nz = np.flatnonzero(self.probabilities > tol)
        return {int(c): float(self.probabilities[c]) for c in nz}


def inverse_qft_distribution(state: RegisterState, ell: int) -> OutcomeDistribution:
    """First-register measurement distribution after the inverse QFT."""
    if np.any((state.second < 0) | (state.second >= 2**ell)):
        raise ValueError("second register outside [0, 2^ell)")
    probs = np.zeros(2**ell)
    for _, _, spec in _class_spectra(state, ell):
        probs += np.abs(spec) ** 2
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise AssertionError(f"outcome mass {total} != 1")
    return OutcomeDistribution(ell, probs)


def sample(dist: OutcomeDistribution, rng: np.random.Generator | int) -> int:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    cdf = dist.cdf
    c = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(c, len(cdf) - 1)


def continued_fraction_convergents(x: Fraction):
    """Yield the convergents h/k of a non-negative rational in order."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    num, den = x.numerator, x.denominator
    while den:
        a, rem = divmod(num, den)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        num, den = den, rem


def extract_period(c: int, ell: int, N: int) -> int | None:
    """Smallest convergent denominator q <= N of c/2^ell within 1/2^ell."""
    if not 0 <= c < 2**ell:
        raise ValueError(f"outcome {c} outside [0, 2^{ell})")
    if c == 0:
        return None
    x = Fraction(c, 2**ell)
    tol = Fraction(1, 2**ell)
    for conv in continued_fraction_convergents(x):
        q = conv.denominator
        if q > N:
            break
        if abs(x - conv) <= tol:
            return q
    return None


def simulate(config: CircuitConfig) -> dict[str, RegisterState]:
    """Psi0 .. Psi4 for the config (psi5 is produced by :func:`inverse_qft`)."""
    if config.ell > MAX_ELL:
        raise CapacityError(f"ell = {config.ell} exceeds the simulation limit {MAX_ELL}")
    table = config.table()
    s0 = prepare_initial(config)
    s1 = hadamard_layer(s0, config.ell)
    s2 = adder_shift(s1, config.shift)
    s3 = apply_u(s2, config, table)
    s4 = adder_shift(s3, config.shift, "reverse")
    return {s.label: s for s in (s0, s1, s2, s3, s4)}


_DIST_CACHE: dict[tuple, OutcomeDistribution] = {}


def outcome_distribution(config: CircuitConfig) -> OutcomeDistribution:
    """Distribution of the measured first register for this circuit.

    Deterministic in the oracle table, so results are cached by its digest.
    """
    table = config.table()
    key = (config.N, config.ell, config.shift, hashlib.sha256(table.tobytes()).hexdigest())
    dist = _DIST_CACHE.get(key)
    if dist is None:
        states = simulate(config)
        dist = inverse_qft_distribution(states["psi4"], config.ell)
        if len(_DIST_CACHE) > 32:
            _DIST_CACHE.clear()
        _DIST_CACHE[key] = dist
    return dist


def _is_period(config: CircuitConfig, r: int) -> bool:
    # The oracle is an orbit of an iterated map, so one coincidence at the
    # anchor makes r a period of the whole sequence.
    return config.oracle(config.shift) == config.oracle(config.shift + r)


def _least_period(config: CircuitConfig, r: int) -> int:
    found, rest = trial_factor(r, math.isqrt(r) + 2)
    primes = sorted(found) + ([rest] if rest > 1 else [])
    for p in primes:
        while r % p == 0 and _is_period(config, r // p):
            r //= p
    return r


def run_period_finding(
    config: CircuitConfig, max_attempts: int = 16, rng: np.random.Generator | None = None
) -> tuple[int, list[dict]]:
    """Measure, extract and verify until a period is confirmed.

    Returns ``(period, attempts)`` where ``attempts`` logs every measurement.
    Candidate denominators are lcm-combined across attempts, since a
    convergent may give only a divisor of the period.
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    dist = outcome_distribution(config)
    combined = 1
    log = []
    for attempt in range(max_attempts):
        c = sample(dist, rng)
        q = extract_period(c, config.ell, config.N)
        if c == 0:
            # no phase information, but a constant oracle has period 1
            q = 1
        entry = {"attempt": attempt, "c": c, "q": q}
        log.append(entry)
        if q is None:
            continue
        if _is_period(config, q):
            entry["accepted"] = q
            return _least_period(config, q), log
        combined = math.lcm(combined, q)
        if _is_period(config, combined):
            entry["accepted"] = combined
            return _least_period(config, combined), log
    raise BackendFailure(f"no period confirmed after {max_attempts} attempts")


class CircuitBackend:
    """Backend answering order/period queries by simulating the circuit."""

    mode = "circuit-simulation"

    def __init__(self, seed: int = 0, max_attempts: int = 16, max_ell: int = MAX_ELL):
        self.rng = np.random.default_rng(seed)
        self.max_attempts = max_attempts
        self.max_ell = max_ell
        self.history: list[dict] = []

    def _run(self, config: CircuitConfig, kind: str) -> int:
        if config.ell > self.max_ell:
            raise CapacityError(f"ell = {config.ell} exceeds the simulation limit {self.max_ell}")
        period, log = run_period_finding(config, self.max_attempts, self.rng)
        self.history.append({"query": kind, "N": config.N, "period": period, "measurements": log})
        return period

    def order_of(self, x: int, N: int) -> int:
        # Purely periodic from index 0, so no shift is needed.
        return self._run(CircuitConfig.build(N, lambda i: pow(x, i, N), shift=0), "order")

    def period_of(self, query: PeriodQuery) -> int:
        return self._run(CircuitConfig.build(query.N, query.func, shift=query.start), "period")


def trace(config: CircuitConfig, stages: tuple[str, ...] | None = None, entries: bool = True) -> dict:
    """JSON-ready snapshot of every stage plus the outcome distribution."""
    states = simulate(config)
    states["psi5"] = inverse_qft(states["psi4"], config.ell)
    wanted = stages or tuple(states)
    dist = outcome_distribution(config)
    return {
        "N": config.N,
        "n": config.n,
        "ell": config.ell,
        "shift": config.shift,
        "stages": [states[label].to_json(entries=entries) for label in wanted],
        "distribution": {str(c): round(p, 12) for c, p in dist.support().items()},
    }


def dumps_trace(data: dict) -> str:
    return json.dumps(data, sort_keys=True)
