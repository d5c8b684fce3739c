"""Collision classification and the cycle-length characterization of
nontrivial collisions.

For ``N = A*B`` with A, B coprime, an in-cycle pair ``(x, f^m(x))`` gives a
proper factor exactly when m is a multiple of one shadow cycle length
(lambda_A or lambda_B) but not the other.  Such an m exists iff
lambda_A != lambda_B, and ``lcm(lambda_A, lambda_B) / t`` works for any
prime t whose exponent differs between the two.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .arith import CapacityError, is_probable_prime, trial_factor
from .sequences import CycleShape, Polynomial, cycle_shape_bruteforce

DEFAULT_TRIAL_BOUND = 10**6


class CollisionKind(enum.Enum):
    NOT_COLLISION = "not-collision"
    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"


@dataclass(frozen=True)
class CollisionWitness:
    i: int | None
    j: int | None
    gcd_value: int
    kind: CollisionKind

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "gcd": self.gcd_value, "kind": self.kind.value}


def classify(n_i: int, n_j: int, N: int, i: int | None = None, j: int | None = None) -> CollisionWitness:
    """Classify the pair by ``gcd(|n_i - n_j|, N)``."""
    g = math.gcd(abs(n_i - n_j), N)
    if g == N:
        kind = CollisionKind.TRIVIAL
    elif g == 1:
        kind = CollisionKind.NOT_COLLISION
    else:
        kind = CollisionKind.NONTRIVIAL
    return CollisionWitness(i, j, g, kind)


def prime_exponent(t: int, n: int) -> int:
    """Largest e with ``t**e`` dividing n (0 when t does not divide n)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not is_probable_prime(t):
        raise ValueError(f"{t} is not prime")
    e = 0
    while n % t == 0:
        n //= t
        e += 1
    return e


def _factor(n: int, bound: int) -> dict[int, int]:
    found, rest = trial_factor(n, bound)
    if rest != 1:
        if not is_probable_prime(rest):
            raise CapacityError(f"cannot factor {n}: composite cofactor {rest} above trial bound {bound}")
        found[rest] = found.get(rest, 0) + 1
    return found


@dataclass(frozen=True)
class DistinguishingPrime:
    t: int
    e_A: int
    e_B: int


def distinguishing_primes(lambda_A: int, lambda_B: int, bound: int = DEFAULT_TRIAL_BOUND) -> list[DistinguishingPrime]:
    """Primes whose exponents differ between the two numbers, ascending."""
    if lambda_A < 1 or lambda_B < 1:
        raise ValueError("cycle lengths must be >= 1")
    fa, fb = _factor(lambda_A, bound), _factor(lambda_B, bound)
    out = []
    for t in sorted(set(fa) | set(fb)):
        ea, eb = fa.get(t, 0), fb.get(t, 0)
        if ea != eb:
            out.append(DistinguishingPrime(t, ea, eb))
    return out


def construct_m(lambda_A: int, lambda_B: int, bound: int = DEFAULT_TRIAL_BOUND) -> int | None:
    """An offset m < lcm that is a multiple of exactly one of the two lengths.

    Uses the smallest distinguishing prime t and returns ``lcm / t``; that is a
    multiple of whichever side has the smaller exponent of t.
    """
    primes = distinguishing_primes(lambda_A, lambda_B, bound)
    if not primes:
        return None
    return math.lcm(lambda_A, lambda_B) // primes[0].t


@dataclass
class CharacterizationReport:
    N: int
    A: int
    B: int
    shape: CycleShape
    lambda_A: int
    lambda_B: int
    lam: int
    distinguishing: list[DistinguishingPrime]
    m: int | None
    witness: CollisionWitness | None
    nontrivial_pair_exists: bool
    # in-cycle x for which f^m(x) - x did NOT give a proper factor
    counterexamples: list[int] = field(default_factory=list)
    # one (t, witness) per distinguishing prime, offset lcm/t
    per_prime: list[tuple[int, CollisionWitness]] = field(default_factory=list)

    @property
    def mu(self) -> int:
        return self.shape.mu

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "A": self.A,
            "B": self.B,
            "mu": self.shape.mu,
            "lambda": self.lam,
            "lambda_A": self.lambda_A,
            "lambda_B": self.lambda_B,
            "lcm_matches": math.lcm(self.lambda_A, self.lambda_B) == self.lam,
            "distinguishing_primes": [
                {"t": d.t, "e_A": d.e_A, "e_B": d.e_B} for d in self.distinguishing
            ],
            "m": self.m,
            "witness": self.witness.to_dict() if self.witness else None,
            "nontrivial_pair_exists": self.nontrivial_pair_exists,
            "counterexamples": self.counterexamples,
            "per_prime_witnesses": [
                {"t": t, "m": w.j - w.i, **w.to_dict()} for t, w in self.per_prime
            ],
        }


def cycle_elements(step, x0: int, shape: CycleShape) -> list[int]:
    x = x0
    for _ in range(shape.mu):
        x = step(x)
    out = []
    for _ in range(shape.lam):
        out.append(x)
        x = step(x)
    return out


def has_nontrivial_pair(cycle: list[int], N: int) -> bool:
    """Brute force over every in-cycle pair (x, f^k(x)), 0 < k < lambda."""
    lam = len(cycle)
    if N >= 2**62:
        return any(
            1 < math.gcd(cycle[(idx + k) % lam] - x, N) < N
            for k in range(1, lam)
            for idx, x in enumerate(cycle)
        )
    arr = np.array(cycle, dtype=np.int64)
    for k in range(1, lam):
        g = np.gcd(np.abs(np.roll(arr, -k) - arr), N)
        if np.any((g > 1) & (g < N)):
            return True
    return False


def verify_characterization(poly: Polynomial, x0: int, A: int, B: int) -> CharacterizationReport:
    """Check the characterization on one concrete orbit by brute force.

    Computes the cycle shapes mod N, A and B, builds m from the shadow lengths
    and tests ``gcd(f^m(x) - x, N)`` for every x on the mod-N cycle.  Any x
    where that gcd is not a proper factor is recorded, not raised.
    """
    if A < 2 or B < 2:
        raise ValueError("A and B must both exceed 1")
    if math.gcd(A, B) != 1:
        raise ValueError(f"A = {A} and B = {B} are not coprime")
    N = A * B
    step = poly.step(N)
    x0 %= N
    shape = cycle_shape_bruteforce(step, x0)
    lam_a = cycle_shape_bruteforce(poly.step(A), x0 % A).lam
    lam_b = cycle_shape_bruteforce(poly.step(B), x0 % B).lam
    cycle = cycle_elements(step, x0, shape)
    dist = distinguishing_primes(lam_a, lam_b)
    m = construct_m(lam_a, lam_b)
    witness = None
    bad: list[int] = []
    if m is not None:
        lam = shape.lam
        for idx, x in enumerate(cycle):
            w = classify(cycle[(idx + m) % lam], x, N)
            if w.kind is not CollisionKind.NONTRIVIAL:
                bad.append(x)
        first = cycle[0]
        w = classify(cycle[m % lam], first, N)
        witness = CollisionWitness(shape.mu, shape.mu + m, w.gcd_value, w.kind)
    per_prime = []
    for d in dist:
        off = math.lcm(lam_a, lam_b) // d.t
        w = classify(cycle[off % shape.lam], cycle[0], N)
        per_prime.append((d.t, CollisionWitness(shape.mu, shape.mu + off, w.gcd_value, w.kind)))
    return CharacterizationReport(
        N=N,
        A=A,
        B=B,
        shape=shape,
        lambda_A=lam_a,
        lambda_B=lam_b,
        lam=shape.lam,
        distinguishing=dist,
        m=m,
        witness=witness,
        nontrivial_pair_exists=has_nontrivial_pair(cycle, N),
        counterexamples=bad,
        per_prime=per_prime,
    )
