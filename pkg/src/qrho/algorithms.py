"""Factoring procedures built on an order/period backend.

All quantum steps go through a backend object with two queries:

* ``order_of(x, N)``: multiplicative order of x mod N
* ``period_of(query)``: least period of a purely periodic index -> value map

``ClassicalBackend`` answers them exactly by iteration.  The circuit simulator
in :mod:`qrho.quantum_sim` answers the same queries by sampling the
period-finding circuit, and may fail with :class:`BackendFailure`.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Protocol

from .arith import (
    CapacityError,
    NotCoprimeError,
    PrimePower,
    as_prime_power,
    first_primes,
    is_probable_prime,
    multiplicative_order,
    trial_factor,
)
from .collisions import CollisionKind, classify
from .sequences import (
    ClosedFormContext,
    LinearFamily,
    Polynomial,
    QuadraticFamily,
    Step,
    closed_form_g,
)

log = logging.getLogger(__name__)


class BackendFailure(RuntimeError):
    """The backend could not produce an answer this time; retrying may help."""


@dataclass(frozen=True)
class PeriodQuery:
    """A sequence ``i -> func(start + i)`` that is purely periodic in i.

    ``func`` is the closed form evaluated at arbitrary indices (what a circuit
    oracle tabulates).  ``step``, when given, is the iterated map behind it:
    ``func(i + 1) == step(func(i))``, which lets a classical backend walk the
    sequence with one map application per element.
    """

    func: Callable[[int], int]
    start: int
    N: int
    step: Step | None = None


class Backend(Protocol):
    mode: str

    def order_of(self, x: int, N: int) -> int: ...

    def period_of(self, query: PeriodQuery) -> int: ...


class ClassicalBackend:
    """Exact answers by direct iteration (O(r) work per query)."""

    mode = "exact-classical"

    def __init__(self, max_steps: int | None = None, order_method: str = "naive"):
        self.max_steps = max_steps
        self.order_method = order_method

    def order_of(self, x: int, N: int) -> int:
        return multiplicative_order(x, N, method=self.order_method, max_steps=self.max_steps)

    def period_of(self, query: PeriodQuery) -> int:
        anchor = query.func(query.start)
        limit = self.max_steps if self.max_steps is not None else query.N + 1
        k = 1
        if query.step is not None:
            y = query.step(anchor)
            while y != anchor:
                y = query.step(y)
                k += 1
                if k > limit:
                    raise CapacityError(f"no period <= {limit} from index {query.start}")
        else:
            while query.func(query.start + k) != anchor:
                k += 1
                if k > limit:
                    raise CapacityError(f"no period <= {limit} from index {query.start}")
        if query.func(query.start + k) != anchor:
            raise ValueError("step does not agree with func")
        return k


@dataclass
class FactorResult:
    algorithm: str
    N: int
    factor: int | None
    diagnostics: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.factor is not None

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "N": self.N, "factor": self.factor, "diagnostics": self.diagnostics}


def _require_splittable(N: int) -> None:
    if N < 4:
        raise ValueError(f"N must be composite, got {N}")
    if is_probable_prime(N):
        raise ValueError(f"N = {N} is prime")
    pp = as_prime_power(N)
    if pp is not None:
        raise ValueError(f"N = {N} is a prime power ({pp})")


def divisors(r: int, N: int) -> list[int]:
    """Primes among the first ``bitlen(N)`` primes that divide r, ascending."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return [p for p in first_primes(N.bit_length()) if r % p == 0]


def cyclotomic_cofactor(x: int, r: int, d: int, N: int) -> int:
    """``sum(x**(i*r/d) for i in range(d)) mod N``.

    Times ``x**(r/d) - 1`` this is ``x**r - 1``.
    """
    if d < 1 or r % d:
        raise ValueError(f"d = {d} does not divide r = {r}")
    step = pow(x, r // d, N)
    total, term = 0, 1
    for _ in range(d):
        total += term
        term = term * step % N
    return total % N


def pollard_rho_classical(N: int, poly: Polynomial, x0: int) -> FactorResult:
    """Pollard's rho with Floyd cycle detection; gives up on a trivial collision."""
    f = poly.step(N)
    tortoise = hare = x0 % N
    i = 0
    while True:
        tortoise = f(tortoise)
        hare = f(f(hare))
        i += 1
        w = classify(tortoise, hare, N, i, 2 * i)
        diag = {"polynomial": str(poly), "x0": x0, "iterations": i, "witness": w.to_dict()}
        if w.kind is CollisionKind.TRIVIAL:
            diag["anchor"] = "rho/trivial-collision"
            return FactorResult("rho", N, None, diag)
        if w.kind is CollisionKind.NONTRIVIAL:
            diag["anchor"] = f"rho/i={i}"
            return FactorResult("rho", N, w.gcd_value, diag)


def _coprime_or_factor(algorithm: str, x: int, N: int) -> FactorResult | None:
    g = math.gcd(x, N)
    if g == 1:
        return None
    diag = {"x": x, "gcd": g, "anchor": f"{algorithm}/shared-factor"}
    return FactorResult(algorithm, N, g if g < N else None, diag)


def shor(x: int, N: int, backend: Backend) -> FactorResult:
    _require_splittable(N)
    x %= N
    early = _coprime_or_factor("shor", x, N)
    if early:
        return early
    r = backend.order_of(x, N)
    diag: dict = {"x": x, "r": r, "backend": backend.mode}
    if r % 2:
        diag["reason"] = "odd order"
        return FactorResult("shor", N, None, diag)
    y = pow(x, r // 2, N)
    diag["x^(r/2)"] = y
    if y == N - 1:
        diag["reason"] = "x^(r/2) = -1 mod N"
        return FactorResult("shor", N, None, diag)
    p = math.gcd(y - 1, N)
    diag["gcd"] = p
    if 1 < p < N:
        diag["anchor"] = "shor/d=2"
        diag["d"] = 2
        return FactorResult("shor", N, p, diag)
    diag["reason"] = "trivial gcd"
    return FactorResult("shor", N, None, diag)


def extended_shor(x: int, N: int, backend: Backend) -> FactorResult:
    _require_splittable(N)
    x %= N
    early = _coprime_or_factor("xshor", x, N)
    if early:
        return early
    r = backend.order_of(x, N)
    ds = divisors(r, N)
    tried = []
    diag: dict = {"x": x, "r": r, "divisors": ds, "tried": tried, "backend": backend.mode}
    for d in ds:
        y = pow(x, r // d, N)
        p = math.gcd(y - 1, N)
        tried.append({"d": d, "x^(r/d)": y, "gcd": p})
        if 1 < p < N:
            diag.update(d=d, anchor=f"xshor/d={d}")
            return FactorResult("xshor", N, p, diag)
    return FactorResult("xshor", N, None, diag)


def _search_divisors(
    algorithm: str, g: Callable[[int], int], anchor_index: int, r_g: int, N: int, diag: dict
) -> FactorResult:
    anchor = g(anchor_index)
    ds = divisors(r_g, N)
    tried = []
    diag.update(r_g=r_g, divisors=ds, tried=tried)
    rest = r_g
    for d in ds:
        while rest % d == 0:
            rest //= d
        j = anchor_index + r_g // d
        w = classify(g(j), anchor, N, anchor_index, j)
        tried.append({"d": d, "pair": [anchor_index, j], "value": g(j), "gcd": w.gcd_value})
        if w.kind is CollisionKind.NONTRIVIAL:
            diag.update(d=d, witness=w.to_dict(), anchor=f"{algorithm}/d={d}")
            return FactorResult(algorithm, N, w.gcd_value, diag)
    # prime factors of r_g outside the small-prime window were never tried
    diag["untried_cofactor"] = rest
    return FactorResult(algorithm, N, None, diag)


def quantum_rho(
    N: int, family: QuadraticFamily, x0: int, backend: Backend, r: int | None = None
) -> FactorResult:
    """Quantum rho over the quadratic family.

    Needs ``ord(alpha, N)`` for the closed form; pass ``r`` to reuse an order
    obtained earlier, otherwise the backend is asked for it.
    """
    if family.N != N:
        raise ValueError("family modulus differs from N")
    _require_splittable(N)
    x0 %= N
    alpha = family.alpha(x0)
    diag: dict = {"a": family.a, "b": family.b, "x0": x0, "alpha": alpha, "backend": backend.mode}
    g0 = math.gcd(alpha, N)
    if g0 != 1:
        diag["anchor"] = "qrho/alpha-shares-factor"
        diag["gcd"] = g0
        return FactorResult("qrho", N, g0 if g0 < N else None, diag)
    if r is None:
        r = backend.order_of(alpha, N)
        diag["r_source"] = "backend"
    else:
        diag["r_source"] = "caller"
    ctx = ClosedFormContext(family, x0, alpha, r)
    diag["r"] = r

    def g(i: int) -> int:
        return closed_form_g(ctx, i)

    diag["x_N"] = g(N)
    r_g = backend.period_of(PeriodQuery(g, N, N, family.step()))
    return _search_divisors("qrho", g, N, r_g, N, diag)


def quantum_rho_linear(a: int, N: int, backend: Backend) -> FactorResult:
    """Quantum rho over ``f(x) = a x``; from x0 = 1 the sequence is a**i."""
    _require_splittable(N)
    a %= N
    early = _coprime_or_factor("qrho-linear", a, N)
    if early:
        return early
    family = LinearFamily(a, N)

    def g(i: int) -> int:
        return pow(a, i, N)

    r_g = backend.period_of(PeriodQuery(g, 0, N, family.step()))
    diag: dict = {"a": a, "backend": backend.mode}
    return _search_divisors("qrho-linear", g, 0, r_g, N, diag)


# -- full factorization --------------------------------------------------------


@dataclass
class FactorConfig:
    trial_bound: int = 10_000
    attempts: int = 16
    strategies: tuple[str, ...] = ("rho", "qrho-linear", "qrho")
    seed: int = 0
    backend: Backend | None = None


@dataclass
class Factorization:
    N: int
    factors: list[PrimePower]
    remainder: int = 1
    steps: list[dict] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.remainder == 1

    def __str__(self) -> str:
        terms = [str(pp) for pp in self.factors]
        if not self.complete:
            terms.append(f"[{self.remainder}]")
        return " * ".join(terms)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "factors": [[p, e] for p, e in self.factors],
            "remainder": self.remainder,
            "complete": self.complete,
            "steps": self.steps,
        }


def _one_attempt(strategy: str, c: int, rng: random.Random, backend: Backend) -> FactorResult:
    if strategy == "rho":
        poly = Polynomial.raw(2, rng.randrange(1, c - 2))
        return pollard_rho_classical(c, poly, rng.randrange(c))
    if strategy == "qrho-linear":
        return quantum_rho_linear(rng.randrange(2, c - 1), c, backend)
    if strategy == "qrho":
        if c % 2 == 0:
            raise ValueError("quadratic family needs odd N")
        a = rng.randrange(1, c)
        if math.gcd(2 * a, c) != 1:
            return FactorResult("qrho", c, math.gcd(a, c), {"anchor": "qrho/shared-factor"})
        return quantum_rho(c, QuadraticFamily(a, rng.randrange(c), c), rng.randrange(c), backend)
    raise ValueError(f"unknown strategy {strategy!r}")


def _split(c: int, config: FactorConfig, rng: random.Random, backend: Backend, steps: list) -> int | None:
    for strategy in config.strategies:
        for attempt in range(config.attempts):
            try:
                res = _one_attempt(strategy, c, rng, backend)
            except (BackendFailure, CapacityError, NotCoprimeError) as exc:
                steps.append({"n": c, "strategy": strategy, "attempt": attempt, "error": str(exc)})
                continue
            steps.append({"n": c, "strategy": strategy, "attempt": attempt, **res.to_dict()})
            if res.found:
                return res.factor
    return None


def factor(N: int, config: FactorConfig | None = None) -> Factorization:
    """Complete prime-power factorization of N.

    Trial division first, then a prime-power check, then the strategy ladder
    on whatever composite cofactors remain.  If every strategy exhausts its
    attempts on some cofactor, that cofactor is reported as ``remainder``.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    config = config or FactorConfig()
    backend = config.backend or ClassicalBackend(max_steps=10**7)
    rng = random.Random(config.seed)
    counts, rest = trial_factor(N, config.trial_bound)
    steps: list[dict] = [{"stage": "trial-division", "bound": config.trial_bound, "found": sorted(counts)}]
    remainder = 1
    stack = [rest] if rest > 1 else []
    while stack:
        c = stack.pop()
        if is_probable_prime(c):
            counts[c] = counts.get(c, 0) + 1
            continue
        pp = as_prime_power(c)
        if pp is not None:
            steps.append({"n": c, "stage": "prime-power", "base": pp.base, "exponent": pp.exponent})
            counts[pp.base] = counts.get(pp.base, 0) + pp.exponent
            continue
        d = _split(c, config, rng, backend, steps)
        if d is None:
            log.info("could not split %d", c)
            remainder *= c
        else:
            stack += [d, c // d]
    factors = [PrimePower(p, e) for p, e in sorted(counts.items())]
    return Factorization(N, factors, remainder, steps)
