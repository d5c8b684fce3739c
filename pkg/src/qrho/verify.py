"""Exhaustive and randomized checks of the number-theoretic claims the
algorithms rely on.  Each suite returns a :class:`SuiteResult`; the CLI's
``verify`` command and the acceptance tests both run them.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .algorithms import ClassicalBackend, extended_shor, quantum_rho_linear
from .arith import as_prime_power, is_probable_prime, primes_below
from .collisions import construct_m, has_nontrivial_pair
from .sequences import (
    Polynomial,
    QuadraticFamily,
    closed_form_context,
    closed_form_g,
    cycle_shape_bruteforce,
    cycle_structure,
    floyd_meet_table,
    iterate_quadratic,
    iterate_table,
    successor_table,
)

MAX_REPORTED = 20


@dataclass
class SuiteResult:
    name: str
    params: dict
    checked: int = 0
    failures: int = 0
    counterexamples: list[dict] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def fail(self, **info) -> None:
        self.failures += 1
        if len(self.counterexamples) < MAX_REPORTED:
            self.counterexamples.append(info)

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "params": self.params,
            "checked": self.checked,
            "failures": self.failures,
            "passed": self.passed,
            "counterexamples": self.counterexamples,
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} {self.params}: {self.checked} checked, {self.failures} counterexamples"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _prime_pairs(bound: int):
    ps = primes_below(bound)
    for i, a in enumerate(ps):
        for b in ps[i + 1 :]:
            yield a, b


def _shapes(poly: Polynomial, modulus: int):
    return cycle_structure(successor_table(poly, modulus))


@_timed
def cycle_lcm(bound: int = 50, c_max: int = 10) -> SuiteResult:
    """lambda(N) == lcm(lambda_A, lambda_B) for every orbit, N = A*B."""
    res = SuiteResult("lcm-lemma", {"bound": bound, "c_max": c_max})
    for a, b in _prime_pairs(bound):
        n = a * b
        x = np.arange(n)
        for c in range(c_max + 1):
            poly = Polynomial.raw(2, c)
            _, lam = _shapes(poly, n)
            _, lam_a = _shapes(poly, a)
            _, lam_b = _shapes(poly, b)
            expected = np.lcm(lam_a[x % a], lam_b[x % b])
            bad = np.flatnonzero(lam != expected)
            res.checked += n
            for x0 in bad:
                res.fail(N=n, c=c, x0=int(x0), lam=int(lam[x0]), lcm=int(expected[x0]))
    return res


def _cycles(nxt: np.ndarray, mu: np.ndarray) -> tuple[np.ndarray, list[list[int]]]:
    """Cycle id of every node's terminal cycle, plus each cycle's elements in orbit order."""
    n = len(nxt)
    cycle_id = np.full(n, -1, dtype=np.int64)
    cycles: list[list[int]] = []
    for v in np.flatnonzero(mu == 0):
        if cycle_id[v] >= 0:
            continue
        members = [int(v)]
        cycle_id[v] = len(cycles)
        w = int(nxt[v])
        while w != v:
            members.append(w)
            cycle_id[w] = len(cycles)
            w = int(nxt[w])
        cycles.append(members)
    entry = iterate_table(nxt, np.arange(n), mu)
    return cycle_id[entry], cycles


@lru_cache(maxsize=None)
def _m_for(lam_a: int, lam_b: int) -> int | None:
    return construct_m(lam_a, lam_b)


@_timed
def characterization(bound: int = 50, c_max: int = 10) -> SuiteResult:
    """lambda_A != lambda_B  <=>  construct_m gives m  <=>  a nontrivial in-cycle pair exists.

    Also checks that every m has exclusive divisibility, m < lambda, and
    that ``(x, f^m(x))`` is nontrivial for every x on the cycle.
    """
    res = SuiteResult("theorem-main", {"bound": bound, "c_max": c_max})
    for a, b in _prime_pairs(bound):
        n = a * b
        for c in range(c_max + 1):
            poly = Polynomial.raw(2, c)
            nxt = successor_table(poly, n)
            mu, lam = cycle_structure(nxt)
            _, lam_a = _shapes(poly, a)
            _, lam_b = _shapes(poly, b)
            cid, cycles = _cycles(nxt, mu)

            nontrivial = []
            for members in cycles:
                la, lb = int(lam_a[members[0] % a]), int(lam_b[members[0] % b])
                L = len(members)
                nontrivial.append(has_nontrivial_pair(members, n))
                m = _m_for(la, lb)
                if m is None:
                    continue
                if not (m < L and L % m == 0 and (m % la == 0) != (m % lb == 0)):
                    res.fail(N=n, c=c, cycle_start=members[0], m=m, reason="m postcondition")
                for k, x in enumerate(members):
                    g = math.gcd(members[(k + m) % L] - x, n)
                    if not 1 < g < n:
                        res.fail(N=n, c=c, x=x, m=m, gcd=g, reason="trivial witness")
                        break

            for x0 in range(n):
                la, lb = int(lam_a[x0 % a]), int(lam_b[x0 % b])
                differ = la != lb
                has_m = _m_for(la, lb) is not None
                has_pair = nontrivial[cid[x0]]
                res.checked += 1
                if not differ == has_m == has_pair:
                    res.fail(N=n, c=c, x0=x0, lambda_A=la, lambda_B=lb, m_exists=has_m, pair_exists=has_pair)
    return res


def _random_family(rng: random.Random, bound: int) -> QuadraticFamily:
    while True:
        n = rng.randrange(15, bound) | 1
        if n >= bound or is_probable_prime(n) or as_prime_power(n) is not None:
            continue
        a = rng.randrange(1, n)
        if math.gcd(2 * a, n) == 1:
            return QuadraticFamily(a, rng.randrange(n), n)


@_timed
def closed_form(bound: int = 10_000, families: int = 200, max_i: int = 200, seed: int = 0) -> SuiteResult:
    """Closed form vs. direct iteration, i = 0..max_i, random valid families."""
    res = SuiteResult("closed-form", {"bound": bound, "families": families, "max_i": max_i, "seed": seed})
    rng = random.Random(seed)
    done = 0
    while done < families:
        fam = _random_family(rng, bound)
        x0 = rng.randrange(fam.N)
        if math.gcd(fam.alpha(x0), fam.N) != 1:
            continue
        ctx = closed_form_context(fam, x0)
        done += 1
        x = x0
        for i in range(max_i + 1):
            res.checked += 1
            g = closed_form_g(ctx, i)
            if g != x:
                res.fail(a=fam.a, b=fam.b, N=fam.N, x0=x0, i=i, closed=g, iterated=x)
                break
            x = iterate_quadratic(fam, x)
    return res


@_timed
def floyd(bound: int = 2000, c_max: int = 10) -> SuiteResult:
    """Floyd meeting index i: x_i == x_2i, i >= mu, lambda | i, and i is the least such."""
    res = SuiteResult("floyd", {"bound": bound, "c_max": c_max})
    moduli = np.arange(2, bound)
    offsets = np.concatenate([[0], np.cumsum(moduli)])
    owner = np.repeat(moduli, moduli)
    local = np.arange(offsets[-1]) - np.repeat(offsets[:-1], moduli)
    for c in range(c_max + 1):
        # disjoint union of every x -> x^2 + c (mod N) graph, N < bound
        nxt = (local * local + c) % owner + np.repeat(offsets[:-1], moduli)
        mu, lam = cycle_structure(nxt, depth=bound)
        starts = np.arange(len(nxt))
        meet = floyd_meet_table(nxt, starts)
        xi = iterate_table(nxt, starts, meet)
        x2i = iterate_table(nxt, starts, 2 * meet)
        least = lam * np.maximum(1, -(-mu // lam))
        ok = (xi == x2i) & (meet >= mu) & (meet % lam == 0) & (meet == least)
        res.checked += len(nxt)
        for v in np.flatnonzero(~ok):
            res.fail(N=int(owner[v]), c=c, x0=int(local[v]), i=int(meet[v]), mu=int(mu[v]), lam=int(lam[v]))
    return res


@_timed
def reduction(bound: int = 5000, a_max: int = 50) -> SuiteResult:
    """quantum_rho_linear(a, N) and extended_shor(a, N) agree on every coprime a < a_max."""
    res = SuiteResult("reduction", {"bound": bound, "a_max": a_max})
    backend = ClassicalBackend()
    for p, q in _prime_pairs(bound // 2 + 1):
        n = p * q
        if n >= bound:
            continue
        for a in range(2, min(a_max, n)):
            if math.gcd(a, n) != 1:
                continue
            xs = extended_shor(a, n, backend)
            qr = quantum_rho_linear(a, n, backend)
            res.checked += 1
            same = (
                xs.found == qr.found
                and xs.factor == qr.factor
                and xs.diagnostics.get("d") == qr.diagnostics.get("d")
                and xs.diagnostics["r"] == qr.diagnostics["r_g"]
            )
            if not same:
                res.fail(N=n, a=a, xshor=xs.factor, qrho_linear=qr.factor)
    return res


@_timed
def shadow(instances: int = 200, bound: int = 5000, seed: int = 0) -> SuiteResult:
    """n_i = n_j (mod p) implies n_{i+d} = n_{j+d} (mod p) for d up to 2*lambda."""
    res = SuiteResult("shadow", {"instances": instances, "bound": bound, "seed": seed})
    rng = random.Random(seed)
    ps = primes_below(100)
    for _ in range(instances):
        p = rng.choice(ps)
        n = p * rng.randrange(2, bound // p)
        poly = Polynomial.raw(2, rng.randrange(n))
        x0 = rng.randrange(n)
        shape = cycle_shape_bruteforce(poly.step(n), x0)
        span = shape.mu + shape.lam
        seq = [x0]
        while len(seq) < span + 2 * shape.lam + 1:
            seq.append(poly(seq[-1], n))
        for j in range(span):
            for i in range(j):
                if (seq[i] - seq[j]) % p:
                    continue
                res.checked += 1
                bad = [d for d in range(2 * shape.lam + 1) if (seq[i + d] - seq[j + d]) % p]
                if bad:
                    res.fail(N=n, p=p, i=i, j=j, delta=bad[0])
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "lcm-lemma": cycle_lcm,
    "theorem-main": characterization,
    "closed-form": closed_form,
    "floyd": floyd,
    "reduction": reduction,
    "shadow": shadow,
}


def run_suite(name: str, bound: int | None = None, seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    kwargs: dict = {}
    if bound is not None:
        kwargs["bound"] = bound
    if name in ("closed-form", "shadow"):
        kwargs["seed"] = seed
    return SUITES[name](**kwargs)
