"""Iterated maps mod N: the quadratic and linear families, their closed
forms, and cycle-shape analysis (tail length mu, cycle length lambda).

Scalar routines take a ``step`` callable.  The ``*_table`` routines work on a
whole functional graph at once (a successor array over ``range(n)``) and are
what the exhaustive verification suites use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .arith import (
    NotCoprimeError,
    as_prime_power,
    mod_inv,
    multiplicative_order,
)

Step = Callable[[int], int]


@dataclass(frozen=True)
class Polynomial:
    """Integer-coefficient polynomial, coefficients in ascending degree.

    Because the coefficients are integers, evaluating mod N and then reducing
    mod a divisor A of N gives the same thing as evaluating mod A directly.
    """

    coeffs: tuple[int, ...]

    @classmethod
    def raw(cls, e: int, c: int) -> "Polynomial":
        """``x**e + c``."""
        if e < 1:
            raise ValueError("exponent must be >= 1")
        coeffs = [0] * (e + 1)
        coeffs[0] += c
        coeffs[e] += 1
        return cls(tuple(coeffs))

    def __call__(self, x: int, modulus: int) -> int:
        acc = 0
        for coeff in reversed(self.coeffs):
            acc = (acc * x + coeff) % modulus
        return acc

    def step(self, modulus: int) -> Step:
        if len(self.coeffs) == 3 and self.coeffs[1:] == (0, 1):
            c = self.coeffs[0] % modulus
            return lambda x: (x * x + c) % modulus
        return lambda x: self(x, modulus)

    def __str__(self) -> str:
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if k and c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}{'*' if mono else ''}{mono}")
        return " + ".join(terms).replace("+ -", "- ") or "0"


def iterate_raw_polynomial(e: int, c: int, N: int, x: int) -> int:
    """One step of ``x -> x**e + c (mod N)``."""
    if e < 1:
        raise ValueError("exponent must be >= 1")
    return (pow(x, e, N) + c) % N


@dataclass(frozen=True)
class QuadraticFamily:
    """``f(x) = a x^2 + b x + (b^2 - 2b)(4a)^-1  (mod N)``.

    The i-th iterate has the closed form ``(2 alpha^(2^i) - b)(2a)^-1`` with
    ``alpha = (2a x0 + b) 2^-1``.  The constant term only exists mod N when
    2a is invertible, hence the odd-N and gcd requirements.
    """

    a: int
    b: int
    N: int

    def __post_init__(self):
        if self.N < 3 or self.N % 2 == 0:
            raise ValueError(f"N must be odd and >= 3, got {self.N}")
        object.__setattr__(self, "a", self.a % self.N)
        object.__setattr__(self, "b", self.b % self.N)
        mod_inv(2 * self.a, self.N)  # raises NotCoprimeError
        if as_prime_power(self.N) is not None:
            raise ValueError(f"N = {self.N} is a prime power")

    @property
    def constant(self) -> int:
        b, N = self.b, self.N
        return (b * b - 2 * b) * mod_inv(4 * self.a, N) % N

    def polynomial(self) -> Polynomial:
        return Polynomial((self.constant, self.b, self.a))

    def step(self) -> Step:
        a, b, c, N = self.a, self.b, self.constant, self.N
        return lambda x: ((a * x + b) * x + c) % N

    def alpha(self, x0: int) -> int:
        return (2 * self.a * x0 + self.b) * mod_inv(2, self.N) % self.N


def iterate_quadratic(family: QuadraticFamily, x: int) -> int:
    a, b, N = family.a, family.b, family.N
    return (a * x * x + b * x + family.constant) % N


@dataclass(frozen=True)
class LinearFamily:
    """``f(x) = a x (mod N)``; from x0 = 1 the i-th element is ``a**i``."""

    a: int
    N: int

    def __post_init__(self):
        if not 1 < self.a < self.N:
            raise ValueError(f"need 1 < a < N, got a={self.a}, N={self.N}")
        mod_inv(self.a, self.N)

    def step(self) -> Step:
        a, N = self.a, self.N
        return lambda x: a * x % N


def closed_form_linear(family: LinearFamily, i: int) -> int:
    return pow(family.a, i, family.N)


@dataclass(frozen=True)
class ClosedFormContext:
    family: QuadraticFamily
    x0: int
    alpha: int
    r: int  # ord(alpha, N), or any multiple of it

    def __post_init__(self):
        N = self.family.N
        if pow(self.alpha, self.r, N) != 1:
            raise ValueError(f"alpha^{self.r} != 1 mod {N}")


def closed_form_context(family: QuadraticFamily, x0: int, r: int | None = None) -> ClosedFormContext:
    """Build the closed-form context for orbit x0.

    ``r`` may be supplied (e.g. an order obtained earlier); otherwise it is
    computed exactly.  A non-invertible alpha raises NotCoprimeError, whose
    gcd is a factor of N.
    """
    N = family.N
    x0 %= N
    alpha = family.alpha(x0)
    g = math.gcd(alpha, N)
    if g != 1:
        raise NotCoprimeError(alpha, N, g)
    if r is None:
        r = multiplicative_order(alpha, N)
    return ClosedFormContext(family, x0, alpha, r)


def closed_form_g(ctx: ClosedFormContext, i: int) -> int:
    """The i-th iterate of the family from ``ctx.x0``, in O(log i + log r)."""
    fam = ctx.family
    N = fam.N
    gamma = pow(2, i, ctx.r)
    return (2 * pow(ctx.alpha, gamma, N) - fam.b) * mod_inv(2 * fam.a, N) % N


@dataclass(frozen=True)
class CycleShape:
    mu: int
    lam: int


def orbit(step: Step, x0: int) -> Iterator[int]:
    x = x0
    while True:
        yield x
        x = step(x)


def cycle_shape_bruteforce(step: Step, x0: int) -> CycleShape:
    """Exact (mu, lambda) by remembering the index where each value first appeared."""
    seen: dict[int, int] = {}
    for i, x in enumerate(orbit(step, x0)):
        if x in seen:
            return CycleShape(seen[x], i - seen[x])
        seen[x] = i
    raise AssertionError("unreachable")


def floyd_meet(step: Step, x0: int) -> int:
    """Smallest i >= 1 with x_i == x_{2i} (tortoise one step, hare two)."""
    tortoise = step(x0)
    hare = step(tortoise)
    i = 1
    while tortoise != hare:
        tortoise = step(tortoise)
        hare = step(step(hare))
        i += 1
    return i


def reduced_cycle_shape(poly: Polynomial, x0: int, modulus: int, N: int) -> CycleShape:
    """Shape of the sequence ``x_{k+1} = poly(x_k) mod N`` reduced mod a divisor."""
    if modulus < 1 or N % modulus:
        raise ValueError(f"{modulus} does not divide {N}")
    return cycle_shape_bruteforce(poly.step(modulus), x0 % modulus)


# -- whole-graph routines ---------------------------------------------------


def successor_table(poly: Polynomial, modulus: int) -> np.ndarray:
    """``poly(x) mod modulus`` for every x in range(modulus)."""
    x = np.arange(modulus, dtype=object if modulus > 3_000_000 else np.int64)
    acc = np.zeros_like(x)
    for coeff in reversed(poly.coeffs):
        acc = (acc * x + coeff % modulus) % modulus
    return acc.astype(np.int64)


def cycle_structure(nxt: np.ndarray, depth: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Tail length and cycle length of every node of a functional graph.

    ``nxt[v]`` is the successor of v.  ``depth`` bounds the size of any single
    component (defaults to the node count); it only needs to be >= every
    tail length.
    """
    n = len(nxt)
    depth = n if depth is None else depth
    # f^depth(v) lies on a cycle for every v; doubling gets there in log steps.
    pos = np.arange(n)
    jump = nxt.copy()
    k = depth
    while k:
        if k & 1:
            pos = jump[pos]
        k >>= 1
        if k:
            jump = jump[jump]
    on_cycle = np.zeros(n, dtype=bool)
    on_cycle[pos] = True

    cyc = np.flatnonzero(on_cycle)
    lam_c = np.ones(len(cyc), dtype=np.int64)
    y = nxt[cyc]
    active = np.flatnonzero(y != cyc)
    while active.size:
        y[active] = nxt[y[active]]
        lam_c[active] += 1
        active = active[y[active] != cyc[active]]
    lam_node = np.zeros(n, dtype=np.int64)
    lam_node[cyc] = lam_c

    mu = np.zeros(n, dtype=np.int64)
    cur = np.arange(n)
    active = np.flatnonzero(~on_cycle)
    while active.size:
        cur[active] = nxt[cur[active]]
        mu[active] += 1
        active = active[~on_cycle[cur[active]]]
    return mu, lam_node[pos]


def floyd_meet_table(nxt: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """``floyd_meet`` run from every start node simultaneously."""
    starts = np.asarray(starts)
    tortoise = nxt[starts]
    hare = nxt[tortoise]
    meet = np.ones(len(starts), dtype=np.int64)
    active = np.flatnonzero(tortoise != hare)
    i = 1
    while active.size:
        i += 1
        tortoise[active] = nxt[tortoise[active]]
        hare[active] = nxt[nxt[hare[active]]]
        meet[active] = i
        active = active[tortoise[active] != hare[active]]
    return meet


def iterate_table(nxt: np.ndarray, starts: np.ndarray, k: np.ndarray | int) -> np.ndarray:
    """Apply the successor map k times (k may differ per start)."""
    cur = np.array(starts, copy=True)
    k = np.broadcast_to(np.asarray(k, dtype=np.int64), cur.shape).copy()
    jump = nxt.copy()
    while k.any():
        odd = (k & 1).astype(bool)
        cur[odd] = jump[cur[odd]]
        k >>= 1
        if k.any():
            jump = jump[jump]
    return cur
