"""Exact integer arithmetic used throughout the package.

Everything here works on plain Python ints, which are arbitrary precision.
A "residue" is just an int in ``[0, modulus)`` passed alongside its modulus.
"""

from __future__ import annotations

import math
import random
from typing import NamedTuple

__all__ = [
    "CapacityError",
    "NotCoprimeError",
    "PrimePower",
    "as_prime_power",
    "first_primes",
    "gcd",
    "integer_root",
    "is_probable_prime",
    "lcm",
    "mod_inv",
    "mod_pow",
    "multiplicative_order",
    "primes_below",
    "trial_factor",
]

# Deterministic Miller-Rabin witnesses: correct for every n < 3.317e24.
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981


class NotCoprimeError(ValueError):
    """Raised when an operation needs ``gcd(x, modulus) == 1`` and it is not.

    The offending gcd is kept on ``.gcd``; when it is strictly between 1 and
    the modulus it is a proper factor, which factoring code may use directly.
    """

    def __init__(self, value: int, modulus: int, g: int):
        super().__init__(f"gcd({value}, {modulus}) = {g}")
        self.value = value
        self.modulus = modulus
        self.gcd = g


class CapacityError(RuntimeError):
    """A configured work bound was exceeded before an exact answer was found."""


class PrimePower(NamedTuple):
    base: int
    exponent: int

    def __str__(self) -> str:
        return str(self.base) if self.exponent == 1 else f"{self.base}^{self.exponent}"

    @property
    def value(self) -> int:
        return self.base**self.exponent


def gcd(a: int, b: int) -> int:
    if a == 0 and b == 0:
        raise ValueError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


def lcm(a: int, b: int) -> int:
    if a <= 0 or b <= 0:
        raise ValueError(f"lcm needs positive arguments, got ({a}, {b})")
    return a // math.gcd(a, b) * b


def mod_pow(base: int, exp: int, modulus: int) -> int:
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    if exp < 0:
        raise ValueError("negative exponents: use mod_inv first")
    return pow(base, exp, modulus)


def mod_inv(a: int, modulus: int) -> int:
    """Return b with ``a*b = 1 (mod modulus)``.

    Raises NotCoprimeError carrying ``gcd(a, modulus)`` when no inverse exists.
    """
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    a %= modulus
    g = math.gcd(a, modulus)
    if g != 1:
        raise NotCoprimeError(a, modulus, g)
    return pow(a, -1, modulus)


def _strong_probable_prime(n: int, base: int, d: int, s: int) -> bool:
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n: int, rounds: int = 20) -> bool:
    """Miller-Rabin test.

    Exact for n below 3.3e24 (fixed witness set). Above that, ``rounds``
    extra pseudo-random bases are tried, seeded from n so repeated calls
    agree; a composite survives with probability at most ``4**-rounds``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if n < 2:
        return False
    for p in _WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if not all(_strong_probable_prime(n, a, d, s) for a in _WITNESSES):
        return False
    if n < _DETERMINISTIC_LIMIT:
        return True
    rng = random.Random(n)
    return all(_strong_probable_prime(n, rng.randrange(2, n - 1), d, s) for _ in range(rounds))


def integer_root(n: int, k: int) -> int:
    """Floor of the k-th root of a non-negative integer."""
    if n < 0 or k < 1:
        raise ValueError("integer_root needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton iteration from an upper bound.
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def as_prime_power(n: int) -> PrimePower | None:
    """Return ``(p, k)`` if ``n == p**k`` with p prime, else None."""
    if n < 2:
        raise ValueError(f"as_prime_power needs n >= 2, got {n}")
    if is_probable_prime(n):
        return PrimePower(n, 1)
    # Try the largest exponent first so the base found is the prime itself.
    for k in range(n.bit_length(), 1, -1):
        root = integer_root(n, k)
        if root > 1 and root**k == n and is_probable_prime(root):
            return PrimePower(root, k)
    return None


def primes_below(limit: int) -> list[int]:
    """All primes p < limit (sieve of Eratosthenes)."""
    if limit <= 2:
        return []
    sieve = bytearray([1]) * limit
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(limit - 1) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytes(len(range(p * p, limit, p)))
    return [i for i, flag in enumerate(sieve) if flag]


def first_primes(n: int) -> list[int]:
    """The n smallest primes in increasing order."""
    if n < 1:
        raise ValueError("first_primes needs n >= 1")
    # Rosser's bound: p_n < n (ln n + ln ln n) for n >= 6.
    limit = 15 if n < 6 else int(n * (math.log(n) + math.log(math.log(n)))) + 2
    primes = primes_below(limit)
    while len(primes) < n:
        limit *= 2
        primes = primes_below(limit)
    return primes[:n]


def trial_factor(n: int, bound: int) -> tuple[dict[int, int], int]:
    """Divide out every prime below ``bound``.

    Returns ``({p: e, ...}, cofactor)`` where the cofactor has no prime
    factor below the bound.
    """
    if n < 1:
        raise ValueError("trial_factor needs n >= 1")
    found: dict[int, int] = {}
    for p in primes_below(min(bound, math.isqrt(n) + 2)):
        if p * p > n:
            break
        while n % p == 0:
            found[p] = found.get(p, 0) + 1
            n //= p
    if 1 < n < bound * bound:
        # Nothing below the bound divides n, so n itself is prime.
        found[n] = found.get(n, 0) + 1
        n = 1
    return found, n


def _factor_small(n: int, bound: int = 10**6) -> dict[int, int]:
    found, rest = trial_factor(n, bound)
    if rest != 1:
        if not is_probable_prime(rest):
            raise CapacityError(f"{rest} has no factor below {bound} and is composite")
        found[rest] = found.get(rest, 0) + 1
    return found


def multiplicative_order(
    x: int,
    modulus: int,
    method: str = "naive",
    multiple: int | None = None,
    max_steps: int | None = None,
) -> int:
    """Least r >= 1 with ``x**r = 1 (mod modulus)``.

    ``method="naive"`` multiplies until 1 comes back (O(r) multiplications).
    ``method="multiple"`` needs ``multiple``, any known multiple of the order
    (e.g. the Carmichael function of the modulus); the order is found by
    stripping prime factors from it.
    """
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    x %= modulus
    g = math.gcd(x, modulus)
    if g != 1:
        raise NotCoprimeError(x, modulus, g)
    if method == "naive":
        y, r = x, 1
        while y != 1:
            y = y * x % modulus
            r += 1
            if max_steps is not None and r > max_steps:
                raise CapacityError(f"order of {x} mod {modulus} exceeds {max_steps}")
        return r
    if method == "multiple":
        if multiple is None or multiple < 1:
            raise ValueError("method='multiple' needs a positive multiple of the order")
        if pow(x, multiple, modulus) != 1:
            raise ValueError(f"{multiple} is not a multiple of ord({x}, {modulus})")
        r = multiple
        for p in _factor_small(multiple):
            while r % p == 0 and pow(x, r // p, modulus) == 1:
                r //= p
        return r
    raise ValueError(f"unknown order method {method!r}")
