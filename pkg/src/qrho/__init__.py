"""Pollard rho and Shor-style factoring, with an exact simulator for the
period-finding circuit used by the quantum rho variant."""

from .algorithms import (
    ClassicalBackend,
    FactorConfig,
    FactorResult,
    Factorization,
    divisors,
    extended_shor,
    factor,
    pollard_rho_classical,
    quantum_rho,
    quantum_rho_linear,
    shor,
)
from .arith import NotCoprimeError, multiplicative_order
from .quantum_sim import CircuitBackend
from .sequences import LinearFamily, Polynomial, QuadraticFamily

__version__ = "0.1.0"

__all__ = [
    "CircuitBackend",
    "ClassicalBackend",
    "FactorConfig",
    "FactorResult",
    "Factorization",
    "LinearFamily",
    "NotCoprimeError",
    "Polynomial",
    "QuadraticFamily",
    "divisors",
    "extended_shor",
    "factor",
    "multiplicative_order",
    "pollard_rho_classical",
    "quantum_rho",
    "quantum_rho_linear",
    "shor",
]
