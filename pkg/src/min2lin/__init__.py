"""Min-2-Lin(Z_m): delete a minimum set of binary linear equations modulo m
so that the remainder is consistent.

Exact covering-pipeline solver for prime-power moduli, an omega(m)-factor
approximation for general m via CRT projection, a complete deletion-
branching fallback, and brute-force oracles for validation.
"""

from .equations import (Assignment, Equation, Instance, brute_force_opt,
                        cost, is_consistent, parse, serialize, special_form)
from .ring import Coset, RingSpec, factorize
from .solver import (Solution, solve_exact_fallback, solve_general,
                     solve_prime_power, verify_solution)

__all__ = [
    "Assignment", "Coset", "Equation", "Instance", "RingSpec", "Solution",
    "brute_force_opt", "cost", "factorize", "is_consistent", "parse",
    "serialize", "solve_exact_fallback", "solve_general",
    "solve_prime_power", "special_form", "verify_solution",
]
