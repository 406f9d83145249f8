"""feynmzv: exact engine for massless two-point Feynman integrals.

Decides from graph topology whether the integral's Taylor coefficients
are multiple zeta values (possibly ramified at roots of unity), and for
reducible graphs computes the coefficients exactly by iterated
hyperlogarithm integration.
"""

__version__ = "0.1.0"
