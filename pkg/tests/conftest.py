"""Shared independent oracles for the test suite.

Everything here is deliberately implemented from first principles (power
series, quadrature, exhaustive enumeration) rather than reusing the library
code it checks.
"""

import itertools
import math

import numpy as np
from scipy import integrate

from circwass import circ_dist, family_pdf

TWO_PI = 2.0 * np.pi


def bessel_series(order: int, z: float) -> float:
    """I_order(z) by the power series sum_m (z/2)^(2m+order) / (m! (m+order)!),
    truncated when a term drops below 1e-18 of the running sum."""
    half = z / 2.0
    term = half**order / math.factorial(order)
    total = term
    m = 0
    while True:
        m += 1
        term *= half * half / (m * (m + order))
        total += term
        if term < 1e-18 * max(total, 1.0):
            return total


def cdf_quad(theta, x: float) -> float:
    """CDF on [0, 2*pi] by adaptive quadrature of the density."""
    val, _ = integrate.quad(
        lambda t: family_pdf(theta, t), 0.0, x, epsabs=1e-13, epsrel=1e-13, limit=400
    )
    return val


def perm_matching_cost(xa, xb, p: float) -> float:
    """Exact W_p between equal-weight atom sets by scanning all permutations
    with the circular geodesic cost (n <= 8)."""
    xa = np.asarray(xa, dtype=float)
    best = np.inf
    for perm in itertools.permutations(range(xa.size)):
        cost = float(np.mean(circ_dist(xa, np.asarray(xb)[list(perm)]) ** p))
        best = min(best, cost)
    return best ** (1.0 / p)


def random_discrete_pair(rng, n):
    """Two equal-weight discrete distributions with distinct random atoms."""
    from circwass import make_sample, discrete_from_sample

    a = discrete_from_sample(make_sample(rng.uniform(0.0, TWO_PI, n)))
    b = discrete_from_sample(make_sample(rng.uniform(0.0, TWO_PI, n)))
    return a, b
