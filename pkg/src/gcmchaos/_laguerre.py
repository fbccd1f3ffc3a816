"""Normalized generalized-Laguerre evaluation and exact Gauss-Laguerre rules.

The oscillator radial functions used by both quantization schemes reduce, in
the variable t = (beta/b)^2, to

    Lhat_n^(alpha)(t) = L_n^(alpha)(t) * sqrt(n! / Gamma(n + alpha + 1)),

which stay O(1) for all n, so the three-term recurrence is run directly on the
normalized family.  Radial moments become integrals of t^(p/2) times a
polynomial against exp(-t); for even p the plain Gauss-Laguerre rule is exact,
for odd p the generalized rule with weight t^(1/2) exp(-t) is.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, roots_genlaguerre


def normalized_laguerre_table(n_max: int, alpha: float, t: np.ndarray) -> np.ndarray:
    """Array of shape (n_max + 1, len(t)) with rows Lhat_n^(alpha)(t)."""
    t = np.asarray(t, dtype=float)
    out = np.empty((n_max + 1, t.size))
    out[0] = math.exp(-0.5 * gammaln(alpha + 1.0))
    if n_max >= 1:
        out[1] = (1.0 + alpha - t) * out[0] / math.sqrt(alpha + 1.0)
    for n in range(1, n_max):
        c1 = (2.0 * n + 1.0 + alpha - t) * out[n]
        c2 = math.sqrt(n * (n + alpha)) * out[n - 1]
        out[n + 1] = (c1 - c2) / math.sqrt((n + 1.0) * (n + 1.0 + alpha))
    return out


def normalized_laguerre_single(n: int, alpha: float, t: np.ndarray) -> np.ndarray:
    return normalized_laguerre_table(n, alpha, t)[n]


@lru_cache(maxsize=64)
def gauss_laguerre_rule(n_nodes: int, half_power: bool):
    """Nodes/weights for weight t^0 e^-t (half_power=False) or t^(1/2) e^-t."""
    alpha = 0.5 if half_power else 0.0
    t, w = roots_genlaguerre(n_nodes, alpha)
    return t.copy(), w.copy()


def radial_moment(n: int, alpha1: float, nprime: int, alpha2: float,
                  power_t_twice: int) -> float:
    """Integral of Lhat_n^(a1) Lhat_n'^(a2) t^(p/2) e^-t dt with p = power_t_twice.

    Exact: the rule (plain or half-power) is sized to integrate the polynomial
    part of the integrand exactly.
    """
    if power_t_twice < 0:
        raise ValueError(f"negative power: {power_t_twice}")
    half = power_t_twice % 2 == 1
    poly_degree = n + nprime + power_t_twice // 2
    # generous sizing: exactness only needs nodes > degree/2
    n_nodes = poly_degree + 2
    t, w = gauss_laguerre_rule(n_nodes, half)
    f1 = normalized_laguerre_single(n, alpha1, t)
    f2 = normalized_laguerre_single(nprime, alpha2, t)
    extra = power_t_twice // 2
    return float(np.sum(w * t**extra * f1 * f2))
