"""Quartic collective-model potential and its analytic geometry.

The potential in polar deformation coordinates (beta, gamma) is

    V(beta, gamma) = A beta^2 + B beta^3 cos(3 gamma) + C beta^4

with the standard parameter slice (A, C) = (-1, +1) and a confining C > 0.
Stationary points, the local quadratic expansion around the global minimum,
and energy-accessible radial intervals are all obtained from the radial
cubic/quartic factors rather than generic 2D optimization, so they are exact
up to root polishing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModelParams:
    """Potential coefficients plus the quantization constants hbar and K."""

    B: float
    hbar: float
    A: float = -1.0
    C: float = 1.0
    K: float = 1.0

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError(f"C must be positive (confinement), got {self.C}")
        if self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.K <= 0:
            raise ValueError(f"K must be positive, got {self.K}")

    @property
    def kappa(self) -> float:
        """Classicality parameter hbar^2 / K."""
        return self.hbar**2 / self.K


@dataclass(frozen=True)
class StationaryPoint:
    beta: float
    gamma: float  # radians, canonical in [0, 2*pi)
    energy: float
    kind: str  # "minimum" | "saddle" | "local-maximum"


@dataclass(frozen=True)
class QuadraticWell:
    """Local 2D-oscillator expansion V ~ V0 + k_beta/2 (b-b0)^2 + k_gamma/2 b^2 (g-g0)^2."""

    beta0: float
    gamma0: float
    V0: float
    k_beta: float
    k_gamma: float
    omega_beta: float
    omega_gamma: float


def potential(params: ModelParams, beta, gamma):
    """V(beta, gamma); accepts scalars or numpy arrays."""
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    b2 = beta * beta
    val = b2 * (params.A + params.B * beta * np.cos(3.0 * gamma) + params.C * b2)
    return float(val) if val.ndim == 0 else val


def potential_cartesian(params: ModelParams, x, y):
    """V in Cartesian coordinates; beta^3 cos 3gamma = x^3 - 3 x y^2 keeps it polynomial."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    val = params.A * r2 + params.B * (x * x * x - 3.0 * x * y * y) + params.C * r2 * r2
    return float(val) if val.ndim == 0 else val


def potential_gradient_cartesian(params: ModelParams, x: float, y: float):
    """(dV/dx, dV/dy) at a point."""
    A, B, C = params.A, params.B, params.C
    r2 = x * x + y * y
    gx = 2.0 * A * x + 3.0 * B * (x * x - y * y) + 4.0 * C * x * r2
    gy = 2.0 * A * y - 6.0 * B * x * y + 4.0 * C * y * r2
    return gx, gy


def potential_hessian_cartesian(params: ModelParams, x: float, y: float):
    """2x2 Hessian of V at a point."""
    A, B, C = params.A, params.B, params.C
    vxx = 2.0 * A + 6.0 * B * x + 4.0 * C * (3.0 * x * x + y * y)
    vyy = 2.0 * A - 6.0 * B * x + 4.0 * C * (x * x + 3.0 * y * y)
    vxy = -6.0 * B * y + 8.0 * C * x * y
    return np.array([[vxx, vxy], [vxy, vyy]])


def _canonical_angle(gamma: float) -> float:
    g = math.fmod(gamma, TWO_PI)
    return g + TWO_PI if g < 0 else g


def _radial_extrema(params: ModelParams, cos3g: float):
    """Positive roots of d/dbeta [A b^2 + B c b^3 + C b^4] = 0, ascending."""
    # beta * (2A + 3 B c beta + 4 C beta^2) = 0; keep the beta > 0 factor.
    roots = np.roots([4.0 * params.C, 3.0 * params.B * cos3g, 2.0 * params.A])
    out = sorted(float(r.real) for r in roots if abs(r.imag) < 1e-12 and r.real > 1e-12)
    return out


def _classify(params: ModelParams, beta: float, gamma: float) -> str:
    hess = potential_hessian_cartesian(
        params, beta * math.cos(gamma), beta * math.sin(gamma)
    )
    ev = np.linalg.eigvalsh(hess)
    if ev[0] > 0:
        return "minimum"
    if ev[1] < 0:
        return "local-maximum"
    return "saddle"


def _check_gradient(params: ModelParams, beta: float, gamma: float):
    gx, gy = potential_gradient_cartesian(
        params, beta * math.cos(gamma), beta * math.sin(gamma)
    )
    gnorm = math.hypot(gx, gy)
    if gnorm >= 1e-10:
        raise RuntimeError(
            f"stationary-point solve failed: |grad V| = {gnorm:.3e} at "
            f"beta={beta}, gamma={gamma}"
        )


def stationary_points(params: ModelParams) -> list[StationaryPoint]:
    """Origin plus the critical points on the gamma = k*pi/3 rays.

    For B > 0 the three degenerate minima sit at gamma = pi/3 mod 2pi/3 and the
    saddles at gamma = 0 mod 2pi/3 (roles swap for B < 0).  B = 0 returns the
    origin and one representative of the degenerate ring minimum.
    """
    pts = [
        StationaryPoint(0.0, 0.0, 0.0, "local-maximum" if params.A < 0 else "minimum")
    ]
    if params.B == 0.0:
        # Degenerate ring: the gamma direction is flat, so classify by the
        # radial profile A b^2 + C b^4 alone.
        for beta in _radial_extrema(params, 1.0):
            _check_gradient(params, beta, 0.0)
            d2 = 2.0 * params.A + 12.0 * params.C * beta * beta
            kind = "minimum" if d2 > 0 else "local-maximum"
            pts.append(
                StationaryPoint(beta, 0.0, float(potential(params, beta, 0.0)), kind)
            )
        return pts

    # cos(3 gamma) = -sign(B) rays host the minima, +sign(B) the saddles.
    minus_rays = [math.pi / 3, math.pi, 5 * math.pi / 3]
    plus_rays = [0.0, 2 * math.pi / 3, 4 * math.pi / 3]
    min_gammas, sad_gammas = (
        (minus_rays, plus_rays) if params.B > 0 else (plus_rays, minus_rays)
    )
    for cos3g, gammas in ((-math.copysign(1.0, params.B), min_gammas),
                          (math.copysign(1.0, params.B), sad_gammas)):
        betas = _radial_extrema(params, cos3g)
        if not betas:
            raise RuntimeError("radial cubic produced no positive extremum")
        # The largest positive extremum along the ray is the stationary point of V;
        # with A < 0 it is the only one.
        for beta in betas[-1:]:
            _check_gradient(params, beta, gammas[0])
            energy = float(potential(params, beta, gammas[0]))
            kind = _classify(params, beta, gammas[0])
            for g in gammas:
                pts.append(StationaryPoint(beta, _canonical_angle(g), energy, kind))
    return pts


def global_minimum(params: ModelParams) -> StationaryPoint:
    pts = [p for p in stationary_points(params) if p.kind == "minimum"]
    if not pts:
        raise RuntimeError("potential has no minimum for these parameters")
    return min(pts, key=lambda p: (p.energy, p.gamma))


def quadratic_well(params: ModelParams) -> QuadraticWell:
    """Stiffnesses of the local oscillator at the global minimum (B != 0)."""
    if params.B == 0.0:
        raise ValueError("quadratic well is defined for B != 0 (gamma direction flattens)")
    mn = global_minimum(params)
    b0, g0 = mn.beta, mn.gamma
    cos3g = math.cos(3.0 * g0)
    # Second derivatives along/across the minimum ray.
    k_beta = 2.0 * params.A + 6.0 * params.B * cos3g * b0 + 12.0 * params.C * b0 * b0
    d2V_dg2 = -9.0 * params.B * b0**3 * cos3g
    k_gamma = d2V_dg2 / b0**2
    return QuadraticWell(
        beta0=b0,
        gamma0=g0,
        V0=mn.energy,
        k_beta=k_beta,
        k_gamma=k_gamma,
        omega_beta=math.sqrt(k_beta / params.K),
        omega_gamma=math.sqrt(k_gamma / params.K),
    )


def resonance_perturbation_strength(A: float = -1.0, C: float = 1.0) -> float:
    """Root of k_beta(B) - k_gamma(B): equal local beta/gamma stiffnesses."""

    def gap(b):
        p = ModelParams(B=b, hbar=1.0, A=A, C=C)
        w = quadratic_well(p)
        return w.k_beta - w.k_gamma

    return float(optimize.brentq(gap, 0.05, 5.0, xtol=1e-14, rtol=8.9e-16))


def default_oscillator_length(params: ModelParams) -> float:
    """Basis length knob: harmonic length of the quadratic well, or 1 for B = 0."""
    if params.B == 0.0:
        return 1.0
    well = quadratic_well(params)
    return math.sqrt(params.hbar / (params.K * well.omega_beta))


def accessible_domain(params: ModelParams, E: float, gamma: float):
    """Radial intervals {beta >= 0 : V(beta, gamma) <= E} as [(lo, hi), ...].

    Endpoints are roots of V - E polished to 1e-12; an empty list means E lies
    below the potential everywhere on the ray.
    """
    c = math.cos(3.0 * gamma)
    # V(beta) - E = C b^4 + B c b^3 + A b^2 - E
    coeffs = [params.C, params.B * c, params.A, 0.0, -E]
    roots = np.roots(coeffs)
    cand = sorted(
        float(r.real)
        for r in roots
        if abs(r.imag) < 1e-6 * max(1.0, abs(r)) and r.real > 1e-12
    )

    def f(b):
        return float(potential(params, b, gamma)) - E

    polished = []
    for r in cand:
        lo, hi = r * (1 - 1e-6) - 1e-12, r * (1 + 1e-6) + 1e-12
        if f(lo) * f(hi) <= 0:
            r = float(optimize.brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16))
        if not polished or r - polished[-1] > 1e-10:
            polished.append(r)

    # Walk the sign pattern between consecutive roots; for C > 0 the region
    # beyond the largest root lies above E, so only bounded segments matter.
    edges = [0.0] + polished
    intervals = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo < 1e-12 or f(0.5 * (lo + hi)) <= 0:
            intervals.append((lo, hi))
    # Merge intervals touching at a double root.
    merged: list[tuple[float, float]] = []
    for lo, hi in intervals:
        if merged and lo - merged[-1][1] < 1e-10:
            merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged
