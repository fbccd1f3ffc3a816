"""Five-dimensional (J=0) quantization: seniority basis and operator matrices.

Radial functions carry the beta^4 d(beta) measure (generalized Laguerre index
v + 3/2); the J=0 angular functions are Legendre polynomials in u = cos 3gamma,
orthonormal under the sector measure induced by sin 3gamma, which makes the
cos 3gamma couplings a closed three-term recurrence.  The angular-momentum
Casimir is taken positive semidefinite with the seniority ladder
hbar^2 v (v + 3), v = 0, 3, 6, ...
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _laguerre
from .model import ModelParams

OPERATORS = ("H0", "Hprime", "H", "L2")


@dataclass(frozen=True)
class BasisState5D:
    n: int  # radial node count
    v: int  # seniority, a non-negative multiple of 3

    def __post_init__(self):
        if self.n < 0 or self.v < 0:
            raise ValueError(f"negative quantum number in {self}")
        if self.v % 3 != 0:
            raise ValueError(f"seniority must be a multiple of 3 for J=0, got {self.v}")

    @property
    def l(self) -> int:
        """Legendre degree of the angular factor."""
        return self.v // 3


@dataclass(frozen=True)
class Basis5D:
    states: tuple[BasisState5D, ...]
    N_max: int
    b: float

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def n_array(self) -> np.ndarray:
        return np.array([s.n for s in self.states])

    @property
    def v_array(self) -> np.ndarray:
        return np.array([s.v for s in self.states])


def enumerate_basis_5d(N_max: int, b: float) -> Basis5D:
    """All (n, v = 3l) with 2n + v <= N_max, ordered by (2n + v, v, n)."""
    if N_max < 0:
        raise ValueError(f"N_max must be >= 0, got {N_max}")
    if b <= 0:
        raise ValueError(f"oscillator length must be positive, got {b}")
    states = [
        BasisState5D(n, 3 * l)
        for l in range(N_max // 3 + 1)
        for n in range((N_max - 3 * l) // 2 + 1)
    ]
    states.sort(key=lambda s: (2 * s.n + s.v, s.v, s.n))
    return Basis5D(tuple(states), N_max, b)


def radial_moment_5d(n: int, v: int, nprime: int, vprime: int, k: int,
                     b: float) -> float:
    """<n,v| beta^k |n',v'> over the measure beta^4 d(beta)."""
    if k < 0:
        raise ValueError(f"moment power must be >= 0, got {k}")
    return b**k * _laguerre.radial_moment(
        n, v + 1.5, nprime, vprime + 1.5, v + vprime + k + 3
    )


def legendre_coupling(l: int, lprime: int) -> float:
    """<P_l | u | P_l'> for orthonormal Legendre polynomials on [-1, 1]."""
    if l < 0 or lprime < 0:
        raise ValueError(f"Legendre degrees must be >= 0, got {l}, {lprime}")
    if abs(l - lprime) != 1:
        return 0.0
    lo = min(l, lprime)
    return (lo + 1.0) / math.sqrt((2.0 * lo + 1.0) * (2.0 * lo + 3.0))


def _moment_table(basis: Basis5D, k: int) -> np.ndarray:
    """Radial beta^k integrals for every basis pair (shared half-power rule)."""
    n_arr, v_arr = basis.n_array, basis.v_array
    n_nodes = (basis.N_max + 3) // 2 + 3
    t, w = _laguerre.gauss_laguerre_rule(n_nodes, True)
    s = np.sqrt(t)
    phi = np.empty((basis.size, t.size))
    for v in np.unique(v_arr):
        sel = np.flatnonzero(v_arr == v)
        table = _laguerre.normalized_laguerre_table(
            int(n_arr[sel].max()), v + 1.5, t
        )
        phi[sel] = table[n_arr[sel]] * s**v
    weighted = phi * (w * t * s**k)
    mat = basis.b**k * (phi @ weighted.T)
    return 0.5 * (mat + mat.T)


def _coupling_matrix(basis: Basis5D) -> np.ndarray:
    l_arr = basis.v_array // 3
    lo = np.minimum(l_arr[:, None], l_arr[None, :]).astype(float)
    coup = (lo + 1.0) / np.sqrt((2.0 * lo + 1.0) * (2.0 * lo + 3.0))
    coup[np.abs(l_arr[:, None] - l_arr[None, :]) != 1] = 0.0
    return coup


def assemble_matrix_5d(params: ModelParams, basis: Basis5D, which: str) -> np.ndarray:
    """Operator matrix in the seniority basis; which in {H0, Hprime, H, L2}."""
    if which not in OPERATORS:
        raise ValueError(f"unknown operator {which!r}; expected one of {OPERATORS}")
    if basis.size == 0:
        raise ValueError("basis is empty")
    n_arr, v_arr = basis.n_array, basis.v_array
    hbar, K, b = params.hbar, params.K, basis.b

    if which == "L2":
        return np.diag(hbar**2 * v_arr * (v_arr + 3.0))

    if which == "Hprime":
        mat = _moment_table(basis, 3) * _coupling_matrix(basis)
    else:
        same_v = (v_arr[:, None] == v_arr[None, :]).astype(float)
        m2 = _moment_table(basis, 2) * same_v
        m4 = _moment_table(basis, 4) * same_v
        omega = hbar / (K * b * b)
        h_osc = np.diag(hbar * omega * (2.0 * n_arr + v_arr + 2.5))
        kinetic = h_osc - (params.kappa / (2.0 * b**4)) * m2
        mat = kinetic + params.A * m2 + params.C * m4
        if which == "H":
            mat = mat + params.B * (_moment_table(basis, 3) * _coupling_matrix(basis))

    if not np.all(np.isfinite(mat)):
        raise FloatingPointError(f"non-finite entries in assembled {which} matrix")
    return 0.5 * (mat + mat.T)


def radial_wavefunction_5d(n_arr, v: int, b: float, beta: np.ndarray) -> np.ndarray:
    """Rows R_{n,v}(beta), orthonormal under the beta^4 d(beta) measure."""
    beta = np.asarray(beta, dtype=float)
    t = (beta / b) ** 2
    n_arr = np.asarray(n_arr)
    table = _laguerre.normalized_laguerre_table(int(n_arr.max()), v + 1.5, t)
    if v == 0:
        envelope = np.exp(-0.5 * t)
    else:
        with np.errstate(divide="ignore"):
            envelope = np.exp(0.5 * v * np.log(t, where=t > 0,
                                               out=np.full_like(t, -np.inf))
                              - 0.5 * t)
    return (math.sqrt(2.0) / b**2.5) * table[n_arr] * envelope


def angular_wavefunction_5d(l: int, gamma: np.ndarray) -> np.ndarray:
    """Orthonormal Legendre factor evaluated at u = cos 3gamma."""
    u = np.cos(3.0 * np.asarray(gamma, dtype=float))
    return math.sqrt((2.0 * l + 1.0) / 2.0) * np.polynomial.legendre.Legendre.basis(l)(u)
