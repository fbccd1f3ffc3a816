"""Two-dimensional quantization: oscillator basis and operator matrices.

Basis functions are 2D harmonic-oscillator eigenfunctions of tunable length b,

    R_{n,mu}(beta) * chi_m(gamma),   mu = 3m,

with cosine (even) or sine (odd) angular factors; the 3-fold symmetry of the
potential restricts the angular momentum to multiples of 3.  All matrix
elements are exact: radial moments by sized Gauss-Laguerre rules, the kinetic
term through the oscillator identity T = H_osc - (K w^2/2) beta^2, and the
angular factors in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _laguerre
from .model import ModelParams

OPERATORS = ("H0", "Hprime", "H", "L2")


@dataclass(frozen=True)
class BasisState2D:
    n: int  # radial node count
    m: int  # angular index; physical angular momentum is 3m
    parity: str  # "even" | "odd"

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError(f"negative quantum number in {self}")
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.parity == "odd" and self.m == 0:
            raise ValueError("odd parity requires m >= 1 (sine vanishes for m = 0)")


@dataclass(frozen=True)
class Basis2D:
    states: tuple[BasisState2D, ...]
    N_max: int
    b: float
    parity: str

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def n_array(self) -> np.ndarray:
        return np.array([s.n for s in self.states])

    @property
    def m_array(self) -> np.ndarray:
        return np.array([s.m for s in self.states])


def enumerate_basis_2d(N_max: int, parity: str, b: float) -> Basis2D:
    """All (n, m) with 2n + 3m <= N_max, ordered by (2n + 3m, m, n)."""
    if N_max < 0:
        raise ValueError(f"N_max must be >= 0, got {N_max}")
    if b <= 0:
        raise ValueError(f"oscillator length must be positive, got {b}")
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    m_lo = 0 if parity == "even" else 1
    states = [
        BasisState2D(n, m, parity)
        for m in range(m_lo, N_max // 3 + 1)
        for n in range((N_max - 3 * m) // 2 + 1)
    ]
    states.sort(key=lambda s: (2 * s.n + 3 * s.m, s.m, s.n))
    return Basis2D(tuple(states), N_max, b, parity)


def radial_moment_2d(n: int, mu: int, nprime: int, muprime: int, k: int,
                     b: float) -> float:
    """<n,mu| beta^k |n',mu'> over the measure beta d(beta)."""
    if k < 0:
        raise ValueError(f"moment power must be >= 0, got {k}")
    return b**k * _laguerre.radial_moment(n, float(mu), nprime, float(muprime),
                                          mu + muprime + k)


def angular_coupling_2d(m: int, mprime: int, parity: str) -> float:
    """<chi_m | cos 3gamma | chi_m'> for the normalized angular family."""
    lo = 1 if parity == "odd" else 0
    if m < lo or mprime < lo:
        raise ValueError(f"m={m}, m'={mprime} invalid for parity {parity!r}")
    if abs(m - mprime) != 1:
        return 0.0
    if parity == "even" and min(m, mprime) == 0:
        return 1.0 / math.sqrt(2.0)
    return 0.5


def _moment_table(basis: Basis2D, k: int) -> np.ndarray:
    """Matrix of radial beta^k integrals for every basis pair.

    Entries with odd mu + mu' + k are not exactly integrated by the shared
    plain rule, but every such pair is removed by the angular selection rules
    before use.
    """
    n_arr, m_arr = basis.n_array, basis.m_array
    mu_arr = 3 * m_arr
    n_nodes = basis.N_max // 2 + 4
    t, w = _laguerre.gauss_laguerre_rule(n_nodes, False)
    s = np.sqrt(t)
    phi = np.empty((basis.size, t.size))
    for mu in np.unique(mu_arr):
        sel = np.flatnonzero(mu_arr == mu)
        table = _laguerre.normalized_laguerre_table(int(n_arr[sel].max()), float(mu), t)
        phi[sel] = table[n_arr[sel]] * s**mu
    weighted = phi * (w * s**k)
    mat = basis.b**k * (phi @ weighted.T)
    return 0.5 * (mat + mat.T)


def _coupling_matrix(basis: Basis2D) -> np.ndarray:
    """Matrix of <chi_m | cos 3gamma | chi_m'> over all basis pairs."""
    m_arr = basis.m_array
    neighbors = np.abs(m_arr[:, None] - m_arr[None, :]) == 1
    coup = np.where(neighbors, 0.5, 0.0)
    if basis.parity == "even":
        touches_zero = np.minimum(m_arr[:, None], m_arr[None, :]) == 0
        coup = np.where(neighbors & touches_zero, 1.0 / math.sqrt(2.0), coup)
    return coup


def assemble_matrix_2d(params: ModelParams, basis: Basis2D, which: str) -> np.ndarray:
    """Operator matrix in the oscillator basis; which in {H0, Hprime, H, L2}."""
    if which not in OPERATORS:
        raise ValueError(f"unknown operator {which!r}; expected one of {OPERATORS}")
    if basis.size == 0:
        raise ValueError("basis is empty")
    n_arr, m_arr = basis.n_array, basis.m_array
    mu_arr = 3 * m_arr
    hbar, K, b = params.hbar, params.K, basis.b

    if which == "L2":
        return np.diag((hbar * mu_arr.astype(float)) ** 2)

    if which == "Hprime":
        mat = _moment_table(basis, 3) * _coupling_matrix(basis)
    else:
        same_m = (m_arr[:, None] == m_arr[None, :]).astype(float)
        m2 = _moment_table(basis, 2) * same_m
        m4 = _moment_table(basis, 4) * same_m
        omega = hbar / (K * b * b)
        h_osc = np.diag(hbar * omega * (2.0 * n_arr + mu_arr + 1.0))
        kinetic = h_osc - (params.kappa / (2.0 * b**4)) * m2
        mat = kinetic + params.A * m2 + params.C * m4
        if which == "H":
            mat = mat + params.B * (_moment_table(basis, 3) * _coupling_matrix(basis))

    if not np.all(np.isfinite(mat)):
        raise FloatingPointError(f"non-finite entries in assembled {which} matrix")
    return 0.5 * (mat + mat.T)


def radial_wavefunction_2d(n_arr, mu: int, b: float, beta: np.ndarray) -> np.ndarray:
    """Rows R_{n,mu}(beta) for the requested n values (orthonormal, beta dbeta)."""
    beta = np.asarray(beta, dtype=float)
    t = (beta / b) ** 2
    n_arr = np.asarray(n_arr)
    table = _laguerre.normalized_laguerre_table(int(n_arr.max()), float(mu), t)
    if mu == 0:
        envelope = np.exp(-0.5 * t)
    else:
        with np.errstate(divide="ignore"):
            envelope = np.exp(0.5 * mu * np.log(t, where=t > 0,
                                                out=np.full_like(t, -np.inf))
                              - 0.5 * t)
    return (math.sqrt(2.0) / b) * table[n_arr] * envelope


def angular_wavefunction_2d(m: int, parity: str, gamma: np.ndarray) -> np.ndarray:
    """chi_m(gamma), orthonormal on [0, 2 pi)."""
    gamma = np.asarray(gamma, dtype=float)
    if parity == "even":
        if m == 0:
            return np.full_like(gamma, 1.0 / math.sqrt(2.0 * math.pi))
        return np.cos(3.0 * m * gamma) / math.sqrt(math.pi)
    return np.sin(3.0 * m * gamma) / math.sqrt(math.pi)
