"""Diagonalization, Peres lattices, and wave-function densities.

For eigenstates the long-time average of any observable reduces to the plain
expectation value, so a lattice is just the point set (E_i, <P>_i) over the
trusted part of the spectrum.  Trust is decided by the fixed truncation rule:
a level counts as converged when it moves by less than 1e-6 between the
N_max - 10 and N_max bases, and only the converged prefix of the spectrum is
emitted.

At B = 0 the Hamiltonian is block diagonal in the angular quantum number and
each block is solved separately; this keeps the conserved-ladder structure
exact even across accidental degeneracies between blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from . import basis2d, basis5d
from .model import ModelParams, accessible_domain, default_oscillator_length

QUANTIZATIONS = ("2d-even", "2d-odd", "5d")
CONVERGENCE_TOL = 1e-6
CONVERGENCE_STEP = 10


class EigensolverError(RuntimeError):
    """Dense symmetric eigensolve failed; carries a condition report."""


@dataclass(frozen=True)
class EigenSolution:
    energies: np.ndarray          # ascending
    coeffs: np.ndarray            # columns are eigenvectors in basis order
    quantization: str             # "2d-even" | "2d-odd" | "5d"
    N_max: int
    b: float
    params: ModelParams
    n_converged: int

    @property
    def dimension(self) -> int:
        return self.energies.size

    def basis(self):
        return _build_basis(self.quantization, self.N_max, self.b)


@dataclass(frozen=True)
class PeresLattice:
    operator_name: str            # "L2" | "Hprime" | "H0"
    rows: np.ndarray              # columns: level index, E_i, <P>_i

    def __len__(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class DensityGrid:
    """Sampled |Psi|^2; axes are cell centers, `norm` the grid-sum integral."""

    kind: str                     # "cartesian" | "sector"
    x: np.ndarray                 # x (2D) or beta (5D sector)
    y: np.ndarray                 # y (2D) or gamma (5D sector)
    values: np.ndarray            # shape (len(y), len(x))
    norm: float


def _build_basis(quantization: str, N_max: int, b: float):
    if quantization == "2d-even":
        return basis2d.enumerate_basis_2d(N_max, "even", b)
    if quantization == "2d-odd":
        return basis2d.enumerate_basis_2d(N_max, "odd", b)
    if quantization == "5d":
        return basis5d.enumerate_basis_5d(N_max, b)
    raise ValueError(
        f"unknown quantization {quantization!r}; expected one of {QUANTIZATIONS}"
    )


def _assemble(params: ModelParams, quantization: str, N_max: int, b: float,
              which: str) -> np.ndarray:
    basis = _build_basis(quantization, N_max, b)
    if quantization == "5d":
        return basis5d.assemble_matrix_5d(params, basis, which)
    return basis2d.assemble_matrix_2d(params, basis, which)


def _block_labels(basis) -> np.ndarray:
    return basis.m_array if hasattr(basis, "m_array") else basis.v_array


def _solve_raw(params: ModelParams, quantization: str, N_max: int, b: float):
    """Energies and eigenvectors, block-exact at B = 0."""
    basis = _build_basis(quantization, N_max, b)
    if quantization == "5d":
        hmat = basis5d.assemble_matrix_5d(params, basis, "H")
    else:
        hmat = basis2d.assemble_matrix_2d(params, basis, "H")

    try:
        if params.B == 0.0:
            labels = _block_labels(basis)
            energies = np.empty(basis.size)
            coeffs = np.zeros((basis.size, basis.size))
            col = 0
            for lab in np.unique(labels):
                sel = np.flatnonzero(labels == lab)
                evals, evecs = linalg.eigh(hmat[np.ix_(sel, sel)])
                energies[col:col + sel.size] = evals
                coeffs[np.ix_(sel, range(col, col + sel.size))] = evecs
                col += sel.size
            order = np.argsort(energies, kind="stable")
            return energies[order], coeffs[:, order]
        evals, evecs = linalg.eigh(hmat)
        return evals, evecs
    except linalg.LinAlgError as exc:
        scale = float(np.abs(hmat).max())
        raise EigensolverError(
            f"eigh failed for {quantization} at N_max={N_max}, b={b}: {exc}; "
            f"matrix max |entry| = {scale:.3e}, "
            f"finite = {bool(np.all(np.isfinite(hmat)))}"
        ) from exc


def solve(params: ModelParams, quantization: str, N_max: int,
          b: float | None = None) -> EigenSolution:
    """Full spectrum plus the count of truncation-trusted levels."""
    if b is None:
        b = default_oscillator_length(params)
    energies, coeffs = _solve_raw(params, quantization, N_max, b)
    n_ref = max(N_max - CONVERGENCE_STEP, 0)
    if n_ref == N_max:
        n_conv = 0
    else:
        ref_energies, _ = _solve_raw(params, quantization, n_ref, b)
        n_common = min(energies.size, ref_energies.size)
        moved = np.abs(energies[:n_common] - ref_energies[:n_common]) >= CONVERGENCE_TOL
        n_conv = int(np.argmax(moved)) if moved.any() else n_common
    return EigenSolution(energies, coeffs, quantization, N_max, b, params, n_conv)


def operator_matrix(sol: EigenSolution, name: str) -> np.ndarray:
    """Observable matrix in the solution's basis; name in {H0, Hprime, H, L2}."""
    return _assemble(sol.params, sol.quantization, sol.N_max, sol.b, name)


def expectation(sol: EigenSolution, observable: np.ndarray, i: int) -> float:
    """<psi_i | observable | psi_i> for a converged level."""
    if not 0 <= i < sol.n_converged:
        raise IndexError(
            f"level {i} outside the converged range [0, {sol.n_converged})"
        )
    if observable.shape != (sol.dimension, sol.dimension):
        raise ValueError(
            f"observable shape {observable.shape} does not match dimension "
            f"{sol.dimension}"
        )
    vec = sol.coeffs[:, i]
    return float(vec @ observable @ vec)


def expectation_all(sol: EigenSolution, observable: np.ndarray,
                    n_levels: int | None = None) -> np.ndarray:
    """Diagonal of C^T P C for the first n_levels columns (default: converged)."""
    n = sol.n_converged if n_levels is None else n_levels
    c = sol.coeffs[:, :n]
    return np.einsum("ij,ij->j", c, observable @ c)


def peres_lattice(sol: EigenSolution, operator_name: str) -> PeresLattice:
    """(i, E_i, <P>_i) rows over the converged levels."""
    if operator_name not in ("L2", "Hprime", "H0"):
        raise ValueError(f"unsupported Peres operator {operator_name!r}")
    if sol.n_converged < 1:
        raise ValueError("solution has no converged levels")
    obs = operator_matrix(sol, operator_name)
    averages = expectation_all(sol, obs)
    rows = np.column_stack([
        np.arange(sol.n_converged, dtype=float),
        sol.energies[:sol.n_converged],
        averages,
    ])
    return PeresLattice(operator_name, rows)


def check_identity_hprime(sol: EigenSolution) -> float:
    """max_i |<H'>_i - (E_i - <H0>_i)/B| over converged levels."""
    B = sol.params.B
    if B == 0.0:
        raise ValueError("the <H'> identity requires B != 0")
    if sol.n_converged < 1:
        raise ValueError("solution has no converged levels")
    hp = expectation_all(sol, operator_matrix(sol, "Hprime"))
    h0 = expectation_all(sol, operator_matrix(sol, "H0"))
    e = sol.energies[:sol.n_converged]
    return float(np.abs(hp - (e - h0) / B).max())


def _auto_box(sol: EigenSolution, i: int) -> float:
    """Half-width of a box covering the classically allowed region of level i."""
    E = float(sol.energies[i])
    outer = 0.0
    for gamma in (0.0, math.pi / 3):
        for _, hi in accessible_domain(sol.params, E, gamma):
            outer = max(outer, hi)
    if outer == 0.0:
        outer = 1.0
    return 1.3 * outer


def wavefunction_density(sol: EigenSolution, i: int, n_points: int = 201,
                         half_width: float | None = None) -> DensityGrid:
    """|Psi_i|^2 on a Cartesian grid (2D) or the weighted sector density (5D)."""
    if not 0 <= i < sol.n_converged:
        raise IndexError(
            f"level {i} outside the converged range [0, {sol.n_converged})"
        )
    if half_width is None:
        half_width = _auto_box(sol, i)
    basis = sol.basis()
    coeff = sol.coeffs[:, i]

    if sol.quantization == "5d":
        beta = np.linspace(half_width / n_points * 0.5, half_width, n_points)
        gamma = np.linspace(0.0, math.pi / 3, n_points)
        bgrid, ggrid = np.meshgrid(beta, gamma)
        psi = np.zeros_like(bgrid)
        v_arr, n_arr = basis.v_array, basis.n_array
        for v in np.unique(v_arr):
            sel = np.flatnonzero(v_arr == v)
            rad = basis5d.radial_wavefunction_5d(
                n_arr[sel], int(v), basis.b, bgrid.ravel()
            ).reshape(sel.size, *bgrid.shape)
            ang = basis5d.angular_wavefunction_5d(int(v) // 3, gamma)
            psi += np.einsum("k,kij->ij", coeff[sel], rad) * ang[:, None]
        values = psi**2 * bgrid**4 * 3.0 * np.sin(3.0 * ggrid)
        norm = float(np.sum(values) * (beta[1] - beta[0]) * (gamma[1] - gamma[0]))
        return DensityGrid("sector", beta, gamma, values, norm)

    axis = np.linspace(-half_width, half_width, n_points)
    xg, yg = np.meshgrid(axis, axis)
    beta = np.hypot(xg, yg).ravel()
    gamma = np.arctan2(yg, xg).ravel()
    psi = np.zeros(beta.size)
    m_arr, n_arr = basis.m_array, basis.n_array
    for m in np.unique(m_arr):
        sel = np.flatnonzero(m_arr == m)
        rad = basis2d.radial_wavefunction_2d(n_arr[sel], int(3 * m), basis.b, beta)
        ang = basis2d.angular_wavefunction_2d(int(m), basis.parity, gamma)
        psi += (coeff[sel] @ rad) * ang
    values = (psi**2).reshape(n_points, n_points)
    cell = (axis[1] - axis[0]) ** 2
    norm = float(values.sum() * cell)
    return DensityGrid("cartesian", axis, axis, values, norm)


def convergence_study(params: ModelParams, quantization: str,
                      N_max_list, b: float | None = None) -> np.ndarray:
    """Rows (N_max, level, E) tracking each level across truncations."""
    if b is None:
        b = default_oscillator_length(params)
    rows = []
    for N_max in N_max_list:
        energies, _ = _solve_raw(params, quantization, int(N_max), b)
        for level, e in enumerate(energies):
            rows.append((float(N_max), float(level), float(e)))
    return np.array(rows).reshape(-1, 3)
