import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import eval_genlaguerre, gammaln

from gcmchaos.basis5d import (
    BasisState5D,
    angular_wavefunction_5d,
    assemble_matrix_5d,
    enumerate_basis_5d,
    legendre_coupling,
    radial_moment_5d,
    radial_wavefunction_5d,
)
from gcmchaos.basis2d import assemble_matrix_2d, enumerate_basis_2d
from gcmchaos.model import ModelParams


def radial_fn(n, v, b, beta):
    """Reference 5D radial function from the definition."""
    alpha = v + 1.5
    norm = math.sqrt(2.0 / b**5) * math.exp(
        0.5 * (gammaln(n + 1) - gammaln(n + alpha + 1))
    )
    t = (beta / b) ** 2
    return norm * (beta / b) ** v * eval_genlaguerre(n, alpha, t) * np.exp(-t / 2)


def quad_moment(n, v, np_, vp, k, b):
    val, err = integrate.quad(
        lambda beta: radial_fn(n, v, b, beta) * beta**k * radial_fn(np_, vp, b, beta) * beta**4,
        0.0, 14.0 * b, limit=400, epsabs=1e-14,
    )
    assert err < 1e-7
    return val


class TestEnumerate:
    def test_nmax_zero(self):
        basis = enumerate_basis_5d(0, 1.0)
        assert [(s.n, s.v) for s in basis.states] == [(0, 0)]

    def test_nmax_six(self):
        basis = enumerate_basis_5d(6, 1.0)
        got = {(s.n, s.v) for s in basis.states}
        oracle = {
            (n, 3 * l)
            for n in range(10)
            for l in range(10)
            if 2 * n + 3 * l <= 6
        }
        assert got == oracle
        assert got == {(0, 0), (1, 0), (2, 0), (3, 0), (0, 3), (1, 3), (0, 6)}

    def test_nmax_five(self):
        basis = enumerate_basis_5d(5, 1.0)
        assert {(s.n, s.v) for s in basis.states} == {
            (0, 0), (1, 0), (2, 0), (0, 3), (1, 3)
        }

    def test_seniority_multiple_of_three(self):
        with pytest.raises(ValueError):
            BasisState5D(0, 4)


class TestRadialMoments:
    def test_orthonormality(self):
        assert radial_moment_5d(0, 0, 0, 0, 0, 1.0) == pytest.approx(1.0, abs=1e-13)
        assert radial_moment_5d(0, 0, 1, 0, 0, 1.0) == pytest.approx(0.0, abs=1e-13)
        assert radial_moment_5d(1, 3, 1, 3, 0, 0.6) == pytest.approx(1.0, abs=1e-13)

    @pytest.mark.parametrize(
        "n,v,np_,vp,k,b",
        [(0, 0, 0, 3, 3, 1.0), (1, 0, 1, 0, 2, 0.8), (2, 3, 0, 6, 3, 1.1),
         (0, 0, 2, 0, 4, 0.9)],
    )
    def test_against_adaptive_quadrature(self, n, v, np_, vp, k, b):
        got = radial_moment_5d(n, v, np_, vp, k, b)
        assert got == pytest.approx(quad_moment(n, v, np_, vp, k, b), abs=1e-12)

    def test_rejects_negative_power(self):
        with pytest.raises(ValueError):
            radial_moment_5d(0, 0, 0, 0, -2, 1.0)


class TestLegendreCoupling:
    def quad_oracle(self, l, lp):
        leg = np.polynomial.legendre.Legendre
        f = lambda u: (
            math.sqrt((2 * l + 1) / 2) * leg.basis(l)(u)
            * u
            * math.sqrt((2 * lp + 1) / 2) * leg.basis(lp)(u)
        )
        val, _ = integrate.quad(f, -1, 1, limit=100)
        return val

    def test_diagonal_vanishes(self):
        assert legendre_coupling(0, 0) == 0.0
        assert legendre_coupling(3, 3) == 0.0

    def test_first_coupling(self):
        assert legendre_coupling(0, 1) == pytest.approx(1 / math.sqrt(3), abs=1e-15)

    def test_selection_rule(self):
        assert legendre_coupling(2, 5) == 0.0
        assert legendre_coupling(1, 4) == 0.0

    @pytest.mark.parametrize("l,lp", [(0, 1), (1, 2), (2, 3), (4, 5), (1, 1), (0, 2)])
    def test_against_quadrature(self, l, lp):
        assert legendre_coupling(l, lp) == pytest.approx(
            self.quad_oracle(l, lp), abs=1e-12
        )


class TestAssembly:
    def params(self, B=0.62):
        return ModelParams(B=B, hbar=0.1)

    def test_l2_exact_ladder(self):
        basis = enumerate_basis_5d(9, 0.7)
        l2 = assemble_matrix_5d(self.params(), basis, "L2")
        assert np.all(l2[~np.eye(basis.size, dtype=bool)] == 0.0)
        v = basis.v_array
        np.testing.assert_array_equal(np.diag(l2), 0.1**2 * v * (v + 3.0))

    def test_b_zero_block_diagonal(self):
        basis = enumerate_basis_5d(12, 0.7)
        h = assemble_matrix_5d(self.params(B=0.0), basis, "H")
        v = basis.v_array
        off = h[v[:, None] != v[None, :]]
        assert np.abs(off).max() < 1e-14

    def test_symmetry_and_h_splitting(self):
        basis = enumerate_basis_5d(14, 0.6)
        p = self.params(B=1.09)
        h = assemble_matrix_5d(p, basis, "H")
        h0 = assemble_matrix_5d(p, basis, "H0")
        hp = assemble_matrix_5d(p, basis, "Hprime")
        assert np.abs(h - h.T).max() <= 1e-12 * np.abs(h).max()
        np.testing.assert_allclose(h, h0 + 1.09 * hp, rtol=0, atol=1e-14)

    def test_commutator_at_b_zero(self):
        basis = enumerate_basis_5d(14, 0.6)
        p = self.params(B=0.0)
        h = assemble_matrix_5d(p, basis, "H")
        l2 = assemble_matrix_5d(p, basis, "L2")
        assert np.abs(h @ l2 - l2 @ h).max() < 1e-10 * np.abs(h).max()

    def test_variational_monotonicity(self):
        p = self.params(B=0.62)
        prev = np.inf
        for nmax in (10, 16, 22, 28):
            basis = enumerate_basis_5d(nmax, 0.45)
            e0 = np.linalg.eigvalsh(assemble_matrix_5d(p, basis, "H"))[0]
            assert e0 <= prev + 1e-13
            prev = e0

    def test_schemes_differ_quantum_mechanically(self):
        # 2D-even and 5D spectra disagree even though the classical limit is
        # shared.
        p = self.params(B=0.62)
        e2 = np.linalg.eigvalsh(
            assemble_matrix_2d(p, enumerate_basis_2d(30, "even", 0.3), "H")
        )[:5]
        e5 = np.linalg.eigvalsh(
            assemble_matrix_5d(p, enumerate_basis_5d(30, 0.3), "H")
        )[:5]
        assert np.abs(e2 - e5).max() > 1e-3


class TestAngularConsistency:
    def test_casimir_eigenvalue_on_grid(self):
        # Apply -(1/sin 3g) d/dg sin 3g d/dg to P_l(cos 3g) by finite
        # differences: must give v(v+3) P with v = 3l.
        h = 1e-3
        gamma = np.linspace(0.15, math.pi / 3 - 0.15, 41)
        for l in (1, 2, 3):
            v = 3 * l
            f = lambda g: angular_wavefunction_5d(l, g)
            # 5-point first and second derivatives.
            d1 = (-f(gamma + 2 * h) + 8 * f(gamma + h)
                  - 8 * f(gamma - h) + f(gamma - 2 * h)) / (12 * h)
            d2 = (-f(gamma + 2 * h) + 16 * f(gamma + h) - 30 * f(gamma)
                  + 16 * f(gamma - h) - f(gamma - 2 * h)) / (12 * h * h)
            applied = -(d2 + 3.0 / np.tan(3.0 * gamma) * d1)
            np.testing.assert_allclose(
                applied, v * (v + 3.0) * f(gamma), rtol=0, atol=1e-6 * v * (v + 3)
            )

    def test_angular_orthonormality_under_sector_measure(self):
        # 3 sin 3g dg on [0, pi/3] maps to du on [-1, 1].
        g = np.linspace(1e-6, math.pi / 3 - 1e-6, 40001)
        w = 3.0 * np.sin(3.0 * g)
        for l, lp in [(0, 0), (1, 1), (2, 2), (0, 1), (1, 3)]:
            val = np.trapezoid(
                angular_wavefunction_5d(l, g) * angular_wavefunction_5d(lp, g) * w, g
            )
            assert val == pytest.approx(1.0 if l == lp else 0.0, abs=1e-6)

    def test_radial_orthonormality(self):
        beta = np.linspace(1e-6, 10, 8000)
        rows = radial_wavefunction_5d(np.arange(4), 3, 0.8, beta)
        gram = np.trapezoid(
            rows[:, None, :] * rows[None, :, :] * beta**4, beta, axis=2
        )
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-6)
