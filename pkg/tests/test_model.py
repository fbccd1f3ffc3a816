import math

import numpy as np
import pytest
from scipy import optimize

from gcmchaos.model import (
    ModelParams,
    accessible_domain,
    default_oscillator_length,
    global_minimum,
    potential,
    potential_cartesian,
    potential_gradient_cartesian,
    quadratic_well,
    resonance_perturbation_strength,
    stationary_points,
)


def fd_second_derivative(f, x0, h=1e-4):
    # 3-point central stencil; h = 1e-4 balances truncation against the
    # 4*eps*|f|/h^2 roundoff floor, keeping the oracle below 1e-6 error.
    return (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / h**2


class TestPotential:
    def test_vanishes_at_origin(self):
        p = ModelParams(B=0.62, hbar=0.1)
        for g in (0.0, 1.3, 4.0):
            assert potential(p, 0.0, g) == 0.0

    def test_direct_substitution_at_minimum(self):
        # A*1 + B*cos(pi) + C*1 = -1 - 2/3 + 1
        p = ModelParams(B=2.0 / 3.0, hbar=0.1)
        assert potential(p, 1.0, math.pi / 3) == pytest.approx(-2.0 / 3.0, abs=1e-15)

    def test_b_zero_unit_radius(self):
        p = ModelParams(B=0.0, hbar=0.1)
        for g in (0.0, 0.7, 2.0):
            assert potential(p, 1.0, g) == pytest.approx(0.0, abs=1e-15)

    def test_threefold_and_reflection_symmetry(self):
        p = ModelParams(B=0.62, hbar=0.1)
        rng = np.random.default_rng(7)
        beta = rng.uniform(0, 2, 200)
        gamma = rng.uniform(0, 2 * np.pi, 200)
        np.testing.assert_allclose(
            potential(p, beta, gamma), potential(p, beta, gamma + 2 * np.pi / 3),
            rtol=0, atol=1e-13,
        )
        np.testing.assert_allclose(
            potential(p, beta, gamma), potential(p, beta, -gamma),
            rtol=0, atol=1e-13,
        )

    def test_sign_flip_of_b_is_gamma_shift(self):
        pp = ModelParams(B=0.62, hbar=0.1)
        pm = ModelParams(B=-0.62, hbar=0.1)
        rng = np.random.default_rng(8)
        beta = rng.uniform(0, 2, 200)
        gamma = rng.uniform(0, 2 * np.pi, 200)
        np.testing.assert_allclose(
            potential(pm, beta, gamma), potential(pp, beta, gamma + np.pi / 3),
            rtol=0, atol=1e-13,
        )


class TestPotentialCartesian:
    def test_origin(self):
        p = ModelParams(B=0.62, hbar=0.1)
        assert potential_cartesian(p, 0.0, 0.0) == 0.0

    def test_matches_polar_form(self):
        p = ModelParams(B=0.62, hbar=0.1)
        rng = np.random.default_rng(11)
        x = rng.uniform(-2, 2, 100)
        y = rng.uniform(-2, 2, 100)
        beta = np.hypot(x, y)
        gamma = np.arctan2(y, x)
        np.testing.assert_allclose(
            potential_cartesian(p, x, y), potential(p, beta, gamma),
            rtol=1e-13, atol=1e-13,
        )

    def test_rotation_by_two_pi_thirds(self):
        p = ModelParams(B=0.62, hbar=0.1)
        rng = np.random.default_rng(12)
        x = rng.uniform(-2, 2, 50)
        y = rng.uniform(-2, 2, 50)
        c, s = math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)
        np.testing.assert_allclose(
            potential_cartesian(p, c * x - s * y, s * x + c * y),
            potential_cartesian(p, x, y),
            rtol=0, atol=1e-13,
        )

    def test_gradient_against_finite_differences(self):
        p = ModelParams(B=0.43, hbar=0.1)
        h = 1e-6
        for x, y in [(0.3, -0.8), (1.1, 0.2), (-0.5, 0.9)]:
            gx, gy = potential_gradient_cartesian(p, x, y)
            gx_fd = (potential_cartesian(p, x + h, y) - potential_cartesian(p, x - h, y)) / (2 * h)
            gy_fd = (potential_cartesian(p, x, y + h) - potential_cartesian(p, x, y - h)) / (2 * h)
            assert gx == pytest.approx(gx_fd, abs=1e-8)
            assert gy == pytest.approx(gy_fd, abs=1e-8)


class TestStationaryPoints:
    def test_resonant_case_exact_minimum(self):
        p = ModelParams(B=2.0 / 3.0, hbar=0.1)
        mins = [q for q in stationary_points(p) if q.kind == "minimum"]
        assert len(mins) == 3
        # Radial equation 4 b^2 - 3 B b - 2 = 0 has the root b = 1 for B = 2/3.
        beta_oracle = max(np.roots([4.0, -3.0 * (2.0 / 3.0), -2.0]).real)
        for q in mins:
            assert q.beta == pytest.approx(beta_oracle, abs=1e-12)
            assert q.beta == pytest.approx(1.0, abs=1e-12)
            assert q.energy == pytest.approx(-2.0 / 3.0, abs=1e-12)
        assert sorted(q.gamma for q in mins) == pytest.approx(
            [math.pi / 3, math.pi, 5 * math.pi / 3], abs=1e-12
        )

    def test_b_zero_ring(self):
        p = ModelParams(B=0.0, hbar=0.1)
        pts = stationary_points(p)
        kinds = {q.kind for q in pts}
        assert "local-maximum" in kinds and "minimum" in kinds
        ring = [q for q in pts if q.kind == "minimum"]
        # 1D calculus oracle on -b^2 + b^4.
        beta_oracle = float(
            optimize.minimize_scalar(
                lambda b: -b**2 + b**4, bounds=(0.1, 2), method="bounded",
                options={"xatol": 1e-12},
            ).x
        )
        assert ring[0].beta == pytest.approx(beta_oracle, abs=1e-6)
        assert ring[0].beta == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert ring[0].energy == pytest.approx(-0.25, abs=1e-14)

    def test_saddle_below_origin(self):
        p = ModelParams(B=0.24, hbar=0.1)
        pts = stationary_points(p)
        saddles = [q for q in pts if q.kind == "saddle"]
        assert len(saddles) == 3
        # Numeric minimization oracle along the gamma = 0 ray.
        res = optimize.minimize_scalar(
            lambda b: potential(p, b, 0.0), bounds=(0.05, 2.0), method="bounded"
        )
        assert saddles[0].energy == pytest.approx(float(res.fun), abs=1e-9)
        assert saddles[0].energy < 0.0

    def test_gradient_vanishes_everywhere(self):
        for B in (0.24, 0.62, 1.09, -0.8):
            p = ModelParams(B=B, hbar=0.1)
            for q in stationary_points(p):
                gx, gy = potential_gradient_cartesian(
                    p, q.beta * math.cos(q.gamma), q.beta * math.sin(q.gamma)
                )
                assert math.hypot(gx, gy) < 1e-10

    def test_minima_angles_for_positive_b(self):
        p = ModelParams(B=1.09, hbar=0.1)
        mins = sorted(q.gamma for q in stationary_points(p) if q.kind == "minimum")
        assert mins == pytest.approx([math.pi / 3, math.pi, 5 * math.pi / 3], abs=1e-12)


class TestQuadraticWell:
    def test_resonance_equality(self):
        w = quadratic_well(ModelParams(B=2.0 / 3.0, hbar=0.1))
        assert abs(w.k_beta - w.k_gamma) < 1e-10

    def test_against_finite_differences(self):
        p = ModelParams(B=2.0 / 3.0, hbar=0.1)
        w = quadratic_well(p)
        kb_fd = fd_second_derivative(lambda b: potential(p, b, w.gamma0), w.beta0)
        kg_fd = fd_second_derivative(lambda g: potential(p, w.beta0, g), w.gamma0) / w.beta0**2
        assert w.k_beta == pytest.approx(kb_fd, abs=1e-6)
        assert w.k_gamma == pytest.approx(kg_fd, abs=1e-6)

    def test_gamma_stiffness_vanishes_with_b(self):
        w = quadratic_well(ModelParams(B=1e-6, hbar=0.1))
        assert 0 < w.k_gamma < 1e-5

    def test_quadratic_form_matches_potential_along_ray(self):
        p = ModelParams(B=0.62, hbar=0.1)
        w = quadratic_well(p)
        d = 1e-3
        v = potential(p, w.beta0 + d, w.gamma0)
        assert abs(v - w.V0 - 0.5 * w.k_beta * d**2) < 1e-7

    def test_rejects_b_zero(self):
        with pytest.raises(ValueError):
            quadratic_well(ModelParams(B=0.0, hbar=0.1))

    def test_resonance_location(self):
        b_star = resonance_perturbation_strength()
        assert b_star == pytest.approx(2.0 / 3.0, abs=1e-10)


class TestAccessibleDomain:
    def test_b_zero_zero_energy(self):
        p = ModelParams(B=0.0, hbar=0.1)
        for g in (0.0, 1.0):
            (lo, hi), = accessible_domain(p, 0.0, g)
            assert lo == pytest.approx(0.0, abs=1e-12)
            assert hi == pytest.approx(1.0, abs=1e-12)

    def test_below_minimum_is_empty(self):
        p = ModelParams(B=0.62, hbar=0.1)
        v0 = global_minimum(p).energy
        assert accessible_domain(p, v0 - 0.1, math.pi / 3) == []

    def test_high_energy_single_interval(self):
        p = ModelParams(B=0.62, hbar=0.1)
        (lo, hi), = accessible_domain(p, 10.0, 0.0)
        assert lo == pytest.approx(0.0, abs=1e-12)
        assert potential(p, hi, 0.0) == pytest.approx(10.0, abs=1e-10)

    def test_endpoints_solve_v_equals_e(self):
        # Defining-property oracle: endpoints sit on V = E, interior below,
        # exterior above.
        p = ModelParams(B=0.62, hbar=0.1)
        E = -0.1
        ivals = accessible_domain(p, E, math.pi / 3)
        assert len(ivals) == 1
        lo, hi = ivals[0]
        assert potential(p, lo, math.pi / 3) == pytest.approx(E, abs=1e-10)
        assert potential(p, hi, math.pi / 3) == pytest.approx(E, abs=1e-10)
        assert potential(p, 0.5 * (lo + hi), math.pi / 3) < E
        assert potential(p, hi + 0.1, math.pi / 3) > E

    def test_two_interval_case_for_positive_a(self):
        # A > 0 creates a radial bump separating the origin pocket from the well.
        p = ModelParams(B=-3.0, hbar=0.1, A=1.0)
        E = 0.01
        ivals = accessible_domain(p, E, 0.0)
        assert len(ivals) == 2
        for lo, hi in ivals:
            if lo > 0:
                assert potential(p, lo, 0.0) == pytest.approx(E, abs=1e-10)
            assert potential(p, hi, 0.0) == pytest.approx(E, abs=1e-10)
        gap_mid = 0.5 * (ivals[0][1] + ivals[1][0])
        assert potential(p, gap_mid, 0.0) > E


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            ModelParams(B=0.1, hbar=0.1, C=-1.0)
        with pytest.raises(ValueError):
            ModelParams(B=0.1, hbar=0.0)
        with pytest.raises(ValueError):
            ModelParams(B=0.1, hbar=0.1, K=-2.0)

    def test_kappa(self):
        assert ModelParams(B=0.1, hbar=0.2, K=4.0).kappa == pytest.approx(0.01)

    def test_default_oscillator_length(self):
        assert default_oscillator_length(ModelParams(B=0.0, hbar=0.1)) == 1.0
        p = ModelParams(B=0.62, hbar=0.1)
        w = quadratic_well(p)
        assert default_oscillator_length(p) == pytest.approx(
            math.sqrt(p.hbar / (p.K * w.omega_beta))
        )
