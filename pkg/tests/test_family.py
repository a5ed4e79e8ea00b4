import cmath
import math

import numpy as np
import pytest

import meroslice as M
import meroslice._mathcore as mc
from conftest import FIXED_POINT_22, POLE0_22


def rand_param(rng, rho=None):
    """A random non-singular slice parameter."""
    while True:
        if rho is None:
            r = 0.05 + 0.85 * rng.random()
            rho_c = r * cmath.exp(2j * math.pi * rng.random())
        else:
            rho_c = rho
        lam = complex(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5))
        if abs(lam) < 0.05 or abs(lam - rho_c / 2) < 0.05:
            continue
        return M.ParamPoint(rho_c, lam)


class TestDeriveMu:
    def test_tangent_slice(self, rho23):
        # lambda = rho gives the odd map with mu = -lambda
        assert M.derive_mu(rho23, rho23) == pytest.approx(-rho23, abs=1e-15)

    def test_singular_at_half_rho(self, rho23):
        with pytest.raises(M.SingularParameter):
            M.derive_mu(rho23, rho23 / 2)
        with pytest.raises(M.SingularParameter):
            M.derive_mu(rho23, 0j)
        with pytest.raises(M.SingularParameter):
            M.derive_mu(0j, 1.0 + 0j)

    def test_relation_residual(self, rho23):
        mu = M.derive_mu(rho23, 2 + 2j)
        assert abs(1 / (2 + 2j) - 1 / mu - 2 / rho23) < 1e-12
        assert mu == pytest.approx(-0.36065573770491804 + 0.03278688524590162j, abs=1e-12)

    def test_relation_residual_random(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            p = rand_param(rng)
            assert abs(1 / p.lam - 1 / p.mu - 2 / p.rho) < 1e-12


class TestParamPoint:
    def test_rho_outside_disk(self):
        with pytest.raises(M.DomainError):
            M.ParamPoint(1.5 + 0j, 2.0)
        with pytest.raises(M.DomainError):
            M.ParamPoint(0j, 2.0)

    def test_inverted_matches_formula(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        lam = 2 + 2j
        assert p.inverted().lam == pytest.approx(lam / (2 * lam / rho23 - 1), abs=1e-14)


class TestEvalF:
    def test_origin_fixed(self, rho23):
        p = M.ParamPoint(rho23, rho23)
        assert M.eval_f(p, 0j) == 0

    def test_tangent_oracle(self, rho23):
        # mu = -lambda makes f(z) = rho * tanh(z); compare against math.tanh
        p = M.ParamPoint(rho23, rho23)
        for x in (0.25, 1.0, -0.7):
            assert M.eval_f(p, complex(x)) == pytest.approx(
                complex((2 / 3) * math.tanh(x)), abs=1e-14)
        z = 0.4 + 0.9j
        assert M.eval_f(p, z) == pytest.approx(rho23 * cmath.tanh(z), abs=1e-13)

    def test_asymptotic_values(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        assert abs(M.eval_f(p, 40 + 3j) - p.lam) < 1e-30
        assert abs(M.eval_f(p, -40 + 3j) - p.mu) < 1e-30
        # overflow-guarded region stays finite and pinned to the asymptotic value
        assert M.eval_f(p, 5000 - 17j) == p.lam

    def test_pole_guard(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        with pytest.raises(M.PoleProximity):
            M.eval_f(p, M.pole_k(p, 3))


class TestEvalFPrime:
    def test_multiplier_at_origin(self, rho23):
        assert abs(M.eval_f_prime(M.ParamPoint(rho23, rho23), 0j) - rho23) < 1e-15
        assert abs(M.eval_f_prime(M.ParamPoint(rho23, 2 + 2j), 0j) - rho23) < 1e-15

    def test_multiplier_identity_random(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            p = rand_param(rng)
            assert abs(M.eval_f_prime(p, 0j) - p.rho) < 1e-10

    def test_finite_difference_oracle(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        rng = np.random.default_rng(3)
        h = 1e-6
        checked = 0
        while checked < 20:
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            d, _ = mc.nearest_pole_raw(z, mc.pole_base_raw(p.rho, p.lam))
            if d < 1e-2:
                continue
            fd = (M.eval_f(p, z + h) - M.eval_f(p, z - h)) / (2 * h)
            exact = M.eval_f_prime(p, z)
            assert abs(fd - exact) < 1e-6 * max(1.0, abs(exact))
            checked += 1


class TestPoles:
    def test_tangent_poles(self, rho23):
        p = M.ParamPoint(rho23, rho23)
        assert M.pole_k(p, 0) == pytest.approx(-1j * math.pi / 2, abs=1e-15)
        assert M.pole_k(p, 1) == pytest.approx(1j * math.pi / 2, abs=1e-15)

    def test_denominator_vanishes(self, rho23):
        rng = np.random.default_rng(5)
        for _ in range(25):
            p = rand_param(rng)
            for k in (-3, 0, 2):
                pk = M.pole_k(p, k)
                # e^{2 p_k} must equal lambda/mu = (rho - 2 lambda)/rho
                assert abs(cmath.exp(2 * pk) * p.mu / p.lam - 1) < 1e-10

    def test_fig1_pole(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        p0 = M.pole_k(p, 0)
        assert p0 == pytest.approx(POLE0_22, abs=1e-10)
        assert abs(M.eval_f(p, p0 + 1e-6)) > 1e4

    def test_branch_in_stated_range(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            p = rand_param(rng)
            im = M.pole_k(p, 0).imag
            assert -math.pi / 2 <= im < math.pi / 2


class TestInverseBranch:
    def test_fixes_origin(self, rho23):
        for lam in (rho23, 2 + 2j, 0.4 - 0.3j):
            p = M.ParamPoint(rho23, lam)
            assert M.inverse_branch(p, 0, 0j) == 0

    def test_round_trip(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            p = rand_param(rng)
            k = int(rng.integers(-6, 7))
            w = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            if abs(w - p.lam) < 1e-6 or abs(w - p.mu) < 1e-6:
                continue
            z = M.inverse_branch(p, k, w)
            assert abs(mc.eval_f_raw(p.lam, p.mu, z) - w) < 1e-10

    def test_branch_strip(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        z = M.inverse_branch(p, 0, 1.0 + 0j)
        assert abs(M.eval_f(p, z) - 1.0) < 1e-10
        assert -math.pi / 2 <= z.imag < math.pi / 2
        assert abs(z.imag - M.pole_k(p, 0).imag) < math.pi

    def test_omitted_values(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        with pytest.raises(M.OmittedValue):
            M.inverse_branch(p, 0, p.lam)
        with pytest.raises(M.OmittedValue):
            M.inverse_branch(p, 2, p.mu)

    def test_limit_is_pole(self):
        rng = np.random.default_rng(19)
        for _ in range(25):
            while True:
                p = rand_param(rng)
                if 0.1 < abs(p.lam) < 0.75:
                    break
            k = int(rng.integers(-4, 5))
            ray = cmath.exp(2j * math.pi * rng.random())
            g = M.inverse_branch(p, k, 1e6 * ray)
            assert abs(g - M.pole_k(p, k)) < 1e-6

    def test_images_avoid_asymptotic_values(self, rho23):
        # inverse branch images (preimages of finite points) never hit lam or mu
        p = M.ParamPoint(rho23, 2 + 2j)
        rng = np.random.default_rng(23)
        for _ in range(200):
            k = int(rng.integers(-5, 6))
            w = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
            if abs(w - p.lam) < 1e-3 or abs(w - p.mu) < 1e-3:
                continue
            z = M.inverse_branch(p, k, w)
            assert abs(z - p.lam) > 1e-9 and abs(z - p.mu) > 1e-9

    def test_values_bounded_away_off_tracts(self, rho23):
        # omitted values are approached only through the asymptotic tracts
        p = M.ParamPoint(rho23, rho23)
        rng = np.random.default_rng(29)
        for _ in range(300):
            z = complex(rng.uniform(-3, 3), rng.uniform(-8, 8))
            d, _ = mc.nearest_pole_raw(z, mc.pole_base_raw(p.rho, p.lam))
            if d < 1e-3:
                continue
            fz = M.eval_f(p, z)
            assert abs(fz - p.lam) > 1e-4
            assert abs(fz - p.mu) > 1e-4


class TestSymmetries:
    def test_conjugation_symmetry(self):
        # swapping and negating the asymptotic values conjugates by z -> -z:
        # f_{-mu,-lam,rho}(z) = -f_{lam,mu,rho}(-z)
        rng = np.random.default_rng(31)
        for _ in range(50):
            p = rand_param(rng)
            q = M.ParamPoint(p.rho, -p.mu)
            assert abs(q.mu - (-p.lam)) < 1e-12 * max(1.0, abs(p.lam))
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            d, _ = mc.nearest_pole_raw(-z, mc.pole_base_raw(p.rho, p.lam))
            if d < 1e-6:
                continue
            rhs = M.eval_f(q, z)
            assert abs(-M.eval_f(p, -z) - rhs) < 1e-12 * max(1.0, abs(rhs))

    def test_real_rho_reflection(self, rho23):
        # f(-conj z) = -conj(f(z)) when rho is real and mu = -conj(lambda),
        # i.e. lambda on the inversion circle C_0 (tangent point included)
        rng = np.random.default_rng(37)
        lams = [rho23] + [rho23 / 2 + (rho23 / 2) * cmath.exp(1j * t)
                          for t in (0.5, 1.7, -2.1)]
        for lam in lams:
            p = M.ParamPoint(rho23, lam)
            assert abs(p.mu - (-p.lam.conjugate())) < 1e-13
            for _ in range(20):
                z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
                d, _ = mc.nearest_pole_raw(z, mc.pole_base_raw(p.rho, p.lam))
                if d < 1e-6:
                    continue
                lhs = M.eval_f(p, -z.conjugate())
                rhs = -M.eval_f(p, z).conjugate()
                assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


class TestIterate:
    def test_tangent_orbit_to_zero(self, rho23):
        p = M.ParamPoint(rho23, rho23)
        rec = M.iterate(p, p.lam, 2000)
        assert rec.verdict is M.Verdict.CONVERGED_TO_ZERO
        assert abs(rec.points[-1]) < 1e-9

    def test_fig1_cycle(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        rec = M.iterate(p, p.lam, 2000)
        assert rec.verdict is M.Verdict.CONVERGED_TO_CYCLE
        assert rec.cycle.period == 1
        assert abs(rec.cycle.points[0] - FIXED_POINT_22) < 1e-4
        assert abs(rec.cycle.multiplier) < 1

    def test_pole_seed(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        rec = M.iterate(p, M.pole_k(p, 0), 100)
        assert rec.verdict is M.Verdict.NEAR_POLE_BLOWUP
        assert rec.iterations_used == 0
        assert rec.pole_index == 0

    def test_orbit_consistency_against_kernel(self):
        rng = np.random.default_rng(41)
        code_of = {
            M.Verdict.CONVERGED_TO_ZERO: mc.FATE_ZERO,
            M.Verdict.CONVERGED_TO_CYCLE: mc.FATE_CYCLE,
            M.Verdict.NEAR_POLE_BLOWUP: mc.FATE_POLE,
            M.Verdict.BUDGET_EXHAUSTED: mc.FATE_BUDGET,
            M.Verdict.ASYMPTOTIC_TRACT_EXIT: mc.FATE_ESCAPE,
        }
        for _ in range(50):
            p = rand_param(rng, rho=complex(2 / 3))
            rec = M.iterate(p, p.lam, 1500)
            code, period, iters, _, _, _ = mc.fate_raw(
                p.rho, p.lam, p.mu, p.lam, 1500, mc.EPS_ZERO, 1e-7, 64, mc.EPS_POLE)
            assert code_of[rec.verdict] == code
            assert rec.iterations_used == iters
            if rec.cycle is not None:
                assert rec.cycle.period == period

    def test_points_follow_map(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        rec = M.iterate(p, 0.3 + 0.2j, 50)
        for a, b in zip(rec.points, rec.points[1:]):
            assert mc.eval_f_raw(p.lam, p.mu, a) == b


class TestSchwarzian:
    def test_constant_minus_two(self, rho23):
        assert M.schwarzian_check(M.ParamPoint(rho23, rho23), 0.3 + 0.1j) == pytest.approx(
            -2.0 + 0j, abs=1e-4)
        assert M.schwarzian_check(M.ParamPoint(rho23, 2 + 2j), 1 - 0.5j) == pytest.approx(
            -2.0 + 0j, abs=1e-4)

    def test_constant_across_grid(self):
        rng = np.random.default_rng(43)
        for _ in range(5):
            p = rand_param(rng)
            base = mc.pole_base_raw(p.rho, p.lam)
            for re in np.linspace(-1.2, 1.2, 10):
                for im in np.linspace(-1.2, 1.2, 10):
                    z = complex(re, im)
                    d, _ = mc.nearest_pole_raw(z, base)
                    if d < 0.15:
                        continue
                    assert abs(M.schwarzian_check(p, z) + 2.0) < 1e-4

    def test_h_refinement_quadratic(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        z = 0.37 + 0.21j
        e_coarse = abs(M.schwarzian_check(p, z, h=0.02) + 2.0)
        e_fine = abs(M.schwarzian_check(p, z, h=0.01) + 2.0)
        assert 2.5 < e_coarse / e_fine < 6.5

    def test_stencil_pole_guard(self, rho23):
        p = M.ParamPoint(rho23, 2 + 2j)
        with pytest.raises(M.PoleProximity):
            M.schwarzian_check(p, M.pole_k(p, 0) + 5e-4)
        with pytest.raises(M.PoleProximity):
            M.schwarzian_check(p, M.pole_k(p, 0) + 5e-4, h=3e-4)
