"""Bargmann transform, Fock shifts, planar quadrature and lattice sums.

The Hermite-to-monomial mapping and the shift covariance are checked by
two independent routes: line quadrature on the transform side against
closed-form monomials on the Fock side.
"""

import math

import numpy as np
import pytest

import gabfock as gf
from gabfock.errors import (DivergenceError, ExtentTooSmallError,
                            TailNotCertifiedError)

PI = math.pi

TEST_POINTS = [0.0, 1.0, -0.4 + 0.9j, 1.3 + 0.7j, 0.3 - 1.6j]


def hermite_coeff(n):
    c = np.zeros(n + 1)
    c[n] = 1.0
    return c


class TestMonomialExpansion:
    def test_e3_at_one_closed_form(self):
        # e_3(1) = (pi^3 / 3!)^{1/2}
        want = math.sqrt(PI ** 3 / 6.0)
        got = gf.monomial(3).eval(1.0)
        assert got == pytest.approx(want, rel=1e-14)
        assert want == pytest.approx(2.2732603854486113, rel=1e-15)

    def test_norm_is_coefficient_norm(self):
        F = gf.MonomialExpansion(np.array([1.0, 2.0j, -0.5]))
        assert F.norm_sq() == pytest.approx(1.0 + 4.0 + 0.25, rel=1e-15)
        assert gf.fock_norm_sq(F) == F.norm_sq()

    def test_eval_array_shape(self):
        z = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
        assert gf.monomial(1).eval(z).shape == (2, 2)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gf.MonomialExpansion(np.array([]))


class TestBargmannTransform:
    def test_hermite_images_are_monomials(self):
        z = np.array(TEST_POINTS, dtype=complex)
        for n in [0, 1, 3, 10, 20]:
            got = gf.bargmann_transform(hermite_coeff(n), z)
            want = gf.monomial(n).eval(z)
            assert np.max(np.abs(got - want)) < 1e-10

    def test_gaussian_maps_to_constant(self):
        z = np.array(TEST_POINTS, dtype=complex)
        got = gf.bargmann_transform(gf.GAUSSIAN, z)
        assert np.max(np.abs(got - 2.0 ** -0.25)) < 1e-12

    def test_linearity(self):
        coeffs = np.array([0.3, -0.7, 0.0, 0.2j])
        z = 0.8 - 0.5j
        whole = gf.bargmann_transform(coeffs, z)
        parts = sum(c * gf.bargmann_transform(hermite_coeff(n), z)
                    for n, c in enumerate(coeffs))
        assert whole == pytest.approx(parts, abs=1e-12)

    def test_unitarity_on_norms(self):
        rng = np.random.default_rng(11)
        coeffs = rng.standard_normal(15) + 1j * rng.standard_normal(15)
        coeffs /= np.linalg.norm(coeffs)
        # dr = 0.04 keeps the rule error near 1e-7, well under the check
        quad = gf.PlanarQuadrature(dr=0.04, r_out=5.5)

        def density(z):
            vals = gf.bargmann_transform(coeffs, z)
            return np.abs(vals) ** 2 * np.exp(-PI * np.abs(z) ** 2)

        got = gf.integrate_plane(density, quad).total
        assert got == pytest.approx(1.0, abs=1e-6)

    def test_extent_guard(self):
        with pytest.raises(ExtentTooSmallError):
            gf.bargmann_transform(hermite_coeff(0), 30.0 + 0.0j)

    def test_scalar_in_scalar_out(self):
        out = gf.bargmann_transform(hermite_coeff(1), 0.5 + 0.5j)
        assert isinstance(out, complex)


class TestFockShift:
    def test_covariance_with_tf_shift(self):
        # B(pi_zeta f) must equal beta_zeta(B f); the two sides go through
        # completely different code paths (line quadrature vs monomials)
        zeta = gf.PhasePoint(0.6, -0.3)
        f = hermite_coeff(2)
        Bf = gf.monomial(2)
        z = np.array(TEST_POINTS, dtype=complex)
        lhs = gf.bargmann_transform(lambda t: gf.tf_shift(f, zeta, t), z)
        rhs = gf.fock_shift(zeta, Bf, z)
        assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_shift_preserves_norm_on_lattice_scale(self):
        # |beta_zeta e_0|^2 exp(-pi|z|^2) integrates to 1 like e_0 itself
        zeta = gf.PhasePoint(0.4, 0.7)
        quad = gf.PlanarQuadrature(dr=0.02, r_out=7.0)

        def density(z):
            vals = gf.fock_shift(zeta, gf.monomial(0), z)
            return np.abs(vals) ** 2 * np.exp(-PI * np.abs(z) ** 2)

        got = gf.integrate_plane(density, quad).total
        assert got == pytest.approx(1.0, abs=1e-6)

    def test_zero_based_shift_rejected(self):
        zb = gf.ZeroBased(np.array([1.0 + 0j]))
        with pytest.raises(TypeError):
            gf.fock_shift((0.1, 0.2), zb, 0.5)


class TestGaborFockIdentity:
    def test_coefficient_equals_kernel_formula(self):
        # <f, pi_zeta g0> = 2^{-1/4} exp(-i pi x xi) exp(-pi|zeta|^2/2)
        #                   (B f)(conj(zeta)); checked for Hermite f where
        # (B h_k)(w) = e_k(w) in closed form
        for k in [0, 1, 2, 5]:
            for zeta in [(0.3, 0.0), (0.0, -0.7), (0.5, 0.8), (-0.6, 0.45)]:
                x, xi = zeta
                lhs = gf.gabor_coefficient(hermite_coeff(k), gf.GAUSSIAN, zeta)
                w = complex(x, -xi)
                rhs = (2.0 ** -0.25 * np.exp(-1j * PI * x * xi)
                       * math.exp(-PI * (x * x + xi * xi) / 2.0)
                       * gf.monomial(k).eval(w))
                assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_squared_modulus_weight(self):
        # |<f, pi_zeta g0>|^2 = 2^{-1/2} |B f(conj zeta)|^2 exp(-pi|zeta|^2)
        coeffs = np.array([0.6, 0.0, -0.8])
        zeta = (0.9, -0.2)
        lhs = abs(gf.gabor_coefficient(coeffs, gf.GAUSSIAN, zeta)) ** 2
        w = complex(zeta[0], -zeta[1])
        Bf = sum(c * gf.monomial(n).eval(w) for n, c in enumerate(coeffs))
        rhs = 2.0 ** -0.5 * abs(Bf) ** 2 * math.exp(-PI * abs(w) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-11)


class TestReproducing:
    def test_kernel_reproduces_values(self):
        rng = np.random.default_rng(3)
        coeffs = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        F = gf.MonomialExpansion(coeffs)
        for z in [0.2, 1.0 - 0.6j, -1.4 + 0.3j]:
            assert gf.reproducing_eval(F, z) == pytest.approx(
                complex(F.eval(z)), abs=1e-10)

    def test_requires_expansion(self):
        with pytest.raises(TypeError):
            gf.reproducing_eval(gf.ZeroBased(np.array([1.0 + 0j])), 0.0)


class TestPhiComparison:
    def test_equality_on_the_ray(self):
        w = 1.4 + 0.9j
        for s in [0.5, 1.0, 2.0]:
            z = s * w
            got = abs(gf.phi_test(0.8, w, z))
            assert got == pytest.approx(math.exp(0.8 * abs(z) ** 2), rel=1e-12)

    def test_global_upper_bound(self):
        rng = np.random.default_rng(5)
        z = rng.standard_normal(50) * 2 + 1j * rng.standard_normal(50) * 2
        vals = np.abs(gf.phi_test(0.9, 1.0 - 2.0j, z))
        assert np.all(vals <= np.exp(0.9 * np.abs(z) ** 2) * (1 + 1e-12))

    def test_zero_reference_rejected(self):
        with pytest.raises(ValueError):
            gf.phi_test(0.5, 0.0, 1.0)


class TestPlanarQuadrature:
    def test_total_weight_is_disk_area(self):
        quad = gf.PlanarQuadrature(dr=0.05, r_out=3.0)
        total = sum(float(w.sum()) for _, w, _ in quad.iter_chunks())
        assert total == pytest.approx(PI * 9.0, rel=1e-13)

    def test_gaussian_integral_and_halving(self):
        # int exp(-pi|z|^2) dm = 1; the rule is fourth order in dr
        errs = {}
        for dr in [0.04, 0.02]:
            quad = gf.PlanarQuadrature(dr=dr, r_out=6.0)
            got = gf.integrate_plane(
                lambda z: np.exp(-PI * np.abs(z) ** 2), quad).total
            errs[dr] = abs(got - 1.0)
        assert errs[0.02] < 1e-8
        assert errs[0.02] < errs[0.04]

    def test_monomial_norm_via_disk(self):
        quad = gf.PlanarQuadrature(dr=0.02, r_out=6.0)
        dens = lambda z: np.abs(gf.monomial(5).eval(z)) ** 2 * np.exp(
            -PI * np.abs(z) ** 2)
        got = gf.integrate_plane(dens, quad).total
        assert got == pytest.approx(1.0, abs=1e-7)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            gf.PlanarQuadrature(dr=0.0, r_out=1.0)
        with pytest.raises(ValueError):
            gf.PlanarQuadrature(dr=1.0, r_out=0.5)


class TestZeroBased:
    def _paired(self, seed=13, degree=6):
        """A random polynomial in both representations."""
        rng = np.random.default_rng(seed)
        coeffs = rng.standard_normal(degree + 1) \
            + 1j * rng.standard_normal(degree + 1)
        F = gf.MonomialExpansion(coeffs)
        p = F.scaled_coeffs()
        roots = np.roots(p[::-1])
        log_pref = float(np.log(np.abs(p[-1]))
                         + np.log(np.abs(roots)).sum())
        return F, gf.ZeroBased(roots, log_prefactor=log_pref)

    def test_logabs_matches_expansion(self):
        F, zb = self._paired()
        z = np.array([0.5, -1.2 + 0.4j, 2.0 + 2.0j, 0.0])
        want = np.log(np.abs(F.eval(z)))
        got = zb.logabs(z)
        assert np.allclose(got, want, atol=1e-10)

    def test_exact_zero_gives_neg_inf(self):
        zb = gf.ZeroBased(np.array([1.0 + 1.0j, 0.0]))
        out = zb.logabs(np.array([1.0 + 1.0j, 0.0, 2.0]))
        assert out[0] == -np.inf and out[1] == -np.inf
        assert np.isfinite(out[2])

    def test_norms_agree_between_representations(self):
        F, zb = self._paired()
        quad = gf.PlanarQuadrature(dr=0.02, r_out=7.0)
        assert gf.fock_norm_sq(zb, quad) == pytest.approx(
            gf.fock_norm_sq(F), rel=1e-7)

    def test_zero_based_norm_needs_quadrature(self):
        with pytest.raises(ValueError):
            gf.fock_norm_sq(gf.ZeroBased(np.array([1.0 + 0j])))

    def test_divergence_flag_when_rim_active(self):
        # |e_20|^2 exp(-pi|z|^2) peaks near |z| = sqrt(20/pi) ~ 2.52,
        # so a disk of radius 2 must be rejected
        peak20 = gf.ZeroBased(np.zeros(20, dtype=complex),
                              log_prefactor=0.5 * (20 * math.log(PI)
                                                   - math.lgamma(21)))
        with pytest.raises(DivergenceError):
            gf.fock_norm_sq(peak20, gf.PlanarQuadrature(dr=0.02, r_out=2.0))

    def test_growth_bound_dominates(self):
        _, zb = self._paired(seed=4)
        rng = np.random.default_rng(6)
        for r in [0.5, 2.0, 5.0]:
            phis = rng.uniform(0, 2 * PI, 16)
            vals = zb.logabs(r * np.exp(1j * phis))
            assert np.all(vals <= zb.growth_logbound(r) + 1e-12)


class TestSamplingSum:
    def test_constant_function_theta_product(self):
        # for F = e_0 the sum factorizes into c0 * theta(a)^2 with
        # theta(a) = sum_m exp(-pi a^2 m^2)
        a = 0.75
        theta = sum(math.exp(-PI * a * a * m * m) for m in range(-40, 41))
        want = 2.0 ** -0.5 * theta * theta
        got = gf.sampling_sum(gf.monomial(0), gf.SquareLattice(a), rho=8.0)
        assert got == pytest.approx(want, rel=1e-13)
        assert got == pytest.approx(1.2760235917402403, rel=1e-12)

    def test_representations_agree(self):
        rng = np.random.default_rng(23)
        coeffs = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        F = gf.MonomialExpansion(coeffs)
        p = F.scaled_coeffs()
        roots = np.roots(p[::-1])
        zb = gf.ZeroBased(roots, log_prefactor=float(
            np.log(np.abs(p[-1])) + np.log(np.abs(roots)).sum()))
        lat = gf.SquareLattice(0.8)
        a = gf.sampling_sum(F, lat, 8.5)
        b = gf.sampling_sum(zb, lat, 8.5)
        assert a == pytest.approx(b, rel=1e-12)

    def test_custom_prefactor(self):
        lat = gf.SquareLattice(0.75)
        base = gf.sampling_sum(gf.monomial(0), lat, 8.0)
        doubled = gf.sampling_sum(gf.monomial(0), lat, 8.0, c0=2.0 ** 0.5)
        assert doubled == pytest.approx(2.0 * base, rel=1e-15)

    def test_tail_not_certified(self):
        with pytest.raises(TailNotCertifiedError):
            gf.sampling_sum(gf.monomial(4), gf.SquareLattice(0.75), rho=2.0)

    def test_zero_function(self):
        F = gf.MonomialExpansion(np.zeros(3))
        assert gf.sampling_sum(F, gf.SquareLattice(0.75), 5.0) == 0.0
