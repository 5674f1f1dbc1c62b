import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from rmtkernels.errors import DomainError
from rmtkernels.finite import (
    MuttalibBorodinEnsemble,
    PolynomialCoeffs,
    ProductEnsemble,
    WishartEnsemble,
    biorthogonality_gram,
    half_line_rule,
    hamiltonian_residual_mb,
    hamiltonian_residual_product,
    kernel,
    mb_kernel,
    mb_operator,
    mb_P,
    mb_P_coeffs,
    mb_Q,
    mb_Z_coeffs,
    normalization,
    product_kernel,
    product_P,
    product_P_coeffs,
    product_Q,
    product_Q_table,
    schrodinger_residual,
    wishart_kernel,
)
from rmtkernels.macroscopic import WishartParams

mp.mp.dps = 30

PTS = np.array([0.3, 1.0, 2.5])


def mp_laguerre(k, alpha, x):
    return float(mp.laguerre(k, alpha, x))


def projection_error(spec, rule, pts=PTS):
    x, w = rule
    left = kernel(spec, pts[:, None], x[None, :])
    right = kernel(spec, x[:, None], pts[None, :])
    target = kernel(spec, pts[:, None], pts[None, :])
    return np.max(np.abs((left * w) @ right - target)), float(np.sum(w * kernel(spec, x, x)))


class TestEnsembleSpecs:
    def test_product_validation(self):
        assert ProductEnsemble(3, [1, 2]).M == 2
        with pytest.raises(DomainError):
            ProductEnsemble(3, (1.5,))
        with pytest.raises(DomainError):
            ProductEnsemble(3, (-1,))
        with pytest.raises(DomainError):
            ProductEnsemble(0, (1,))

    @pytest.mark.parametrize("alpha,theta", [(-1.0, 2), (0.5, 0), (0.5, 1.5)])
    def test_mb_validation(self, alpha, theta):
        with pytest.raises(DomainError):
            MuttalibBorodinEnsemble(3, alpha, theta)

    def test_polynomial_coeffs(self):
        p = PolynomialCoeffs((Fraction(1), Fraction(-2), Fraction(1, 2)), theta=2)
        assert p.degree == 2 and p.basis == "x^theta" and p.exact
        assert p(2.0) == pytest.approx(1 - 8 + 8)
        with pytest.raises(DomainError):
            PolynomialCoeffs((1.0, 0.0))


class TestWishart:
    def test_single_term(self):
        p = WishartParams(1, 1)
        assert wishart_kernel(p, 0.0, 0.0) == pytest.approx(1.0, abs=1e-15)
        assert wishart_kernel(p, 1.5, 0.5) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_symmetric(self):
        p = WishartParams(12, 15)
        x, y = np.meshgrid(np.linspace(0, 40, 9), np.linspace(0, 40, 9))
        assert np.max(np.abs(wishart_kernel(p, x, y) - wishart_kernel(p, y, x))) <= 1e-15

    def test_against_mpmath_sum(self):
        p = WishartParams(6, 8)
        x, y = 1.7, 4.2

        def psi(k, t):
            return mp.sqrt(mp.factorial(k) / mp.gamma(k + 3)) * mp.mpf(t) * mp.e ** (-mp.mpf(t) / 2) * mp.laguerre(k, 2, t)

        ref = sum(psi(k, x) * psi(k, y) for k in range(6))
        assert wishart_kernel(p, x, y) == pytest.approx(float(ref), abs=1e-14)

    def test_projection_and_trace(self):
        spec = WishartEnsemble(WishartParams(20, 21))
        err, trace = projection_error(spec, half_line_rule(2.0, math.sqrt(150.0), order=40, panels=8), np.array([0.5, 5.0, 30.0]))
        assert err <= 1e-6
        assert trace == pytest.approx(20.0, abs=1e-6)

    @pytest.mark.parametrize("k,alpha,x,tol", [(0, 0.0, 1.0, 1e-6), (3, 2.0, 0.5, 1e-5), (3, 2.0, 2.0, 1e-5),
                                               (3, 2.0, 10.0, 1e-5), (10, 0.5, 5.0, 1e-5)])
    def test_schrodinger(self, k, alpha, x, tol):
        assert abs(schrodinger_residual(k, alpha, x)) <= tol

    def test_schrodinger_detects_wrong_equation(self):
        # psi_3 is not an eigenfunction for the k=2 equation
        h = 1e-2
        from rmtkernels.special import laguerre_psi_table

        f = laguerre_psi_table(4, 1.0, 2.0 + h * np.arange(-2, 3))[3]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        wrong = d2 + d1 / 2 + (1 + 4 + 1) * f[2] / 4 - f[2] / 16 - f[2] / 4
        assert abs(wrong) > 1e-2
        assert abs(schrodinger_residual(3, 1.0, 2.0)) <= 1e-6

    def test_schrodinger_domain(self):
        with pytest.raises(DomainError):
            schrodinger_residual(1, 0.0, 1e-4)


class TestProductPolynomials:
    @pytest.mark.parametrize("nu", [(1,), (1, 3), (0, 2, 5)])
    def test_constant_term(self, nu):
        assert product_P(0, nu, 2.7) == pytest.approx(1 / math.prod(math.gamma(v + 1) for v in nu), rel=1e-15)

    @pytest.mark.parametrize("k", [1, 3, 6])
    def test_against_meijer_g(self, k):
        nu = (1, 3)
        for x in (0.4, 2.0, 7.5):
            ref = mp.meijerg([[], [k + 1]], [[0], [-3, -1]], x)
            assert product_P(k, nu, x) == pytest.approx(float(ref), rel=1e-12, abs=1e-15)

    @pytest.mark.parametrize("k,nu", [(3, 2), (5, 0), (7, 4)])
    def test_single_factor_is_laguerre(self, k, nu):
        x = np.array([0.2, 1.1, 3.0, 6.5, 12.0])
        ratio = product_P(k, (nu,), x) / np.array([mp_laguerre(k, nu, t) for t in x])
        assert np.max(np.abs(ratio / ratio[0] - 1)) <= 1e-12

    def test_degree(self):
        c = product_P_coeffs(4, (1, 2))
        assert c.degree == 4 and c.exact
        assert all((-1) ** j * v > 0 for j, v in enumerate(c.coefficients))

    @pytest.mark.parametrize("k,nu,tol", [(0, (1, 2), 0.0), (3, (1, 2), 1e-12), (6, (1, 2, 4), 1e-10), (12, (0, 3, 1, 2), 0.0)])
    def test_hamiltonian_exact(self, k, nu, tol):
        assert hamiltonian_residual_product(k, nu) <= tol

    def test_hamiltonian_float_mode(self):
        assert hamiltonian_residual_product(8, (1, 2), exact=False) <= 1e-12

    def test_hamiltonian_rejects_wrong_index(self):
        # the residual is not identically zero: P_3 against eigenvalue 3 built from another nu
        p = product_P_coeffs(3, (1, 2)).coefficients
        wrong = max(abs(j * p[j] - 3 * p[j] - (j + 1) * (j + 2) * (j + 4) * p[j + 1]) for j in range(3))
        assert wrong > 0


class TestProductQ:
    def test_single_factor_weight(self):
        assert product_Q(0, (0,), 1.0) == pytest.approx(math.exp(-1), rel=1e-13)
        assert product_Q(0, (0,), 50.0) <= 1e-10

    @pytest.mark.parametrize("k,rtol", [(0, 1e-12), (1, 1e-12), (4, 1e-11), (9, 1e-9)])
    def test_against_meijer_g(self, k, rtol):
        for x in (0.05, 1.0, 8.0, 60.0):
            ref = mp.meijerg([[-k], []], [[3, 1], [0]], x)
            assert product_Q(k, (1, 3), x) == pytest.approx(float(ref), rel=rtol, abs=1e-14)

    def test_two_factor_decay_matches_bessel_form(self):
        # G^{2,0}_{0,2}(3, 1 | x) = 2 x^2 K_2(2 sqrt x)
        x = 50.0
        ref = 2 * x**2 * float(mp.besselk(2, 2 * mp.sqrt(x)))
        assert product_Q(0, (1, 3), x) == pytest.approx(ref, rel=1e-12)
        assert product_Q(0, (1, 3), 2000.0) < 1e-30

    def test_table_consistent(self):
        x = np.array([0.5, 3.0])
        tab = product_Q_table(4, (2, 1), x)
        assert tab.shape == (4, 2)
        assert np.allclose(tab[2], product_Q(2, (2, 1), x), rtol=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            product_Q(1, (1,), 0.0)


class TestMuttalibBorodin:
    def test_q_ground_state(self):
        assert mb_Q(0, 0.0, 3, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)
        assert mb_Q(0, 0.5, 2, 2.0) == pytest.approx(2**0.5 * math.exp(-2) / math.gamma(1.5), rel=1e-14)

    def test_q_against_printed_sum(self):
        k, a, th, x = 4, 0.5, 3, 1.7
        ref = mp.mpf(x) ** a * mp.e ** (-x) * mp.fsum(
            (-1) ** j * mp.binomial(k, j) * mp.mpf(x) ** (j * th) / mp.gamma(j * th + a + 1) for j in range(k + 1))
        assert mb_Q(k, a, th, x) == pytest.approx(float(ref), rel=1e-12)

    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_theta_one_is_laguerre(self, k):
        x = np.array([0.2, 1.1, 3.0, 6.5, 12.0])
        lag = np.array([mp_laguerre(k, 1.5, t) for t in x])
        q = mb_Q(k, 1.5, 1, x) / (x**1.5 * np.exp(-x) * lag)
        p = mb_P(k, 1.5, 1, x) / lag
        assert np.max(np.abs(q / q[0] - 1)) <= 1e-12
        assert np.max(np.abs(p / p[0] - 1)) <= 1e-12

    def test_sign_alternation(self):
        z = mb_Z_coeffs(3, 0.5, 2).coefficients
        assert [v > 0 for v in z] == [True, False, True, False]
        assert mb_Z_coeffs(3, 0.5, 2).basis == "x^theta"

    def test_p_first_degree_explicit(self):
        # P_1 = (a+1)/theta + x [(a+2)/theta - (a+1)/theta] = (a+1)/theta - x/theta
        a, th = Fraction(1, 2), 2
        c = mb_P_coeffs(1, a, th).coefficients
        assert c == ((a + 1) / th, Fraction(-1, th))
        assert mb_P(1, 0.5, 2, 3.0) == pytest.approx(0.75 - 1.5, rel=1e-15)

    def test_p_degree_and_ground(self):
        assert mb_P_coeffs(0, 0.5, 2).coefficients == (1,)
        assert mb_P_coeffs(5, 0.5, 3).degree == 5

    @pytest.mark.parametrize("k,alpha,theta,tol", [(0, 0.5, 2, 0.0), (2, 1, 2, 1e-10), (4, 0.5, 3, 1e-9),
                                                   (7, Fraction(1, 3), 4, 0.0), (15, 2, 4, 0.0)])
    def test_hamiltonian_exact(self, k, alpha, theta, tol):
        assert hamiltonian_residual_mb(k, alpha, theta) <= tol

    def test_operator_eigenvalue_is_theta_k(self):
        p = mb_P_coeffs(3, Fraction(1, 2), 2).coefficients
        hp = mb_operator(p, Fraction(1, 2), 2)
        assert [v for v in hp[len(p):] if v != 0] == []
        assert hp[:len(p)] == [6 * v for v in p]

    def test_printed_form_undefined_at_zero(self):
        with pytest.raises(DomainError):
            mb_P_coeffs(0, 0.5, 2, "printed")

    def test_printed_form_not_biorthogonal(self):
        spec = MuttalibBorodinEnsemble(4, 0.5, 2)
        x, w = half_line_rule(2.0, math.sqrt(200.0), order=40, panels=8)
        q = np.stack([mb_Q(k, 0.5, 2, x) for k in range(1, 4)])
        p = np.stack([mb_P(k, 0.5, 2, x, form="printed") for k in range(1, 4)])
        gram = (q * w) @ p.T
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) > 1e-2
        assert np.max(np.abs(biorthogonality_gram(spec) - np.eye(4))) <= 1e-10


class TestBiorthogonality:
    @pytest.mark.parametrize("spec", [
        WishartEnsemble(WishartParams(6, 9)),
        ProductEnsemble(6, (1, 3)),
        MuttalibBorodinEnsemble(6, 0.5, 2),
        MuttalibBorodinEnsemble(6, 0.0, 3),
    ], ids=["wishart", "product", "mb-theta2", "mb-theta3"])
    def test_gram_is_identity(self, spec):
        assert np.max(np.abs(biorthogonality_gram(spec) - np.eye(6))) <= 1e-6

    @pytest.mark.parametrize("spec", [ProductEnsemble(8, (1, 3)), ProductEnsemble(5, (0, 2, 1)), MuttalibBorodinEnsemble(8, 0.5, 2)])
    def test_normalization_is_one(self, spec):
        assert np.allclose(normalization(spec), 1.0, atol=1e-12)

    def test_product_gram_quadrature_matches_mpmath(self):
        with mp.workdps(20):
            ref = mp.quad(lambda t: mp.meijerg([[-2], []], [[3, 1], [0]], t) * mp.meijerg([[], [3]], [[0], [-3, -1]], t), [0, 1, 10, 100, 400, 1000])
        assert float(ref) == pytest.approx(1.0, abs=1e-10)


class TestKernels:
    def test_single_term(self):
        spec = ProductEnsemble(1, (1, 3))
        assert product_kernel(spec, 1.3, 0.4) == pytest.approx(product_Q(0, (1, 3), 1.3) * product_P(0, (1, 3), 0.4), rel=1e-14)
        mb = MuttalibBorodinEnsemble(1, 0.5, 2)
        assert mb_kernel(mb, 1.3, 0.4) == pytest.approx(mb_Q(0, 0.5, 2, 1.3) * mb_P(0, 0.5, 2, 0.4), rel=1e-14)

    @pytest.mark.parametrize("spec", [ProductEnsemble(5, (1, 3)), MuttalibBorodinEnsemble(5, 0.5, 2)], ids=["product", "mb"])
    def test_projection_and_trace(self, spec):
        from rmtkernels.finite import _default_rule

        err, trace = projection_error(spec, _default_rule(spec))
        assert err <= 1e-5
        assert trace == pytest.approx(5.0, abs=1e-5)

    def test_single_factor_matches_wishart_up_to_gauge(self):
        p = WishartParams(4, 6)
        a, b = np.array([0.5, 1.3, 3.0]), np.array([2.0, 0.7, 4.4])
        prod = ProductEnsemble(4, (2,))
        mb = MuttalibBorodinEnsemble(4, 2.0, 1)
        ref = wishart_kernel(p, a, b) ** 2
        for spec in (prod, mb):
            assert np.allclose(kernel(spec, a, b) * kernel(spec, b, a), ref, rtol=1e-12, atol=1e-15)
            assert np.allclose(kernel(spec, a, a), wishart_kernel(p, a, a), rtol=1e-12)
        assert not np.allclose(kernel(prod, a, b), wishart_kernel(p, a, b), rtol=1e-3)

    @pytest.mark.parametrize("gamma", [0.5, -0.3, 1.7])
    def test_gauge_covariance(self, gamma):
        spec = MuttalibBorodinEnsemble(4, 0.5, 2)
        x, w = half_line_rule(2.0, math.sqrt(200.0), order=40, panels=8)
        a, b = 0.8, 2.6
        gauged = kernel(spec, a, b) * (a / b) ** gamma
        gauged_t = kernel(spec, b, a) * (b / a) ** gamma
        assert gauged * gauged_t == pytest.approx(kernel(spec, a, b) * kernel(spec, b, a), rel=1e-10)
        diag = kernel(spec, x, x) * (x / np.where(x > 0, x, 1.0)) ** gamma
        assert np.sum(w * diag) == pytest.approx(np.sum(w * kernel(spec, x, x)), rel=1e-10)

    def test_dispatch_rejects_unknown(self):
        with pytest.raises(TypeError):
            kernel(object(), 1.0, 1.0)
