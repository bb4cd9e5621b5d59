"""Checks of the special-function kernel against scipy and closed forms.

scipy is used here as an independent oracle only; the library itself
computes everything from stdlib primitives.
"""

import math

import numpy as np
import pytest
import scipy.special as sp
import scipy.stats as st

from pgcopula.errors import DomainError, NotPositiveDefiniteError
from pgcopula.numerics import (
    cholesky,
    log_beta,
    log_gamma,
    mvn_log_pdf,
    mvt_log_pdf,
    reg_inc_beta,
    reg_inc_beta_inv,
    std_normal_cdf,
    std_normal_quantile,
    student_t_cdf,
    student_t_quantile,
)


class TestLogGamma:
    def test_half_integer_and_factorial_values(self):
        # Gamma(1/2) = sqrt(pi), Gamma(5) = 24
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-15)
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), abs=1e-14)

    def test_matches_scipy_on_grid(self):
        # scalar contract: parameters are scalars throughout the library
        for x in np.geomspace(1e-3, 500.0, 60):
            assert log_gamma(x) == pytest.approx(sp.gammaln(x), rel=1e-13)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            log_gamma(0.0)
        with pytest.raises(DomainError):
            log_gamma(-1.5)


class TestLogBeta:
    def test_matches_scipy(self):
        pairs = [(0.3, 0.5), (1.0, 2.0), (2.0, 3.0), (7.5, 0.9), (40.0, 11.0)]
        for a, b in pairs:
            assert log_beta(a, b) == pytest.approx(sp.betaln(a, b), rel=1e-13)

    def test_beta_2_3(self):
        # B(2,3) = 1/12
        assert log_beta(2.0, 3.0) == pytest.approx(-math.log(12.0), abs=1e-14)


class TestRegIncBeta:
    def test_polynomial_case(self):
        # I_x(2,3) = 6x^2 - 8x^3 + 3x^4 gives 0.26171875 at x = 1/4
        assert reg_inc_beta(0.25, 2.0, 3.0) == pytest.approx(0.26171875, abs=1e-14)

    def test_endpoints_exact(self):
        assert reg_inc_beta(0.0, 2.0, 3.0) == 0.0
        assert reg_inc_beta(1.0, 2.0, 3.0) == 1.0

    def test_reflection_symmetry(self):
        x = np.linspace(0.05, 0.95, 19)
        total = reg_inc_beta(x, 1.7, 4.2) + reg_inc_beta(1.0 - x, 4.2, 1.7)
        np.testing.assert_allclose(total, 1.0, atol=1e-14)

    def test_matches_scipy_on_grid(self):
        x = np.linspace(0.01, 0.99, 25)
        for a in [0.3, 0.5, 1.0, 2.5, 7.0, 25.0]:
            for b in [0.4, 1.0, 3.0, 12.0]:
                np.testing.assert_allclose(
                    reg_inc_beta(x, a, b), sp.betainc(a, b, x), atol=1e-12,
                    err_msg=f"a={a} b={b}")

    def test_monotone_in_x(self):
        x = np.linspace(0.0, 1.0, 200)
        vals = reg_inc_beta(x, 0.6, 3.1)
        assert np.all(np.diff(vals) >= 0.0)

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            reg_inc_beta(-0.1, 2.0, 3.0)
        with pytest.raises(DomainError):
            reg_inc_beta(0.5, 0.0, 1.0)


class TestRegIncBetaInv:
    def test_matches_scipy_on_grid(self):
        p = np.linspace(1e-6, 1.0 - 1e-6, 41)
        for a in [0.4, 1.0, 2.5, 8.0, 30.0]:
            for b in [0.5, 1.5, 4.0, 20.0]:
                np.testing.assert_allclose(
                    reg_inc_beta_inv(p, a, b), sp.betaincinv(a, b, p),
                    atol=1e-10, err_msg=f"a={a} b={b}")

    def test_roundtrip(self):
        # the 2e-11 bound is set by float spacing near x = 1 for the
        # arcsine case, where one ulp of x moves p by about 1e-11; the
        # scipy inverse shows the identical error at the same point
        p = np.linspace(1e-6, 1.0 - 1e-6, 101)
        for a, b in [(0.5, 0.5), (2.0, 3.0), (0.25, 6.0), (15.0, 1.5)]:
            x = reg_inc_beta_inv(p, a, b)
            back = reg_inc_beta(x, a, b)
            assert np.max(np.abs(back - p)) < 2e-11, f"a={a} b={b}"

    def test_deep_left_tail_matches_scipy(self):
        # the left tail keeps full float resolution arbitrarily deep
        # (unlike the right tail, which saturates one ulp below 1)
        p = np.array([1e-10, 1e-8])
        for a, b in [(0.5, 0.5), (2.0, 3.0)]:
            ours = reg_inc_beta_inv(p, a, b)
            ref = sp.betaincinv(a, b, p)
            np.testing.assert_allclose(ours, ref, rtol=1e-8,
                                       err_msg=f"a={a} b={b}")

    def test_endpoints_exact(self):
        assert reg_inc_beta_inv(0.0, 2.0, 3.0) == 0.0
        assert reg_inc_beta_inv(1.0, 2.0, 3.0) == 1.0

    def test_preserves_2d_shape(self):
        p = np.full((3, 4), 0.3)
        out = reg_inc_beta_inv(p, 2.0, 3.0)
        assert out.shape == (3, 4)
        assert np.all(out == out.flat[0])

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            reg_inc_beta_inv(1.5, 2.0, 3.0)
        with pytest.raises(DomainError):
            reg_inc_beta_inv(np.nan, 2.0, 3.0)


class TestStdNormal:
    def test_cdf_center_exact(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_cdf_975_quantile_point(self):
        assert std_normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-15)

    def test_cdf_symmetry(self):
        z = np.linspace(-6.0, 6.0, 121)
        np.testing.assert_allclose(std_normal_cdf(z) + std_normal_cdf(-z), 1.0,
                                   atol=1e-15)

    def test_cdf_matches_scipy(self):
        z = np.linspace(-8.0, 8.0, 321)
        np.testing.assert_allclose(std_normal_cdf(z), st.norm.cdf(z), rtol=1e-13)

    def test_quantile_center_exact(self):
        assert std_normal_quantile(0.5) == 0.0

    def test_quantile_975(self):
        assert std_normal_quantile(0.975) == pytest.approx(1.959963984540054,
                                                           abs=1e-12)

    def test_quantile_matches_scipy(self):
        p = np.concatenate([
            np.geomspace(1e-290, 0.4, 80),
            np.linspace(0.4, 0.6, 21),
            1.0 - np.geomspace(1e-15, 0.4, 60),
        ])
        np.testing.assert_allclose(std_normal_quantile(p), sp.ndtri(p),
                                   rtol=1e-12, atol=1e-14)

    def test_quantile_beyond_refinement_range(self):
        # past |z| ~ 37 the density underflows and refinement stops, so
        # the rational approximation alone carries the value
        assert std_normal_quantile(1e-300) == pytest.approx(sp.ndtri(1e-300),
                                                            rel=1e-8)

    def test_roundtrip(self):
        # past |x| ~ 5.5 the cdf loses the information needed to come
        # back at this tolerance, so stay inside that range
        x = np.linspace(-5.5, 5.5, 111)
        np.testing.assert_allclose(std_normal_quantile(std_normal_cdf(x)), x,
                                   atol=1e-8)

    def test_quantile_rejects_boundary(self):
        for p in [0.0, 1.0, -0.2, np.nan]:
            with pytest.raises(DomainError):
                std_normal_quantile(p)


class TestStudentT:
    def test_cauchy_cdf(self):
        # nu = 1 is Cauchy: F(1) = 3/4
        assert student_t_cdf(1.0, 1.0) == pytest.approx(0.75, abs=1e-14)

    def test_two_dof_closed_form(self):
        # F(x; 2) = 1/2 + x / (2 sqrt(2 + x^2))
        x = np.array([-3.0, -1.0, 0.0, 1.0, 2.5])
        expected = 0.5 + x / (2.0 * np.sqrt(2.0 + x * x))
        np.testing.assert_allclose(student_t_cdf(x, 2.0), expected, atol=1e-14)

    def test_cdf_matches_scipy(self):
        x = np.linspace(-12.0, 12.0, 97)
        for nu in [0.5, 1.0, 2.5, 3.0, 7.5, 30.0]:
            np.testing.assert_allclose(student_t_cdf(x, nu), st.t.cdf(x, nu),
                                       atol=1e-13, err_msg=f"nu={nu}")

    def test_cauchy_quantile(self):
        assert student_t_quantile(0.75, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_quantile_matches_scipy(self):
        p = np.linspace(1e-5, 1.0 - 1e-5, 81)
        for nu in [0.5, 2.5, 3.0, 7.5, 30.0]:
            ours = student_t_quantile(p, nu)
            ref = st.t.ppf(p, nu)
            np.testing.assert_allclose(ours, ref, rtol=1e-9, atol=1e-10,
                                       err_msg=f"nu={nu}")

    def test_roundtrip(self):
        # range chosen per nu so the upper-tail cdf stays below 1 by
        # more than an ulp; lighter tails reach 1.0 sooner
        spans = {2.5: 20.0, 3.0: 20.0, 7.5: 12.0, 30.0: 8.0}
        for nu, span in spans.items():
            x = np.linspace(-span, span, 81)
            back = student_t_quantile(student_t_cdf(x, nu), nu)
            np.testing.assert_allclose(back, x, atol=1e-8, rtol=1e-8,
                                       err_msg=f"nu={nu}")

    def test_quantile_preserves_shape(self):
        p = np.full((2, 5), 0.25)
        assert student_t_quantile(p, 4.0).shape == (2, 5)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            student_t_cdf(0.5, 0.0)
        with pytest.raises(DomainError):
            student_t_quantile(0.0, 3.0)


class TestCholesky:
    def test_factor_roundtrip(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(5, 5))
        mat = a @ a.T + 5.0 * np.eye(5)
        factor = cholesky(mat)
        lower = factor.entries
        np.testing.assert_allclose(lower @ lower.T, mat, rtol=1e-12)

    def test_log_det(self):
        mat = np.array([[2.0, 0.5], [0.5, 1.5]])
        factor = cholesky(mat)
        assert factor.log_det == pytest.approx(math.log(np.linalg.det(mat)),
                                               abs=1e-13)

    def test_rejects_asymmetric(self):
        with pytest.raises(DomainError):
            cholesky(np.array([[1.0, 0.3], [0.2, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestMultivariateDensities:
    def setup_method(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(4, 4))
        self.cov = a @ a.T + 4.0 * np.eye(4)
        self.factor = cholesky(self.cov)
        self.points = rng.normal(size=(6, 4))

    def test_mvn_matches_scipy(self):
        ref = st.multivariate_normal(mean=np.zeros(4), cov=self.cov)
        np.testing.assert_allclose(mvn_log_pdf(self.points, self.factor),
                                   ref.logpdf(self.points), rtol=1e-12)

    def test_mvn_single_point(self):
        ref = st.multivariate_normal(mean=np.zeros(4), cov=self.cov)
        one = self.points[0]
        assert mvn_log_pdf(one, self.factor) == pytest.approx(ref.logpdf(one),
                                                              rel=1e-12)

    def test_mvt_matches_scipy(self):
        for nu in [2.5, 4.0, 17.0]:
            ref = st.multivariate_t(loc=np.zeros(4), shape=self.cov, df=nu)
            np.testing.assert_allclose(
                mvt_log_pdf(self.points, nu, self.factor),
                ref.logpdf(self.points), rtol=1e-12, err_msg=f"nu={nu}")

    def test_mvt_approaches_mvn_for_large_nu(self):
        gap = np.abs(mvt_log_pdf(self.points, 1e7, self.factor)
                     - mvn_log_pdf(self.points, self.factor))
        assert np.max(gap) < 1e-4
