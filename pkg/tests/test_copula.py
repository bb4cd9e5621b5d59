"""Copula density and sampler checks against scipy compositions.

The score-space compositions here rebuild each copula density from
scipy's quantile and multivariate density routines, which exercises a
fully independent code path.
"""

import math

import numpy as np
import pytest
import scipy.stats as st
from numpy.polynomial.legendre import leggauss

from pgcopula import (
    CopulaFamily,
    CopulaParams,
    CorrelationMatrix,
    copula_sample,
    gaussian_copula_log_density,
    t_copula_log_density,
)
from pgcopula.errors import DomainError, NotPositiveDefiniteError


def copula_mass(log_density_fn, order=160, span=8.0):
    """Integrate a copula density over the unit square.

    Substituting u = Phi(s) moves the corner singularities out to the
    tails of a gaussian weight, where fixed-order quadrature converges;
    span 8 is the widest the substitution survives in double precision.
    """
    nodes, weights = leggauss(order)
    s = span * nodes
    w = span * weights
    u = st.norm.cdf(s)
    phi = st.norm.pdf(s)
    grid_a, grid_b = np.meshgrid(u, u, indexing="ij")
    pts = np.column_stack([grid_a.ravel(), grid_b.ravel()])
    dens = np.exp(log_density_fn(pts)).reshape(order, order)
    return float(np.sum(dens * np.outer(w * phi, w * phi)))


class TestCorrelationMatrix:
    def test_round_trips_upper_entries(self):
        r = CorrelationMatrix.from_upper(3, [0.3, -0.2, 0.5])
        np.testing.assert_array_equal(r.upper_entries, [0.3, -0.2, 0.5])
        np.testing.assert_array_equal(r.matrix, r.matrix.T)

    def test_identity(self):
        r = CorrelationMatrix.identity(4)
        np.testing.assert_array_equal(r.matrix, np.eye(4))

    def test_pair_submatrix(self):
        r = CorrelationMatrix.from_upper(3, [0.3, -0.2, 0.5])
        sub = r.pair(0, 2)
        np.testing.assert_array_equal(sub.matrix,
                                      [[1.0, -0.2], [-0.2, 1.0]])

    def test_rejects_bad_diagonal(self):
        with pytest.raises(DomainError):
            CorrelationMatrix(np.array([[2.0, 0.0], [0.0, 1.0]]))

    def test_rejects_entries_at_one(self):
        with pytest.raises(DomainError):
            CorrelationMatrix.from_upper(2, [1.0])

    def test_rejects_indefinite(self):
        # pairwise valid entries that are jointly impossible
        with pytest.raises(NotPositiveDefiniteError):
            CorrelationMatrix.from_upper(3, [0.9, 0.9, -0.9])

    def test_matrix_is_read_only(self):
        r = CorrelationMatrix.identity(2)
        with pytest.raises(ValueError):
            r.matrix[0, 1] = 0.5


class TestCopulaParams:
    def test_gaussian_forbids_nu(self):
        with pytest.raises(DomainError):
            CopulaParams(family=CopulaFamily.GAUSSIAN,
                         correlation=CorrelationMatrix.identity(2), nu=4.0)

    def test_t_requires_nu_above_two(self):
        with pytest.raises(DomainError):
            CopulaParams(family=CopulaFamily.STUDENT_T,
                         correlation=CorrelationMatrix.identity(2), nu=2.0)

    def test_family_coerced_from_string(self):
        p = CopulaParams(family="gaussian",
                         correlation=CorrelationMatrix.identity(2))
        assert p.family is CopulaFamily.GAUSSIAN


class TestGaussianDensity:
    def test_identity_is_exactly_zero(self):
        # the density is written as a cancelled difference, so the
        # independence case is exact and == is the right assertion
        rng = np.random.default_rng(5)
        u = rng.uniform(0.01, 0.99, size=(50, 3))
        vals = gaussian_copula_log_density(u, CorrelationMatrix.identity(3))
        assert np.all(vals == 0.0)

    def test_center_value(self):
        # at u = (1/2, 1/2) the scores vanish and only the log
        # determinant survives: -log(1 - rho^2) / 2
        r = CorrelationMatrix.from_upper(2, [0.7])
        val = gaussian_copula_log_density(np.array([0.5, 0.5]), r)
        assert val == pytest.approx(-0.5 * math.log(0.51), abs=1e-15)

    def test_matches_scipy_composition(self):
        rng = np.random.default_rng(17)
        r = CorrelationMatrix.from_upper(3, [0.4, -0.3, 0.2])
        u = rng.uniform(0.001, 0.999, size=(40, 3))
        z = st.norm.ppf(u)
        ref = (st.multivariate_normal(cov=r.matrix).logpdf(z)
               - st.norm.logpdf(z).sum(axis=1))
        ours = gaussian_copula_log_density(u, r)
        np.testing.assert_allclose(ours, ref, atol=1e-9)

    def test_integrates_to_one(self):
        r = CorrelationMatrix.from_upper(2, [0.5])
        mass = copula_mass(lambda p: gaussian_copula_log_density(p, r))
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_finite_near_corners(self):
        eps = 1e-10
        r = CorrelationMatrix.from_upper(2, [0.6])
        pts = np.array([[eps, eps], [eps, 1 - eps], [1 - eps, 0.5]])
        assert np.all(np.isfinite(gaussian_copula_log_density(pts, r)))

    def test_rejects_boundary(self):
        r = CorrelationMatrix.identity(2)
        with pytest.raises(DomainError):
            gaussian_copula_log_density(np.array([0.0, 0.5]), r)
        with pytest.raises(DomainError):
            gaussian_copula_log_density(np.array([0.5, 1.0]), r)


class TestStudentTDensity:
    def test_center_identity_value(self):
        # at (1/2, 1/2) with nu = 3 the ratio collapses to
        # Gamma(5/2) Gamma(3/2)^2 / ... = 3 pi / 8
        val = t_copula_log_density(np.array([0.5, 0.5]), 3.0,
                                   CorrelationMatrix.identity(2))
        assert val == pytest.approx(math.log(3.0 * math.pi / 8.0), abs=1e-6)

    def test_not_flat_at_identity(self):
        # unlike the gaussian case, independence correlation does not
        # make the t copula uniform
        vals = t_copula_log_density(np.array([[0.5, 0.5], [0.9, 0.9]]), 4.0,
                                    CorrelationMatrix.identity(2))
        assert vals[0] != 0.0
        assert vals[1] != vals[0]

    def test_matches_scipy_composition(self):
        rng = np.random.default_rng(23)
        r = CorrelationMatrix.from_upper(3, [0.4, -0.3, 0.2])
        nu = 4.5
        u = rng.uniform(0.001, 0.999, size=(40, 3))
        z = st.t.ppf(u, nu)
        ref = (st.multivariate_t(shape=r.matrix, df=nu).logpdf(z)
               - st.t.logpdf(z, nu).sum(axis=1))
        ours = t_copula_log_density(u, nu, r)
        np.testing.assert_allclose(ours, ref, atol=1e-8)

    def test_integrates_to_one(self):
        r = CorrelationMatrix.from_upper(2, [0.5])
        mass = copula_mass(lambda p: t_copula_log_density(p, 3.0, r))
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_finite_near_corners(self):
        eps = 1e-10
        r = CorrelationMatrix.from_upper(2, [0.6])
        pts = np.array([[eps, eps], [eps, 1 - eps], [1 - eps, 0.5]])
        assert np.all(np.isfinite(t_copula_log_density(pts, 3.0, r)))

    def test_rejects_bad_nu(self):
        with pytest.raises(DomainError):
            t_copula_log_density(np.array([0.5, 0.5]), 2.0,
                                 CorrelationMatrix.identity(2))


class TestSampler:
    def gaussian_params(self, rho=0.6):
        return CopulaParams(family=CopulaFamily.GAUSSIAN,
                            correlation=CorrelationMatrix.from_upper(2, [rho]))

    def t_params(self, rho=0.6, nu=3.0):
        return CopulaParams(family=CopulaFamily.STUDENT_T,
                            correlation=CorrelationMatrix.from_upper(2, [rho]),
                            nu=nu)

    def test_shapes_and_range(self):
        rng = np.random.default_rng(2)
        u = copula_sample(self.gaussian_params(), rng, size=500)
        assert u.shape == (500, 2)
        assert np.all((u > 0.0) & (u < 1.0))
        one = copula_sample(self.t_params(), rng)
        assert one.shape == (2,)

    def test_deterministic_given_seed(self):
        for params in [self.gaussian_params(), self.t_params()]:
            a = copula_sample(params, np.random.default_rng(9), size=64)
            b = copula_sample(params, np.random.default_rng(9), size=64)
            np.testing.assert_array_equal(a, b)

    def test_uniform_marginals(self):
        for k, params in enumerate([self.gaussian_params(), self.t_params()]):
            u = copula_sample(params, np.random.default_rng(30 + k), size=5000)
            for j in range(2):
                p = st.kstest(u[:, j], "uniform").pvalue
                assert p > 0.01, (params.family, j, p)

    def test_recovers_correlation_sign_and_size(self):
        # score-scale correlation of gaussian draws estimates rho
        params = self.gaussian_params(rho=0.7)
        u = copula_sample(params, np.random.default_rng(44), size=8000)
        z = st.norm.ppf(u)
        r_hat = np.corrcoef(z.T)[0, 1]
        assert abs(r_hat - 0.7) < 0.03

    def test_t_draws_share_radial_shock(self):
        # a t copula has tail dependence, so extremes co-occur more
        # often than under the gaussian copula with the same rho
        n = 20000
        ut = copula_sample(self.t_params(rho=0.5, nu=3.0),
                           np.random.default_rng(8), size=n)
        ug = copula_sample(self.gaussian_params(rho=0.5),
                           np.random.default_rng(8), size=n)
        joint_t = np.mean((ut[:, 0] > 0.98) & (ut[:, 1] > 0.98))
        joint_g = np.mean((ug[:, 0] > 0.98) & (ug[:, 1] > 0.98))
        assert joint_t > joint_g
