"""Implicit Gaussian and Student-t copulas on the unit hypercube.

Both copula densities are the density of a correlated elliptical vector
divided by the product of its marginals, evaluated at componentwise
quantile-transformed points.  The Gaussian version is written as a
cancelled difference so that the identity matrix gives a log density of
exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import solve_triangular

from pgcopula.errors import DomainError
from pgcopula.numerics import (
    cholesky,
    mvt_log_pdf,
    std_normal_cdf,
    std_normal_quantile,
    student_t_cdf,
    student_t_quantile,
)

__all__ = [
    "CopulaFamily",
    "CopulaParams",
    "CorrelationMatrix",
    "copula_sample",
    "gaussian_copula_log_density",
    "t_copula_log_density",
]


class CopulaFamily(str, Enum):
    """Supported copula families."""

    GAUSSIAN = "gaussian"
    STUDENT_T = "student_t"


class CorrelationMatrix:
    """Validated correlation matrix with its cached Cholesky factor.

    Construction checks shape, symmetry, unit diagonal, off-diagonal
    range and positive definiteness; instances are immutable afterwards.
    """

    def __init__(self, matrix):
        a = np.array(matrix, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"correlation matrix must be square, got shape {a.shape}")
        if a.shape[0] < 2:
            raise DomainError("correlation matrix needs dimension at least 2")
        if not np.all(np.isfinite(a)):
            raise DomainError("correlation matrix must have finite entries")
        if not np.allclose(a, a.T, rtol=1e-10, atol=1e-12):
            raise DomainError("correlation matrix must be symmetric")
        if not np.allclose(np.diagonal(a), 1.0, rtol=0.0, atol=1e-12):
            raise DomainError("correlation matrix must have a unit diagonal")
        off = a[~np.eye(a.shape[0], dtype=bool)]
        if np.any(np.abs(off) >= 1.0):
            raise DomainError("correlations must lie strictly inside (-1, 1)")
        self._factor = cholesky(a)
        a.setflags(write=False)
        self._matrix = a

    @classmethod
    def identity(cls, dimension):
        """Identity correlation matrix of the given dimension."""
        return cls(np.eye(int(dimension)))

    @classmethod
    def from_upper(cls, dimension, values):
        """Build from the upper-triangle correlations in row-major order.

        ``values`` holds rho_rq for r < q ordered (1,2), (1,3), ..., (2,3), ...
        """
        m = int(dimension)
        vals = np.asarray(values, dtype=np.float64).ravel()
        expected = m * (m - 1) // 2
        if vals.size != expected:
            raise DomainError(
                f"dimension {m} needs {expected} correlations, got {vals.size}")
        a = np.eye(m)
        r, q = np.triu_indices(m, k=1)
        a[r, q] = vals
        a[q, r] = vals
        return cls(a)

    @property
    def matrix(self):
        """Read-only (m, m) ndarray."""
        return self._matrix

    @property
    def factor(self):
        """Lower-triangular Cholesky factor of the matrix."""
        return self._factor

    @property
    def dimension(self):
        return self._matrix.shape[0]

    @property
    def upper_entries(self):
        """Upper-triangle correlations in row-major order."""
        r, q = np.triu_indices(self.dimension, k=1)
        return self._matrix[r, q].copy()

    def pair(self, i, j):
        """2x2 correlation matrix of coordinates i and j."""
        if i == j:
            raise DomainError("pair requires two distinct coordinates")
        idx = np.asarray([i, j])
        return CorrelationMatrix(self._matrix[np.ix_(idx, idx)])

    def __repr__(self):
        return f"CorrelationMatrix({self._matrix.tolist()!r})"


@dataclass(frozen=True)
class CopulaParams:
    """Copula family, correlation matrix and (for t) degrees of freedom."""

    family: CopulaFamily
    correlation: CorrelationMatrix
    nu: float | None = None

    def __post_init__(self):
        family = CopulaFamily(self.family)
        object.__setattr__(self, "family", family)
        if family is CopulaFamily.STUDENT_T:
            if self.nu is None or not math.isfinite(self.nu) or self.nu <= 2.0:
                raise DomainError(
                    f"student_t copula requires finite nu > 2, got {self.nu!r}")
            object.__setattr__(self, "nu", float(self.nu))
        elif self.nu is not None:
            raise DomainError("gaussian copula takes no degrees of freedom")

    @property
    def dimension(self):
        return self.correlation.dimension


def _as_unit_hypercube(u, dimension):
    arr = np.asarray(u, dtype=np.float64)
    vector = arr.ndim == 1
    if arr.ndim not in (1, 2) or arr.shape[-1] != dimension:
        raise DomainError(
            f"points of dimension {dimension} expected, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("copula densities require u strictly inside (0, 1)")
    return arr, vector


def log_density_from_scores(z, factor):
    """Gaussian copula log density at already-transformed normal scores.

    Written as -(log det R + z^T R^{-1} z - z^T z) / 2 so the shared
    normalizing terms cancel symbolically and the identity matrix yields
    exactly zero for every input.
    """
    arr = np.asarray(z, dtype=np.float64)
    zt = arr.T
    w = solve_triangular(factor.entries, zt, lower=True, check_finite=False)
    diff = np.sum(w * w - zt * zt, axis=0)
    out = -0.5 * (factor.log_det + diff)
    return float(out) if arr.ndim == 1 else out


def _t_log_pdf_1d(x, nu):
    """Log density of the univariate Student t, elementwise."""
    const = (math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu)
             - 0.5 * math.log(nu * math.pi))
    return const - 0.5 * (nu + 1.0) * np.log1p(x * x / nu)


def t_log_density_from_scores(z, nu, factor):
    """Student-t copula log density at already-transformed t scores."""
    arr = np.asarray(z, dtype=np.float64)
    joint = mvt_log_pdf(arr, nu, factor)
    marg = np.sum(_t_log_pdf_1d(arr, nu), axis=-1)
    out = joint - marg
    return float(out) if arr.ndim == 1 else out


def gaussian_copula_log_density(u, correlation):
    """Log density of the Gaussian copula.

    Parameters
    ----------
    u : array_like
        Point of shape (m,) or batch of shape (n, m), entries strictly
        inside (0, 1).
    correlation : CorrelationMatrix

    Returns
    -------
    float or ndarray
        Identically 0 when the correlation is the identity.
    """
    arr, vector = _as_unit_hypercube(u, correlation.dimension)
    z = std_normal_quantile(arr)
    out = log_density_from_scores(z, correlation.factor)
    return float(out) if vector else out


def t_copula_log_density(u, nu, correlation):
    """Log density of the Student-t copula.

    Parameters
    ----------
    u : array_like
        Point of shape (m,) or batch of shape (n, m), entries strictly
        inside (0, 1).
    nu : float
        Degrees of freedom, must exceed 2.
    correlation : CorrelationMatrix

    Returns
    -------
    float or ndarray
        Nonzero in general even at the identity matrix because the
        radial mixing couples coordinates.
    """
    if not (isinstance(nu, (int, float)) and math.isfinite(nu) and nu > 2.0):
        raise DomainError(f"t copula requires finite nu > 2, got {nu!r}")
    arr, vector = _as_unit_hypercube(u, correlation.dimension)
    z = np.asarray(student_t_quantile(arr, nu))
    out = t_log_density_from_scores(z, float(nu), correlation.factor)
    return float(out) if vector else out


def copula_sample(params, rng, size=None):
    """Draw points on the unit hypercube from the copula.

    Correlated normal scores come from the Cholesky factor; the t family
    additionally divides by an independent chi-square radial factor.
    Componentwise distribution functions map the scores to (0, 1).

    Parameters
    ----------
    params : CopulaParams
    rng : numpy.random.Generator
    size : int, optional
        Number of points; omitted means one point of shape (m,).

    Returns
    -------
    ndarray
        Shape (m,) or (size, m).
    """
    if size is not None and (not isinstance(size, (int, np.integer)) or size < 1):
        raise DomainError(f"size must be a positive integer, got {size!r}")
    n = 1 if size is None else int(size)
    m = params.dimension
    eps = rng.standard_normal((n, m))
    z = eps @ params.correlation.factor.entries.T
    if params.family is CopulaFamily.STUDENT_T:
        w = rng.chisquare(params.nu, size=n)
        z = z * np.sqrt(params.nu / w)[:, np.newaxis]
        u = student_t_cdf(z, params.nu)
    else:
        u = std_normal_cdf(z)
    return u[0] if size is None else u
