"""Joint model: projected-gamma marginals coupled by an elliptical copula.

The joint density at an angle vector is the copula density evaluated at
the componentwise marginal cdf values times the product of marginal
densities.  Cdf values are clamped a hair inside (0, 1) before any
quantile transform so that float rounding can never produce an infinite
normal or t score.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from pgcopula.copula import (
    CopulaFamily,
    CopulaParams,
    copula_sample,
    gaussian_copula_log_density,
    t_copula_log_density,
)
from pgcopula.errors import DomainError, ValidationError
from pgcopula.projected_gamma import (
    HALF_PI,
    MarginalParams,
    pg_cdf,
    pg_log_pdf,
    pg_quantile,
)

__all__ = [
    "CDF_CLAMP",
    "Dataset",
    "ModelParams",
    "clamp_probabilities",
    "joint_log_pdf",
    "log_likelihood",
    "simulate_dataset",
]

CDF_CLAMP = 1e-12

# quantiles of clamped cdf values can still round onto the arc boundary
_ANGLE_MARGIN = 1e-12

_log = logging.getLogger(__name__)


def clamp_probabilities(u):
    """Clamp probabilities into [CDF_CLAMP, 1 - CDF_CLAMP].

    Returns a clipped copy; clamping events are reported at debug level.
    """
    arr = np.asarray(u, dtype=np.float64)
    clipped = np.clip(arr, CDF_CLAMP, 1.0 - CDF_CLAMP)
    moved = int(np.sum(clipped != arr))
    if moved:
        _log.debug("clamped %d cdf values into the open unit interval", moved)
    return clipped


@dataclass(frozen=True)
class ModelParams:
    """Full joint parameter: one marginal per coordinate plus the copula."""

    marginals: tuple
    copula: CopulaParams

    def __post_init__(self):
        marginals = tuple(self.marginals)
        object.__setattr__(self, "marginals", marginals)
        if len(marginals) < 2:
            raise DomainError("joint model needs at least two coordinates")
        for w in marginals:
            if not isinstance(w, MarginalParams):
                raise DomainError(f"marginals must be MarginalParams, got {w!r}")
        if len(marginals) != self.copula.dimension:
            raise DomainError(
                f"{len(marginals)} marginals do not match copula dimension "
                f"{self.copula.dimension}")

    @property
    def dimension(self):
        return len(self.marginals)


class Dataset:
    """Validated n-by-m matrix of interior angles with optional labels."""

    def __init__(self, angles, labels=None):
        arr = np.array(angles, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"angles must be a 2-d array, got ndim {arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"angles must be non-empty, got shape {arr.shape}")
        interior = np.isfinite(arr) & (arr > 0.0) & (arr < HALF_PI)
        if not np.all(interior):
            bad = np.flatnonzero(~np.all(interior, axis=1))
            shown = ", ".join(str(i) for i in bad[:10])
            raise ValidationError(
                f"{bad.size} rows contain angles outside the open arc "
                f"(0, pi/2): row indices {shown}")
        if labels is not None:
            labels = tuple(str(c) for c in labels)
            if len(labels) != arr.shape[1]:
                raise ValidationError(
                    f"{len(labels)} labels for {arr.shape[1]} columns")
        arr.setflags(write=False)
        self._angles = arr
        self._labels = labels

    @property
    def angles(self):
        """Read-only (n, m) ndarray of angles."""
        return self._angles

    @property
    def n_obs(self):
        return self._angles.shape[0]

    @property
    def dimension(self):
        return self._angles.shape[1]

    @property
    def labels(self):
        """Column labels, or None when unnamed."""
        return self._labels

    def column(self, j):
        """Angles of coordinate j as a 1-d array."""
        return self._angles[:, j]

    def __repr__(self):
        return f"Dataset(n_obs={self.n_obs}, dimension={self.dimension})"


def joint_log_pdf(theta, params):
    """Joint log density at one angle vector or a batch of rows.

    Parameters
    ----------
    theta : array_like
        Shape (m,) or (n, m), all entries strictly inside (0, pi/2).
    params : ModelParams

    Returns
    -------
    float or ndarray
        Scalar for a single vector, length-n vector for a batch.
    """
    arr = np.asarray(theta, dtype=np.float64)
    vector = arr.ndim == 1
    if arr.ndim not in (1, 2) or arr.shape[-1] != params.dimension:
        raise DomainError(
            f"angle vectors of dimension {params.dimension} expected, "
            f"got shape {arr.shape}")
    rows = np.atleast_2d(arr)
    total = np.zeros(rows.shape[0])
    u = np.empty_like(rows)
    for j, marginal in enumerate(params.marginals):
        col = rows[:, j]
        total = total + pg_log_pdf(col, marginal)
        u[:, j] = pg_cdf(col, marginal)
    u = clamp_probabilities(u)
    cop = params.copula
    if cop.family is CopulaFamily.STUDENT_T:
        total = total + t_copula_log_density(u, cop.nu, cop.correlation)
    else:
        total = total + gaussian_copula_log_density(u, cop.correlation)
    return float(total[0]) if vector else total


def simulate_dataset(params, n, rng):
    """Simulate a dataset by pushing copula draws through the quantiles.

    Parameters
    ----------
    params : ModelParams
    n : int
        Number of rows, at least 1.
    rng : numpy.random.Generator

    Returns
    -------
    Dataset
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    u = copula_sample(params.copula, rng, size=int(n))
    u = clamp_probabilities(u)
    theta = np.empty_like(u)
    for j, marginal in enumerate(params.marginals):
        theta[:, j] = pg_quantile(u[:, j], marginal)
    theta = np.clip(theta, _ANGLE_MARGIN, HALF_PI - _ANGLE_MARGIN)
    return Dataset(theta)


def log_likelihood(data, params):
    """Total log likelihood of a dataset, summed in fixed row order."""
    if data.dimension != params.dimension:
        raise DomainError(
            f"dataset dimension {data.dimension} does not match model "
            f"dimension {params.dimension}")
    return float(np.sum(joint_log_pdf(data.angles, params)))
