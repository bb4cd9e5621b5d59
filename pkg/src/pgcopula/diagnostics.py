"""Chain summaries, convergence diagnostics, model scores, and grids.

Intervals are equal-tailed with linear-interpolation quantiles.  The
effective sample size and the Geweke score share one spectral estimate:
the autocorrelation sequence truncated by the initial-positive-sequence
rule on sums of adjacent pairs.  Model comparison uses the log
pseudo-marginal likelihood built from per-observation conditional
predictive ordinates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from pgcopula.copula import (
    CopulaFamily,
    log_density_from_scores,
    t_log_density_from_scores,
)
from pgcopula.errors import DomainError, NumericalError
from pgcopula.joint_model import clamp_probabilities, joint_log_pdf
from pgcopula.numerics import std_normal_quantile, student_t_quantile
from pgcopula.projected_gamma import HALF_PI, pg_cdf, pg_log_pdf

__all__ = [
    "PredictiveGrid",
    "credible_interval",
    "effective_sample_size",
    "geweke_z",
    "lpml",
    "predictive_grid",
    "summarize_chain",
]

_MIN_DIAGNOSTIC_DRAWS = 50


def credible_interval(draws, gamma=0.95):
    """Equal-tailed credible interval from posterior draws.

    Parameters
    ----------
    draws : array_like
        At least two scalar draws.
    gamma : float
        Coverage level strictly inside (0, 1).

    Returns
    -------
    tuple of float
        (lower, upper) linear-interpolation quantiles at levels
        (1 - gamma)/2 and (1 + gamma)/2.  A constant chain warns and
        returns a degenerate interval.
    """
    x = np.asarray(draws, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise DomainError("credible_interval needs a 1-d array of at least two draws")
    if not np.all(np.isfinite(x)):
        raise DomainError("credible_interval requires finite draws")
    if not (isinstance(gamma, (int, float)) and 0.0 < gamma < 1.0):
        raise DomainError(f"gamma must lie strictly in (0, 1), got {gamma!r}")
    if np.all(x == x[0]):
        warnings.warn("credible interval of a constant chain is degenerate")
        return float(x[0]), float(x[0])
    lo, hi = np.quantile(x, [0.5 * (1.0 - gamma), 0.5 * (1.0 + gamma)])
    return float(lo), float(hi)


def _autocorrelation(x):
    """Autocorrelation sequence via FFT, lags 0 .. n-1."""
    n = x.size
    centered = x - np.mean(x)
    size = 1
    while size < 2 * n:
        size *= 2
    spectrum = np.fft.rfft(centered, size)
    acov = np.fft.irfft(spectrum * np.conjugate(spectrum), size)[:n].real / n
    return acov / acov[0]


def _integrated_autocorr_time(x):
    """Integrated autocorrelation time with initial-positive truncation.

    Sums of adjacent autocorrelation pairs are accumulated while they
    stay positive, which is consistent for reversible chains.
    """
    rho = _autocorrelation(x)
    n = x.size
    total = 0.0
    for k in range(n // 2):
        pair = rho[2 * k] + (rho[2 * k + 1] if 2 * k + 1 < n else 0.0)
        if pair <= 0.0:
            break
        total += pair
    return max(2.0 * total - 1.0, 1e-12)


def _check_diagnostic_input(draws, name):
    x = np.asarray(draws, dtype=np.float64)
    if x.ndim != 1:
        raise DomainError(f"{name} needs a 1-d array of draws")
    if x.size < _MIN_DIAGNOSTIC_DRAWS:
        raise DomainError(
            f"{name} needs at least {_MIN_DIAGNOSTIC_DRAWS} draws, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} requires finite draws")
    if np.var(x) == 0.0:
        raise DomainError(f"{name} is undefined for a constant chain")
    return x


def effective_sample_size(draws):
    """Effective sample size n / tau of a scalar chain.

    tau is the integrated autocorrelation time; independent draws give
    an estimate close to n.
    """
    x = _check_diagnostic_input(draws, "effective_sample_size")
    return float(x.size / _integrated_autocorr_time(x))


def geweke_z(draws):
    """Geweke convergence score comparing early and late chain segments.

    The mean of the first 10 percent is compared with the mean of the
    last 50 percent, standardized by spectral variance estimates of the
    two segments; stationary chains give roughly standard normal values.
    """
    x = _check_diagnostic_input(draws, "geweke_z")
    n = x.size
    head = x[:max(2, int(0.1 * n))]
    tail = x[n - n // 2:]
    parts = []
    for seg in (head, tail):
        var = float(np.var(seg))
        if var == 0.0:
            raise DomainError("geweke_z is undefined for a constant segment")
        parts.append(var * _integrated_autocorr_time(seg) / seg.size)
    return float((np.mean(head) - np.mean(tail)) / math.sqrt(parts[0] + parts[1]))


def summarize_chain(chain, gamma=0.95):
    """Per-parameter summary of a chain.

    Returns a dict mapping each canonical parameter name to mean, sd,
    interval bounds, effective sample size and Geweke score.  The two
    diagnostics are None when undefined (constant or too-short chain).
    """
    out = {}
    for name in chain.parameter_names:
        x = chain.parameter_draws(name)
        lo, hi = credible_interval(x, gamma)
        entry = {
            "mean": float(np.mean(x)),
            "sd": float(np.std(x, ddof=1)) if x.size > 1 else 0.0,
            "lower": lo,
            "upper": hi,
        }
        try:
            entry["ess"] = effective_sample_size(x)
        except DomainError:
            entry["ess"] = None
        try:
            entry["geweke_z"] = geweke_z(x)
        except DomainError:
            entry["geweke_z"] = None
        out[name] = entry
    return out


def lpml(data, chain):
    """Log pseudo-marginal likelihood of a dataset under a chain.

    Each observation contributes the log of the harmonic mean of its
    likelihood across draws (the conditional predictive ordinate); the
    result is invariant to draw order and to duplicating all draws.
    """
    if data.dimension != chain.dimension:
        raise DomainError(
            f"dataset dimension {data.dimension} does not match chain "
            f"dimension {chain.dimension}")
    n = data.n_obs
    m_draws = len(chain)
    neg = np.empty((m_draws, n))
    for k, draw in enumerate(chain.draws):
        rows = joint_log_pdf(data.angles, draw)
        if not np.all(np.isfinite(rows)):
            bad = int(np.flatnonzero(~np.isfinite(rows))[0])
            raise NumericalError(
                f"log likelihood of observation {bad} is not finite under "
                f"draw {k}")
        neg[k] = -rows
    peak = neg.max(axis=0)
    lse = peak + np.log(np.sum(np.exp(neg - peak), axis=0))
    cpo = math.log(m_draws) - lse
    if not np.all(np.isfinite(cpo)):
        bad = int(np.flatnonzero(~np.isfinite(cpo))[0])
        raise NumericalError(f"conditional predictive ordinate of observation "
                             f"{bad} is not finite")
    return float(np.sum(cpo))


@dataclass(frozen=True)
class PredictiveGrid:
    """Posterior predictive density on a square interior lattice."""

    theta_a: np.ndarray
    theta_b: np.ndarray
    density: np.ndarray
    axes: tuple

    def rows(self):
        """Yield (theta_a, theta_b, density) in row-major order."""
        for i, ta in enumerate(self.theta_a):
            for j, tb in enumerate(self.theta_b):
                yield float(ta), float(tb), float(self.density[i, j])


def predictive_grid(chain, axes=(0, 1), resolution=200):
    """Posterior mean predictive density of one coordinate pair.

    For every retained draw the bivariate sub-model of the chosen pair
    (its two marginals plus the 2x2 correlation block, sharing nu) is
    evaluated on an open lattice excluding the endpoints, and the
    densities are averaged across draws.

    Parameters
    ----------
    chain : Chain
    axes : tuple of int
        Two distinct 0-based coordinate indices.
    resolution : int
        Number of interior nodes per axis, at least 2.

    Returns
    -------
    PredictiveGrid
    """
    if not isinstance(resolution, (int, np.integer)) or resolution < 2:
        raise DomainError(f"resolution must be an integer >= 2, got {resolution!r}")
    a, b = axes
    m = chain.dimension
    if not (0 <= a < m and 0 <= b < m) or a == b:
        raise DomainError(f"axes must be two distinct indices below {m}, got {axes!r}")
    ts = np.linspace(0.0, HALF_PI, int(resolution) + 2)[1:-1]
    acc = np.zeros((ts.size, ts.size))
    student = chain.family is CopulaFamily.STUDENT_T
    for draw in chain.draws:
        sub = draw.copula.correlation.pair(a, b)
        logs = []
        scores = []
        for axis in (a, b):
            marginal = draw.marginals[axis]
            logs.append(pg_log_pdf(ts, marginal))
            u = clamp_probabilities(pg_cdf(ts, marginal))
            if student:
                scores.append(np.asarray(student_t_quantile(u, draw.copula.nu)))
            else:
                scores.append(np.asarray(std_normal_quantile(u)))
        grid_scores = np.column_stack([
            np.repeat(scores[0], ts.size),
            np.tile(scores[1], ts.size),
        ])
        if student:
            cop = t_log_density_from_scores(grid_scores, draw.copula.nu, sub.factor)
        else:
            cop = log_density_from_scores(grid_scores, sub.factor)
        total = (cop.reshape(ts.size, ts.size)
                 + logs[0][:, np.newaxis] + logs[1][np.newaxis, :])
        acc += np.exp(total)
    acc /= len(chain)
    return PredictiveGrid(theta_a=ts, theta_b=ts.copy(), density=acc,
                          axes=(int(a), int(b)))
