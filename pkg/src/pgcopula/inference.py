"""Priors, conditional posterior targets, and the two-stage MCMC sampler.

Inference splits the posterior into two conditional targets.  Stage one
is the product of marginal projected-gamma likelihood columns times the
marginal priors; the copula factor is deliberately absent, which makes
the target separable across coordinates.  Stage two holds the marginal
parameters fixed at each retained stage-one draw and samples the copula
parameters from the copula density of the cdf-transformed data times the
copula prior.

Both stages use Metropolis random walks: stage one a per-coordinate
block walk on the log parameters, stage two componentwise walks on the
correlations and on log(nu - 2).  Step sizes adapt toward an acceptance
rate of 0.3 during burn-in (stage one) or warm-up (stage two) only and
are frozen afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pgcopula.copula import (
    CopulaFamily,
    CopulaParams,
    CorrelationMatrix,
    log_density_from_scores,
    t_log_density_from_scores,
)
from pgcopula.errors import DomainError, NotPositiveDefiniteError, NumericalError, ValidationError
from pgcopula.joint_model import Dataset, ModelParams, clamp_probabilities
from pgcopula.numerics import (
    cholesky,
    log_beta,
    mvt_log_pdf,
    std_normal_quantile,
    student_t_quantile,
)
from pgcopula.projected_gamma import MarginalParams, pg_cdf, pg_log_pdf

__all__ = [
    "ACCEPT_TARGET",
    "Chain",
    "GammaPrior",
    "McmcConfig",
    "PriorSpec",
    "log_prior_copula",
    "log_prior_marginals",
    "run_two_stage",
    "stage1_target",
    "stage2_target",
]

ACCEPT_TARGET = 0.3

# random-walk proposals this large mean the chain has left any sane region
_MAX_LOG_PARAM = 50.0
_STEP_FLOOR = 1e-4
_STEP_CEIL = 10.0


@dataclass(frozen=True)
class GammaPrior:
    """Gamma prior in the shape-rate parameterization (mean = shape/rate)."""

    shape: float = 1.0
    rate: float = 0.2

    def __post_init__(self):
        for name in ("shape", "rate"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"prior {name} must be finite and positive, got {v!r}")

    def log_pdf(self, x):
        """Log density at x > 0; nonpositive x is outside the support."""
        v = float(x)
        if not math.isfinite(v) or v <= 0.0:
            raise DomainError(f"gamma prior support is x > 0, got {x!r}")
        return (self.shape * math.log(self.rate) - math.lgamma(self.shape)
                + (self.shape - 1.0) * math.log(v) - self.rate * v)


def _one_or_per_coordinate(value, name):
    if isinstance(value, GammaPrior):
        return value
    priors = tuple(value)
    for p in priors:
        if not isinstance(p, GammaPrior):
            raise DomainError(f"{name} entries must be GammaPrior, got {p!r}")
    return priors


@dataclass(frozen=True)
class PriorSpec:
    """Priors for all model parameters.

    Each marginal slot takes a single GammaPrior shared by every
    coordinate or a per-coordinate tuple.  Correlations carry a flat
    Uniform(-1, 1) prior restricted to the positive-definite region, so
    they need no field; ``nu_minus_2`` is the gamma prior on nu - 2 used
    by the t family.
    """

    alpha1: object = field(default_factory=GammaPrior)
    alpha2: object = field(default_factory=GammaPrior)
    beta: object = field(default_factory=GammaPrior)
    nu_minus_2: GammaPrior = field(default_factory=GammaPrior)

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "beta"):
            object.__setattr__(self, name, _one_or_per_coordinate(getattr(self, name), name))
        if not isinstance(self.nu_minus_2, GammaPrior):
            raise DomainError("nu_minus_2 must be a GammaPrior")

    def marginal_priors(self, j, dimension):
        """The (alpha1, alpha2, beta) priors for coordinate j of m."""
        out = []
        for name in ("alpha1", "alpha2", "beta"):
            value = getattr(self, name)
            if isinstance(value, GammaPrior):
                out.append(value)
            else:
                if len(value) != dimension:
                    raise DomainError(
                        f"{name} has {len(value)} priors for dimension {dimension}")
                out.append(value[j])
        return tuple(out)


@dataclass(frozen=True)
class McmcConfig:
    """Schedule and tuning constants for the two-stage sampler.

    ``total`` iterations are run in stage one, the first ``burn_in`` are
    discarded, and every ``lag``-th of the rest is retained.  Stage two
    runs ``stage2_warmup`` adaptation sweeps once, then ``stage2_sweeps``
    frozen sweeps per retained draw.  Step sizes are initial values; the
    marginal step applies on the log-parameter scale and the nu step on
    log(nu - 2).
    """

    total: int = 120_000
    burn_in: int = 70_000
    lag: int = 50
    seed: int = 0
    step_marginal: float = 0.15
    step_rho: float = 0.10
    step_nu: float = 0.30
    adapt_window: int = 100
    stage2_sweeps: int = 3
    stage2_warmup: int = 200

    def __post_init__(self):
        if not isinstance(self.total, (int, np.integer)) or self.total < 1:
            raise ValidationError(f"total must be a positive integer, got {self.total!r}")
        if not isinstance(self.burn_in, (int, np.integer)) or self.burn_in < 0:
            raise ValidationError(f"burn_in must be a nonnegative integer, got {self.burn_in!r}")
        if self.burn_in >= self.total:
            raise ValidationError(
                f"burn_in {self.burn_in} must be smaller than total {self.total}")
        if not isinstance(self.lag, (int, np.integer)) or self.lag < 1:
            raise ValidationError(f"lag must be a positive integer, got {self.lag!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {self.seed!r}")
        for name in ("step_marginal", "step_rho", "step_nu"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be finite and positive, got {v!r}")
        for name in ("adapt_window", "stage2_sweeps"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        if not isinstance(self.stage2_warmup, (int, np.integer)) or self.stage2_warmup < 0:
            raise ValidationError(
                f"stage2_warmup must be a nonnegative integer, got {self.stage2_warmup!r}")
        if self.n_draws < 1:
            raise ValidationError(
                f"schedule retains no draws: total {self.total}, burn_in "
                f"{self.burn_in}, lag {self.lag}")

    @property
    def n_draws(self):
        """Number of retained draws, floor((total - burn_in) / lag)."""
        return (self.total - self.burn_in) // self.lag


@dataclass
class Chain:
    """Ordered posterior draws with the bookkeeping of the run.

    ``adaptation_events`` records every step-size change as a tuple
    (phase, index, block, new_step); phase is "stage1" (index is the
    iteration) or "stage2-warmup" (index is the warm-up sweep).
    ``stage`` is "combined" for chains produced by the sampler and
    "file" for chains reconstructed from disk, which carry no run
    bookkeeping.
    """

    draws: tuple
    family: CopulaFamily
    acceptance: dict
    config: McmcConfig | None = None
    stage: str = "combined"
    adaptation_events: tuple = ()

    def __post_init__(self):
        self.draws = tuple(self.draws)
        if not self.draws:
            raise ValidationError("a chain needs at least one draw")
        self.family = CopulaFamily(self.family)
        m = self.draws[0].dimension
        for d in self.draws:
            if not isinstance(d, ModelParams) or d.dimension != m:
                raise ValidationError("all draws must be ModelParams of one dimension")
            if d.copula.family is not self.family:
                raise ValidationError(
                    f"draw with family {d.copula.family.value} in a "
                    f"{self.family.value} chain")

    def __len__(self):
        return len(self.draws)

    @property
    def dimension(self):
        return self.draws[0].dimension

    @property
    def parameter_names(self):
        """Canonical scalar parameter order used everywhere files are written."""
        names = []
        for j in range(1, self.dimension + 1):
            names.extend([f"alpha_{j}_1", f"alpha_{j}_2", f"beta_{j}"])
        for r in range(1, self.dimension + 1):
            for q in range(r + 1, self.dimension + 1):
                names.append(f"rho_{r}_{q}")
        if self.family is CopulaFamily.STUDENT_T:
            names.append("nu")
        return names

    def parameter_draws(self, name):
        """All draws of one named scalar parameter as a 1-d array."""
        if name == "nu":
            if self.family is not CopulaFamily.STUDENT_T:
                raise DomainError("gaussian chains have no nu")
            return np.asarray([d.copula.nu for d in self.draws])
        parts = name.split("_")
        if parts[0] == "alpha" and len(parts) == 3:
            j, k = int(parts[1]) - 1, int(parts[2])
            if 0 <= j < self.dimension and k in (1, 2):
                attr = "alpha1" if k == 1 else "alpha2"
                return np.asarray([getattr(d.marginals[j], attr) for d in self.draws])
        if parts[0] == "beta" and len(parts) == 2:
            j = int(parts[1]) - 1
            if 0 <= j < self.dimension:
                return np.asarray([d.marginals[j].beta for d in self.draws])
        if parts[0] == "rho" and len(parts) == 3:
            r, q = int(parts[1]) - 1, int(parts[2]) - 1
            if 0 <= r < q < self.dimension:
                return np.asarray(
                    [d.copula.correlation.matrix[r, q] for d in self.draws])
        raise DomainError(f"unknown parameter name {name!r}")

    def to_matrix(self):
        """Draws as a (K, P) matrix in ``parameter_names`` column order."""
        return np.column_stack(
            [self.parameter_draws(n) for n in self.parameter_names])


def log_prior_marginals(omegas, prior):
    """Joint log prior of all marginal parameter triples."""
    omegas = tuple(omegas)
    total = 0.0
    for j, w in enumerate(omegas):
        pa1, pa2, pb = prior.marginal_priors(j, len(omegas))
        total += pa1.log_pdf(w.alpha1) + pa2.log_pdf(w.alpha2) + pb.log_pdf(w.beta)
    return total


def log_prior_copula(copula, prior):
    """Log prior of the copula parameters.

    Correlations carry Uniform(-1, 1) mass restricted to the
    positive-definite region, a constant log(1/2) per free entry; the t
    family adds the gamma prior on nu - 2.
    """
    m = copula.correlation.dimension
    total = (m * (m - 1) // 2) * math.log(0.5)
    if copula.family is CopulaFamily.STUDENT_T:
        if copula.nu <= 2.0:
            raise DomainError(f"nu must exceed 2, got {copula.nu!r}")
        total += prior.nu_minus_2.log_pdf(copula.nu - 2.0)
    return total


def stage1_target(omegas, data, prior):
    """Stage-one log target: marginal likelihood columns plus marginal priors.

    The copula factor is absent by construction, so the result is a sum
    of per-coordinate terms and invariant to jointly permuting data
    columns and parameter entries when the priors are exchangeable.
    """
    omegas = tuple(omegas)
    if len(omegas) != data.dimension:
        raise DomainError(
            f"{len(omegas)} marginals for dataset dimension {data.dimension}")
    total = log_prior_marginals(omegas, prior)
    for j, w in enumerate(omegas):
        total += float(np.sum(pg_log_pdf(data.angles[:, j], w)))
    return total


def _data_to_unit_scale(data, omegas):
    u = np.empty_like(data.angles)
    for j, w in enumerate(omegas):
        u[:, j] = pg_cdf(data.angles[:, j], w)
    return clamp_probabilities(u)


def stage2_target(copula, omegas, data, prior):
    """Stage-two log target given marginal parameters.

    The copula density of the clamped cdf-transformed data plus the
    copula prior.  Together with ``stage1_target`` this reconstructs the
    full log posterior kernel.
    """
    omegas = tuple(omegas)
    if len(omegas) != data.dimension:
        raise DomainError(
            f"{len(omegas)} marginals for dataset dimension {data.dimension}")
    if copula.dimension != data.dimension:
        raise DomainError(
            f"copula dimension {copula.dimension} for dataset dimension "
            f"{data.dimension}")
    u = _data_to_unit_scale(data, omegas)
    if copula.family is CopulaFamily.STUDENT_T:
        z = np.asarray(student_t_quantile(u, copula.nu))
        dens = t_log_density_from_scores(z, copula.nu, copula.correlation.factor)
    else:
        z = np.asarray(std_normal_quantile(u))
        dens = log_density_from_scores(z, copula.correlation.factor)
    return float(np.sum(dens)) + log_prior_copula(copula, prior)


class _ColumnCache:
    """Per-coordinate sufficient statistics for the stage-one likelihood."""

    def __init__(self, theta):
        self.n = theta.size
        self.cos = np.cos(theta)
        self.sin = np.sin(theta)
        self.sum_log_cos = float(np.sum(np.log(self.cos)))
        self.sum_log_sin = float(np.sum(np.log(self.sin)))

    def log_lik(self, a1, a2, b):
        mix = float(np.sum(np.log(self.cos + b * self.sin)))
        return (self.n * (a2 * math.log(b) - log_beta(a1, a2))
                + (a1 - 1.0) * self.sum_log_cos
                + (a2 - 1.0) * self.sum_log_sin
                - (a1 + a2) * mix)


def _column_log_target(cache, priors, y):
    """Stage-one log target of one coordinate at log parameters y.

    Includes the Jacobian of the log transform, sum(y), so the walk on y
    targets the posterior of the natural parameters.
    """
    if np.any(y > _MAX_LOG_PARAM):
        return -math.inf
    a1, a2, b = np.exp(y)
    pa1, pa2, pb = priors
    value = (cache.log_lik(a1, a2, b)
             + pa1.log_pdf(a1) + pa2.log_pdf(a2) + pb.log_pdf(b)
             + float(np.sum(y)))
    if math.isnan(value):
        raise NumericalError(
            f"stage-one target is NaN at log parameters {y.tolist()}")
    return value


class _Adapter:
    """Windowed Robbins-Monro step scaling toward the target acceptance."""

    def __init__(self, step):
        self.step = float(step)
        self.accepted = 0
        self.proposed = 0
        self.rounds = 0

    def track(self, accepted):
        self.proposed += 1
        self.accepted += int(accepted)

    def adapt(self):
        if self.proposed == 0:
            return False
        rate = self.accepted / self.proposed
        self.rounds += 1
        gain = self.rounds ** -0.6
        self.step = float(np.clip(self.step * math.exp(gain * (rate - ACCEPT_TARGET)),
                                  _STEP_FLOOR, _STEP_CEIL))
        self.accepted = 0
        self.proposed = 0
        return True


def _run_stage1(data, prior, config, rng):
    m = data.dimension
    caches = [_ColumnCache(data.angles[:, j]) for j in range(m)]
    priors = [prior.marginal_priors(j, m) for j in range(m)]
    state = [np.zeros(3) for _ in range(m)]
    target = []
    for j in range(m):
        value = _column_log_target(caches[j], priors[j], state[j])
        if not math.isfinite(value):
            raise NumericalError(
                f"stage-one target is not finite at the initial state for "
                f"coordinate {j + 1}")
        target.append(value)
    adapters = [_Adapter(config.step_marginal) for _ in range(m)]
    kept_accept = np.zeros(m)
    kept_proposed = 0
    events = []
    retained = []
    for it in range(1, config.total + 1):
        after_burn = it > config.burn_in
        if after_burn:
            kept_proposed += 1
        for j in range(m):
            prop = state[j] + adapters[j].step * rng.standard_normal(3)
            value = _column_log_target(caches[j], priors[j], prop)
            accept = math.log(rng.uniform()) < value - target[j]
            if accept:
                state[j] = prop
                target[j] = value
            if after_burn:
                kept_accept[j] += int(accept)
            else:
                adapters[j].track(accept)
        if not after_burn and it % config.adapt_window == 0:
            for j in range(m):
                if adapters[j].adapt():
                    events.append(("stage1", it, f"marginal_{j + 1}", adapters[j].step))
        if after_burn and (it - config.burn_in) % config.lag == 0:
            if len(retained) < config.n_draws:
                retained.append(tuple(
                    MarginalParams(*np.exp(state[j])) for j in range(m)))
    rates = {f"marginal_{j + 1}": (kept_accept[j] / kept_proposed if kept_proposed else 0.0)
             for j in range(m)}
    return retained, rates, events


class _CopulaScores:
    """Unit-scale data and its copula scores for one marginal draw."""

    def __init__(self, u, family):
        self.u = u
        self.family = family
        self.n, self.m = u.shape
        self.z = None
        self.marginal_sum = 0.0
        self.nu = None
        if family is CopulaFamily.GAUSSIAN:
            self.z = np.asarray(std_normal_quantile(u))

    def set_nu(self, nu):
        """Recompute t scores for a new nu (t family only)."""
        self.nu = float(nu)
        self.z = np.asarray(student_t_quantile(self.u, self.nu))
        const = (math.lgamma(0.5 * (self.nu + 1.0)) - math.lgamma(0.5 * self.nu)
                 - 0.5 * math.log(self.nu * math.pi))
        self.marginal_sum = float(
            self.n * self.m * const
            - 0.5 * (self.nu + 1.0) * np.sum(np.log1p(self.z * self.z / self.nu)))

    def joint_sum(self, factor, nu):
        """Sum over rows of the joint elliptical log density."""
        if self.family is CopulaFamily.GAUSSIAN:
            return float(np.sum(log_density_from_scores(self.z, factor)))
        return float(np.sum(mvt_log_pdf(self.z, nu, factor)))


def _nu_target_terms(scores, factor, nu, eta, prior):
    """Stage-two log target pieces that depend on nu, at fixed rho."""
    joint = scores.joint_sum(factor, nu)
    return (joint - scores.marginal_sum
            + prior.nu_minus_2.log_pdf(nu - 2.0) + eta)


def _run_stage2(data, marginal_draws, family, prior, config, rng):
    m = data.dimension
    pairs = [(r, q) for r in range(m) for q in range(r + 1, m)]
    pair_names = [f"rho_{r + 1}_{q + 1}" for r, q in pairs]
    n_pairs = len(pairs)
    student = family is CopulaFamily.STUDENT_T

    rho = np.zeros(n_pairs)
    factor = cholesky(np.eye(m))
    nu = 4.0 if student else None
    eta = math.log(nu - 2.0) if student else None

    rho_adapt = [_Adapter(config.step_rho) for _ in range(n_pairs)]
    nu_adapt = _Adapter(config.step_nu) if student else None
    kept = {name: [0, 0] for name in pair_names}
    if student:
        kept["nu"] = [0, 0]
    events = []
    out = []

    def build_matrix(vals):
        a = np.eye(m)
        for (r, q), v in zip(pairs, vals):
            a[r, q] = v
            a[q, r] = v
        return a

    def sweep(scores, joint_current, adapting, counting):
        nonlocal rho, factor, nu, eta
        for idx in range(n_pairs):
            prop = rho.copy()
            prop[idx] = rho[idx] + rho_adapt[idx].step * rng.standard_normal()
            accept = False
            if abs(prop[idx]) < 1.0:
                try:
                    prop_factor = cholesky(build_matrix(prop))
                except NotPositiveDefiniteError:
                    prop_factor = None
                if prop_factor is not None:
                    value = scores.joint_sum(prop_factor, nu)
                    if math.isnan(value):
                        raise NumericalError(
                            f"stage-two target is NaN at rho {prop.tolist()}")
                    accept = math.log(rng.uniform()) < value - joint_current
                    if accept:
                        rho = prop
                        factor = prop_factor
                        joint_current = value
            if adapting:
                rho_adapt[idx].track(accept)
            if counting:
                kept[pair_names[idx]][0] += int(accept)
                kept[pair_names[idx]][1] += 1
        if student:
            eta_prop = eta + nu_adapt.step * rng.standard_normal()
            accept = False
            if eta_prop < _MAX_LOG_PARAM:
                nu_prop = 2.0 + math.exp(eta_prop)
                trial = _CopulaScores(scores.u, family)
                trial.set_nu(nu_prop)
                current = _nu_target_terms(scores, factor, nu, eta, prior)
                proposed = _nu_target_terms(trial, factor, nu_prop, eta_prop, prior)
                if math.isnan(proposed) or math.isnan(current):
                    raise NumericalError(
                        f"stage-two target is NaN at nu {nu_prop!r}")
                accept = math.log(rng.uniform()) < proposed - current
                if accept:
                    nu = nu_prop
                    eta = eta_prop
                    scores.z = trial.z
                    scores.nu = trial.nu
                    scores.marginal_sum = trial.marginal_sum
                    joint_current = scores.joint_sum(factor, nu)
            if adapting:
                nu_adapt.track(accept)
            if counting:
                kept["nu"][0] += int(accept)
                kept["nu"][1] += 1
        return joint_current

    for k, omegas in enumerate(marginal_draws):
        scores = _CopulaScores(_data_to_unit_scale(data, omegas), family)
        if student:
            scores.set_nu(nu)
        joint_current = scores.joint_sum(factor, nu)
        if not math.isfinite(joint_current):
            raise NumericalError(
                "stage-two target is not finite at the current state")
        if k == 0:
            # adaptation happens once, against the first retained draw
            for w in range(1, config.stage2_warmup + 1):
                joint_current = sweep(scores, joint_current, adapting=True, counting=False)
                if w % 25 == 0:
                    for idx in range(n_pairs):
                        if rho_adapt[idx].adapt():
                            events.append(("stage2-warmup", w, pair_names[idx],
                                           rho_adapt[idx].step))
                    if student and nu_adapt.adapt():
                        events.append(("stage2-warmup", w, "nu", nu_adapt.step))
        for _ in range(config.stage2_sweeps):
            joint_current = sweep(scores, joint_current, adapting=False, counting=True)
        correlation = CorrelationMatrix.from_upper(m, rho)
        if student:
            out.append(CopulaParams(family, correlation, nu))
        else:
            out.append(CopulaParams(family, correlation))
    rates = {name: (c[0] / c[1] if c[1] else 0.0) for name, c in kept.items()}
    return out, rates, events


def run_two_stage(data, family, prior=None, config=None):
    """Run the two-stage sampler and return the combined chain.

    Parameters
    ----------
    data : Dataset
        At least two coordinates of interior angles.
    family : CopulaFamily or str
        Copula family to fit.
    prior : PriorSpec, optional
        Defaults to independent Ga(1, 0.2) priors everywhere.
    config : McmcConfig, optional
        Defaults to the reference schedule 120000/70000/50.

    Returns
    -------
    Chain
        One ModelParams per retained draw, with acceptance rates and the
        recorded adaptation events.
    """
    if not isinstance(data, Dataset):
        raise ValidationError("data must be a Dataset")
    if data.dimension < 2:
        raise ValidationError("fitting needs at least two angle coordinates")
    family = CopulaFamily(family)
    prior = PriorSpec() if prior is None else prior
    config = McmcConfig() if config is None else config
    rng = np.random.default_rng(config.seed)
    marginal_draws, rates1, events1 = _run_stage1(data, prior, config, rng)
    copula_draws, rates2, events2 = _run_stage2(
        data, marginal_draws, family, prior, config, rng)
    draws = tuple(ModelParams(marginals=o, copula=c)
                  for o, c in zip(marginal_draws, copula_draws))
    rates = dict(rates1)
    rates.update(rates2)
    return Chain(draws=draws, family=family, acceptance=rates, config=config,
                 stage="combined", adaptation_events=tuple(events1 + events2))
