# Copyright 2021-2026 pylbkld contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Expected-utility estimators for a single design.

* LB-KLD with and without the prior partition, from simulations only.
* Nested Monte Carlo KLD for models with a tractable likelihood.
* D-posterior precision with a rejection ABC posterior.

Every estimator is a pure function of (model, design, config, stream).
Replication r draws from ``stream.child(r)``.
"""

from .entropy import K_DEFAULT, jitter, knn_entropy
from .error import ArgumentError, CapabilityError, ConfigError
from .models import sample_joint
from .parallel import ordered_map
from .partition import partition_prior
from .rng import as_stream
from .structs import EstimatorKind, InferenceResult, UtilityEstimate
from dataclasses import dataclass
from functools import partial
import logging
import numpy as np
from scipy import stats
from scipy.special import logsumexp

log = logging.getLogger(__name__)


DET_FLOOR = 1e-300
_NESTED_BLOCK = 1 << 20  # likelihood evaluations per block


@dataclass(frozen=True)
class LbkldConfig:
    """LB-KLD settings.

    :param n: The joint sample count per replication.
    :param L: The number of prior partition components.
    :param n_min: The minimum component size.
    :param k_nn: The entropy estimator neighbor order.
    :param jitter_scale: The dequantization width for integer-valued outputs.
    :param replications: The independent replications to average.
    """
    n: int = 10000
    L: int = 5
    n_min: int = 10
    k_nn: int = K_DEFAULT
    jitter_scale: float = 1.0
    replications: int = 20

    def validate(self, prefix='lbkld'):
        if self.n < 2:
            raise ConfigError(f'n must be >= 2, got {self.n}', f'{prefix}.n')
        if self.L < 1:
            raise ConfigError(f'L must be >= 1, got {self.L}', f'{prefix}.L')
        if self.k_nn < 1:
            raise ConfigError(f'k_nn must be >= 1, got {self.k_nn}', f'{prefix}.k_nn')
        if self.n <= self.k_nn:
            raise ConfigError(f'n must exceed k_nn={self.k_nn}', f'{prefix}.n')
        if self.L > 1 and self.n_min <= self.k_nn:
            raise ConfigError(f'n_min must exceed k_nn={self.k_nn} so every group supports entropy estimation',
                              f'{prefix}.n_min')
        if self.n < self.L * max(self.n_min, 1):
            raise ConfigError(f'n={self.n} < L * n_min = {self.L * self.n_min}', f'{prefix}.n')
        if self.jitter_scale < 0:
            raise ConfigError('jitter_scale must be >= 0', f'{prefix}.jitter_scale')
        if self.replications < 1:
            raise ConfigError('replications must be >= 1', f'{prefix}.replications')
        return self


@dataclass(frozen=True)
class NestedMcConfig:
    """Nested Monte Carlo settings.

    :param n: The outer joint sample count.
    :param n_inner: The inner prior sample count per outer sample.
    :param replications: The replications.  With one, the standard error
        comes from the n outer terms.
    """
    n: int = 10000
    n_inner: int = 1000
    replications: int = 1

    def validate(self, prefix='nested_mc'):
        for name in ('n', 'n_inner', 'replications'):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} must be >= 1', f'{prefix}.{name}')
        return self


@dataclass(frozen=True)
class AbcConfig:
    """Rejection ABC and D-posterior precision settings.

    :param n_sim: The prior-predictive pool size.
    :param n_keep: The accepted sample count.
    :param n_outer: The synthetic observed datasets per design.
    :param reuse_pool: Share one pool across all synthetic datasets.
    """
    n_sim: int = 10000
    n_keep: int = 100
    n_outer: int = 100
    reuse_pool: bool = True

    def validate(self, prefix='abc'):
        if self.n_keep < 1:
            raise ConfigError('n_keep must be >= 1', f'{prefix}.n_keep')
        if self.n_keep > self.n_sim:
            raise ConfigError(f'n_keep={self.n_keep} exceeds n_sim={self.n_sim}', f'{prefix}.n_keep')
        if self.n_outer < 1:
            raise ConfigError('n_outer must be >= 1', f'{prefix}.n_outer')
        return self


def _summarize(values):
    values = np.asarray(values, dtype=np.float64)
    if len(values) > 1:
        return float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(len(values)))
    return float(values[0]), 0.0


# ----------------------------------------------------------------------------
# LB-KLD

def _lbkld_replication(model, design, cfg: LbkldConfig, use_partition, stream):
    thetas, batch = sample_joint(model, design, cfg.n, stream.child(0).generator(), key=stream.key)
    scale = cfg.jitter_scale * model.integer_mask(design)
    y_star = jitter(batch.values, scale, stream.child(1).generator())
    h_star = knn_entropy(y_star, cfg.k_nn).value

    if use_partition:
        part = partition_prior(thetas, batch.values, cfg.L, cfg.n_min, stream.child(2).generator())
        groups, weights = part.groups, part.weights
    else:
        groups, weights = [np.arange(cfg.n)], np.ones(1)

    # pairs follow sample order, so the partition only selects rows of z
    pair_rng = stream.child(3).generator()
    y1 = model.simulate_batch(thetas, design, pair_rng)
    y2 = model.simulate_batch(thetas, design, pair_rng)
    # each replicate is dequantized like y*, then differenced
    z_rng = stream.child(4).generator()
    z = jitter(y1, scale, z_rng) - jitter(y2, scale, z_rng)
    h_z = 0.0
    for idx, weight in zip(groups, weights):
        h_z += weight * knn_entropy(z[idx], cfg.k_nn).value
    u = -h_z + 0.5 * batch.dim * np.log(2.0) + h_star
    log.debug('lbkld %s key=%s: H*=%.6g Hz=%.6g U=%.6g', design, stream.key, h_star, h_z, u)
    return u


def _lbkld(model, design, cfg, stream, use_partition, workers):
    cfg = cfg.validate()
    design = model.validate_design(design)
    stream = as_stream(stream)
    fn = partial(_lbkld_replication, model, design, cfg, use_partition)
    values = ordered_map(fn, [stream.child(r) for r in range(cfg.replications)], workers)
    value, se = _summarize(values)
    kind = EstimatorKind.LBKLD_PARTITION if use_partition else EstimatorKind.LBKLD_NOPARTITION
    return UtilityEstimate(design=design, kind=kind, value=value, std_error=se,
                           n_sims=3 * cfg.n * cfg.replications, replications=cfg.replications)


def lbkld_estimate(model, design, cfg: LbkldConfig, stream, workers=1) -> UtilityEstimate:
    """Estimate the expected LB-KLD utility with the prior partition.

    Per replication: draw n joint samples and estimate H(y); partition the
    prior by clustering the outputs; for each theta draw a fresh replicate
    pair and estimate the entropy of their difference z within each group:

        U_L = -sum_l w_l H_l(z) + (dim_y / 2) log 2 + H(y)

    Consumes 3 n simulations per replication.

    :param model: The :class:`SimulationModel`.
    :param design: The design.
    :param cfg: The :class:`LbkldConfig`.
    :param stream: The :class:`Stream` or integer seed.
    :param workers: The replication parallelism.
    :return: The :class:`UtilityEstimate`.
    """
    return _lbkld(model, design, cfg, stream, True, workers)


def lbkld_nopartition(model, design, cfg: LbkldConfig, stream, workers=1) -> UtilityEstimate:
    """Estimate the expected LB-KLD utility with a single prior component."""
    return _lbkld(model, design, cfg, stream, False, workers)


# ----------------------------------------------------------------------------
# Nested Monte Carlo KLD

def _nested_replication(model, design, cfg: NestedMcConfig, stream):
    rng = stream.generator()
    thetas, batch = sample_joint(model, design, cfg.n, rng, key=stream.key)
    y = batch.values
    log_num = model.log_likelihood(y, thetas, design)
    log_den = np.empty(cfg.n)
    block = max(1, _NESTED_BLOCK // cfg.n_inner)
    for start in range(0, cfg.n, block):
        stop = min(start + block, cfg.n)
        inner = model.prior_sample_n(rng, (stop - start) * cfg.n_inner)
        inner = inner.reshape(stop - start, cfg.n_inner, -1)
        ll = model.log_likelihood(y[start:stop, np.newaxis, :], inner, design)
        log_den[start:stop] = logsumexp(ll, axis=1) - np.log(cfg.n_inner)
    return log_num - log_den


def nested_mc_kld(model, design, cfg: NestedMcConfig, stream, workers=1) -> UtilityEstimate:
    """Estimate the expected KLD utility by nested Monte Carlo.

    U = mean_i [log p(y_i | theta_i) - log mean_j p(y_i | theta_ij)]

    :raise CapabilityError: when the model has no tractable likelihood.
    """
    if not model.has_likelihood:
        raise CapabilityError(f'nested_mc_kld needs a likelihood; {model.name} has none')
    cfg = cfg.validate()
    design = model.validate_design(design)
    stream = as_stream(stream)
    fn = partial(_nested_replication, model, design, cfg)
    terms = ordered_map(fn, [stream.child(r) for r in range(cfg.replications)], workers)
    if cfg.replications == 1:
        t = terms[0]
        value = float(np.mean(t))
        se = float(np.std(t, ddof=1) / np.sqrt(len(t))) if len(t) > 1 else 0.0
    else:
        value, se = _summarize([np.mean(t) for t in terms])
    return UtilityEstimate(design=design, kind=EstimatorKind.NESTED_MC_KLD, value=value, std_error=se,
                           n_sims=cfg.n * cfg.replications, replications=cfg.replications)


# ----------------------------------------------------------------------------
# Rejection ABC and D-posterior precision

@dataclass
class AbcPool:
    """Prior-predictive (theta, y) pairs simulated at one design."""
    theta: np.ndarray
    y: np.ndarray

    @property
    def n_sim(self) -> int:
        return self.theta.shape[0]


def simulate_pool(model, design, n_sim, rng: np.random.Generator) -> AbcPool:
    thetas, batch = sample_joint(model, design, n_sim, rng)
    return AbcPool(theta=thetas, y=batch.values)


def abc_rejection(model, design, y_obs, cfg: AbcConfig, pool: AbcPool) -> np.ndarray:
    """Keep the pool thetas whose outputs lie closest to y_obs.

    Distance is Euclidean after dividing each output coordinate by its pool
    standard deviation; zero-variance coordinates are dropped.  Ties keep
    the lower pool index.

    :return: The (n_keep, theta_dim) accepted samples.
    :raise ConfigError: when n_keep exceeds the pool size.
    """
    if cfg.n_keep > pool.n_sim:
        raise ConfigError(f'n_keep={cfg.n_keep} exceeds the pool size {pool.n_sim}', 'abc.n_keep')
    y_obs = np.asarray(y_obs, dtype=np.float64).reshape(-1)
    sd = np.std(pool.y, axis=0)
    keep = sd > 0
    delta = (pool.y[:, keep] - y_obs[keep]) / sd[keep]
    dist = np.sqrt(np.sum(delta * delta, axis=1))
    idx = np.argsort(dist, kind='stable')[:cfg.n_keep]
    return pool.theta[idx]


def posterior_summary(theta_samples):
    """Unbiased sample mean and covariance.

    :return: (mean, cov) with cov always a 2-d matrix.
    :raise ArgumentError: for fewer than 2 samples.
    """
    x = np.asarray(theta_samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, np.newaxis]
    if x.shape[0] < 2:
        raise ArgumentError(f'need at least 2 samples, got {x.shape[0]}')
    return x.mean(axis=0), np.atleast_2d(np.cov(x, rowvar=False, ddof=1))


def posterior_moments(theta_samples) -> dict:
    """Per-coordinate mean, standard deviation, skewness and excess kurtosis."""
    x = np.asarray(theta_samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, np.newaxis]
    mean, cov = posterior_summary(x)
    return {
        'mean': mean,
        'sd': np.sqrt(np.diag(cov)),
        'skewness': stats.skew(x, axis=0),
        'excess_kurtosis': stats.kurtosis(x, axis=0, fisher=True),
    }


def d_posterior_precision(model, design, cfg: AbcConfig, stream, workers=1) -> UtilityEstimate:
    """Estimate the expected D-posterior precision 1 / det(posterior covariance).

    One pool of n_sim prior-predictive simulations serves all n_outer
    synthetic datasets unless ``cfg.reuse_pool`` is off.  Determinants below
    1e-300 are floored and flagged.
    """
    cfg = cfg.validate()
    design = model.validate_design(design)
    stream = as_stream(stream)
    pool = simulate_pool(model, design, cfg.n_sim, stream.child(0).generator()) if cfg.reuse_pool else None
    flags = []
    u = np.empty(cfg.n_outer)
    for i in range(cfg.n_outer):
        _, obs = sample_joint(model, design, 1, stream.child(1, i).generator())
        p = pool if pool is not None else simulate_pool(model, design, cfg.n_sim, stream.child(2, i).generator())
        accepted = abc_rejection(model, design, obs.values[0], cfg, p)
        _, cov = posterior_summary(accepted)
        det = float(np.linalg.det(cov))
        if not det > DET_FLOOR:
            det = DET_FLOOR
            if 'det_floor' not in flags:
                log.warning('d_posterior_precision %s: singular posterior covariance', design)
                flags.append('det_floor')
        u[i] = 1.0 / det
    value, se = _summarize(u)
    n_sims = cfg.n_sim + cfg.n_outer if cfg.reuse_pool else cfg.n_outer * (cfg.n_sim + 1)
    return UtilityEstimate(design=design, kind=EstimatorKind.D_POSTERIOR_PRECISION, value=value,
                           std_error=se, n_sims=n_sims, replications=1, flags=flags)



def _inference_trial(model, design, cfg, pool, stream):
    thetas, obs = sample_joint(model, design, 1, stream.generator())
    accepted = abc_rejection(model, design, obs.values[0], cfg, pool)
    return thetas[0], np.mean(accepted, axis=0)


def replicate_inference(model, design, cfg: AbcConfig, trials, stream, workers=1) -> InferenceResult:
    """Repeat rejection ABC on synthetic data drawn from the joint prior-predictive.

    One pool from ``stream.child(0)`` serves every trial.  Trial t draws its
    (theta_true, y) pair from ``stream.child(1, t)``.

    :return: The :class:`InferenceResult`.
    """
    cfg = cfg.validate()
    if trials < 1:
        raise ConfigError('trials must be >= 1', 'infer.trials')
    design = model.validate_design(design)
    stream = as_stream(stream)
    pool = simulate_pool(model, design, cfg.n_sim, stream.child(0).generator())
    fn = partial(_inference_trial, model, design, cfg, pool)
    results = ordered_map(fn, [stream.child(1, t) for t in range(trials)], workers)
    theta_true = np.array([r[0] for r in results])
    posterior_mean = np.array([r[1] for r in results])
    out = InferenceResult(design=design, theta_true=theta_true, posterior_mean=posterior_mean)
    log.info('replicate_inference %s: trials=%d mse=%s', design, trials, out.mse)
    return out


ESTIMATORS = {
    EstimatorKind.LBKLD_PARTITION: lbkld_estimate,
    EstimatorKind.LBKLD_NOPARTITION: lbkld_nopartition,
    EstimatorKind.NESTED_MC_KLD: nested_mc_kld,
    EstimatorKind.D_POSTERIOR_PRECISION: d_posterior_precision,
}


def estimate(kind, model, design, cfg, stream, workers=1) -> UtilityEstimate:
    """Dispatch to the estimator named by kind."""
    try:
        fn = ESTIMATORS[EstimatorKind(kind)]
    except ValueError:
        raise ConfigError(f'unknown estimator {kind!r}', 'estimator')
    return fn(model, design, cfg, stream, workers=workers)
