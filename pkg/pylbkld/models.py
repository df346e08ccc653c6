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

"""Generative simulation models.

A model provides a prior sampler and a forward simulator for y | theta, d.
Tractable models also provide an exact log-likelihood.  Designs are always
tuples: ``(d,)`` for the toy model, ``(i, j)`` statistic indices for Ricker
and sorted sampling times for the aphid model.
"""

from .error import CapabilityError, ConfigError, DomainError
from .structs import SampleBatch
from abc import ABC, abstractmethod
from dataclasses import dataclass
import logging
import numpy as np
from scipy.special import betaln
from scipy.stats import norm

log = logging.getLogger(__name__)


RICKER_STATISTIC_NAMES = (
    'average population',
    'zeros observed',
    'autocov lag0',
    'autocov lag1',
    'autocov lag2',
    'autocov lag3',
    'autocov lag4',
    'autocov lag5',
    'alpha0',
    'alpha1',
    'alpha2',
    'beta0',
    'beta1',
)
RICKER_STATISTIC_COUNT = len(RICKER_STATISTIC_NAMES)
RICKER_COND_MAX = 1e12

APHID_PRIOR_MEAN = np.array([0.246, 0.000136])
APHID_PRIOR_COV = np.array([[0.0079 ** 2, 5.8e-8],
                            [5.8e-8, 0.00002 ** 2]])
APHID_T_MAX = 50.0

# Published optimal aphid sampling times by number of samples.
APHID_REFERENCE_DESIGNS = {
    'lbkld': {
        1: (21.0,),
        2: (17.0, 28.0),
        3: (15.7, 22.7, 32.0),
        4: (13.8, 19.1, 24.5, 30.6),
    },
    'd_posterior': {
        1: (21.0,),
        2: (18.0, 27.0),
        3: (16.8, 21.9, 29.1),
        4: (15.8, 20.4, 25.2, 30.5),
    },
}


def as_design(design) -> tuple:
    """Normalize a design to a tuple of python numbers."""
    if np.isscalar(design):
        return (design.item() if hasattr(design, 'item') else design,)
    return tuple(x.item() if hasattr(x, 'item') else x for x in design)


class SimulationModel(ABC):
    """The generative model interface.

    Subclasses implement :meth:`prior_sample_n`, :meth:`simulate_batch` and
    :meth:`dim_y`.  Models are immutable and safe to share between workers.
    """

    name = 'model'
    theta_dim = 1
    has_likelihood = False

    def prior_sample(self, rng: np.random.Generator) -> np.ndarray:
        """Draw one parameter vector of length :attr:`theta_dim`."""
        return self.prior_sample_n(rng, 1)[0]

    @abstractmethod
    def prior_sample_n(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw an (n, theta_dim) array of prior samples."""

    @abstractmethod
    def prior_mean(self) -> np.ndarray:
        """The prior mean, a vector of length :attr:`theta_dim`."""

    def simulate(self, theta, design, rng: np.random.Generator) -> np.ndarray:
        """Simulate one observation vector of length dim_y(design)."""
        theta = np.asarray(theta, dtype=np.float64).reshape(1, self.theta_dim)
        return self.simulate_batch(theta, design, rng)[0]

    @abstractmethod
    def simulate_batch(self, thetas, design, rng: np.random.Generator) -> np.ndarray:
        """Simulate one observation per row of thetas.

        :param thetas: The (n, theta_dim) parameter array.
        :param design: The design tuple.
        :param rng: The generator.
        :return: The (n, dim_y(design)) observation array.
        """

    def log_likelihood(self, y, theta, design):
        """Evaluate log p(y | theta, design) in nats, broadcasting leading axes.

        :raise CapabilityError: for models without a tractable likelihood.
        """
        raise CapabilityError(f'{self.name} model has no tractable likelihood')

    @abstractmethod
    def dim_y(self, design) -> int:
        """The observation dimension for the design."""

    def validate_design(self, design) -> tuple:
        """Check the design and return it as a tuple.

        :raise DomainError: when the design is outside the design space.
        """
        return as_design(design)

    def integer_mask(self, design) -> np.ndarray:
        """Per-coordinate flags for observations on the integer lattice."""
        return np.zeros(self.dim_y(design), dtype=bool)


def sample_joint(model: SimulationModel, design, n: int, rng: np.random.Generator, key=()):
    """Draw n (theta, y) pairs from the joint prior-predictive distribution.

    :return: (thetas, batch) where batch is a :class:`SampleBatch` of y values.
    """
    design = model.validate_design(design)
    thetas = model.prior_sample_n(rng, n)
    y = model.simulate_batch(thetas, design, rng)
    return thetas, SampleBatch(values=y, design=design, key=tuple(key))


# ----------------------------------------------------------------------------
# Toy model

def toy_g(theta, d):
    """G(theta, d) = theta (1 - theta)^(d - 1) / B(2, d)."""
    theta = np.asarray(theta, dtype=np.float64)
    return theta * np.power(1.0 - theta, d - 1.0) * np.exp(-betaln(2.0, d))


def _toy_check(theta, d):
    theta = np.asarray(theta, dtype=np.float64)
    if not np.all((theta >= 0.0) & (theta <= 1.0)):
        raise DomainError('toy theta must lie in [0, 1]')
    if not 2.0 <= d <= 100.0:
        raise DomainError(f'toy design d={d} must lie in [2, 100]')


def toy_simulate(theta, d, rng: np.random.Generator, noise_sd=0.05):
    """Draw y = G(theta, d)(1 + eps1) + eps2 for scalar or array theta."""
    _toy_check(theta, d)
    g = toy_g(theta, d)
    eps = rng.normal(0.0, noise_sd, size=(2,) + np.shape(g))
    return g * (1.0 + eps[0]) + eps[1]


@dataclass(frozen=True)
class ToyModel(SimulationModel):
    """Scalar model with a strongly bimodal posterior; prior U[0, 1]."""

    noise_sd: float = 0.05
    d_lo: float = 2.0
    d_hi: float = 100.0

    name = 'toy'
    theta_dim = 1
    has_likelihood = True

    def prior_sample_n(self, rng, n):
        return rng.uniform(0.0, 1.0, size=(n, 1))

    def prior_mean(self):
        return np.array([0.5])

    def simulate_batch(self, thetas, design, rng):
        (d,) = self.validate_design(design)
        thetas = np.asarray(thetas, dtype=np.float64)
        return toy_simulate(thetas[:, 0], d, rng, self.noise_sd)[:, np.newaxis]

    def log_likelihood(self, y, theta, design):
        (d,) = self.validate_design(design)
        g = toy_g(np.asarray(theta, dtype=np.float64)[..., 0], d)
        scale = self.noise_sd * np.sqrt(1.0 + g * g)
        return norm.logpdf(np.asarray(y, dtype=np.float64)[..., 0], loc=g, scale=scale)

    def dim_y(self, design):
        return 1

    def validate_design(self, design):
        design = as_design(design)
        if len(design) != 1:
            raise DomainError(f'toy design must be scalar, got {design}')
        if not self.d_lo <= design[0] <= self.d_hi:
            raise DomainError(f'toy design d={design[0]} must lie in [{self.d_lo}, {self.d_hi}]')
        return design


# ----------------------------------------------------------------------------
# Ricker model

def ricker_simulate_batch(thetas, rng: np.random.Generator, T=50, n1=1.0):
    """Simulate observed Ricker series for each row of (log r, phi, sigma).

    :return: The (n, T) integer array of Poisson observations.
    """
    thetas = np.asarray(thetas, dtype=np.float64).reshape(-1, 3)
    log_r, phi, sigma = thetas[:, 0], thetas[:, 1], thetas[:, 2]
    if np.any(sigma < 0) or np.any(phi < 0):
        raise DomainError('ricker phi and sigma must be nonnegative')
    r = np.exp(log_r)
    n_paths = thetas.shape[0]
    latent = np.empty((n_paths, T))
    latent[:, 0] = n1
    noise = rng.normal(0.0, 1.0, size=(n_paths, T - 1)) * sigma[:, np.newaxis]
    with np.errstate(over='ignore', under='ignore'):
        for t in range(T - 1):
            n_t = latent[:, t]
            latent[:, t + 1] = r * n_t * np.exp(-n_t + noise[:, t])
    return rng.poisson(phi[:, np.newaxis] * latent)


def ricker_simulate_series(theta, rng: np.random.Generator, T=50, n1=1.0):
    """Simulate one observed series (Y_1, ..., Y_T) for theta = (log r, phi, sigma)."""
    return ricker_simulate_batch(np.asarray(theta).reshape(1, 3), rng, T, n1)[0]


def _batched_ols(x, y):
    """Solve least squares per row via normal equations.

    Rows whose Gram matrix condition number exceeds RICKER_COND_MAX get zeros.

    :param x: The (n, m, p) regressor stack.
    :param y: The (n, m) response stack.
    :return: The (n, p) coefficients.
    """
    p = x.shape[-1]
    xt = np.swapaxes(x, -1, -2)
    gram = xt @ x
    rhs = (xt @ y[..., np.newaxis])[..., 0]
    with np.errstate(divide='ignore', invalid='ignore'):
        cond = np.linalg.cond(gram)
    ok = np.isfinite(cond) & (cond <= RICKER_COND_MAX)
    gram = np.where(ok[:, np.newaxis, np.newaxis], gram, np.eye(p))
    coef = np.linalg.solve(gram, rhs[..., np.newaxis])[..., 0]
    coef[~ok] = 0.0
    return coef


def ricker_statistics(series) -> np.ndarray:
    """Compute the 13 Ricker summary statistics.

    Statistic order: mean, zero count, autocovariances at lags 0 to 5,
    (alpha0, alpha1, alpha2) of the quadratic regression and (beta0, beta1)
    of the power regression.

    :param series: A length-T series or an (n, T) stack, T >= 7.
    :return: A 13-vector or an (n, 13) array.
    """
    y = np.asarray(series, dtype=np.float64)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    n, T = y.shape
    if T < 7:
        raise DomainError(f'ricker statistics need T >= 7, got {T}')
    out = np.empty((n, RICKER_STATISTIC_COUNT))
    mean = y.mean(axis=1)
    out[:, 0] = mean
    out[:, 1] = np.count_nonzero(y == 0, axis=1)
    dev = y - mean[:, np.newaxis]
    for lag in range(6):
        out[:, 2 + lag] = np.sum(dev[:, :T - lag] * dev[:, lag:], axis=1) / T

    # response y_{t+1} also appears in the regressor, as written
    y_prev, y_next = y[:, :-1], y[:, 1:]
    diff = y_next - y_prev
    x_alpha = np.stack([np.ones_like(diff), diff, diff * diff], axis=-1)
    out[:, 8:11] = _batched_ols(x_alpha, y_next)

    p03 = np.power(y_prev, 0.3)
    x_beta = np.stack([p03, p03 * p03], axis=-1)
    out[:, 11:13] = _batched_ols(x_beta, np.power(y_next, 0.3))
    return out[0] if single else out


@dataclass(frozen=True)
class RickerModel(SimulationModel):
    """Scaled Ricker map observed through Poisson counts and summarized by two statistics."""

    T: int = 50
    n1: float = 1.0

    name = 'ricker'
    theta_dim = 3

    def prior_sample_n(self, rng, n):
        lo = np.array([3.0, 5.0, 0.0])
        hi = np.array([5.0, 15.0, 0.6])
        return rng.uniform(lo, hi, size=(n, 3))

    def prior_mean(self):
        return np.array([4.0, 10.0, 0.3])

    def simulate_batch(self, thetas, design, rng):
        i, j = self.validate_design(design)
        series = ricker_simulate_batch(thetas, rng, self.T, self.n1)
        return ricker_statistics(series)[:, [i - 1, j - 1]]

    def dim_y(self, design):
        return 2

    def validate_design(self, design):
        design = tuple(int(x) for x in as_design(design))
        if len(design) != 2:
            raise DomainError(f'ricker design must be an index pair, got {design}')
        i, j = design
        if not 1 <= i < j <= RICKER_STATISTIC_COUNT:
            raise DomainError(f'ricker design {design} needs 1 <= i < j <= {RICKER_STATISTIC_COUNT}')
        return design

    def integer_mask(self, design):
        return np.array([x == 2 for x in self.validate_design(design)])


# ----------------------------------------------------------------------------
# Aphid model

def aphid_simulate_batch(thetas, times, rng: np.random.Generator, n0=28, t_max=APHID_T_MAX,
                         return_births=False):
    """Exact event-driven simulation of the aphid birth-death process.

    All paths advance together; each step applies one event to every path
    still running.  From state (n, c) the total rate is lambda n + mu n c.
    The recorded observation for time t_i is the state just before t_i.
    A path stops once every time is recorded or its total rate is zero,
    and its remaining observations hold the current (possibly extinct) count.

    :param thetas: The (n, 2) array of (lambda, mu).
    :param times: The sorted sampling times.
    :param rng: The generator.
    :param n0: The initial population N(0) = C(0).
    :param t_max: The upper time limit.
    :param return_births: Also return the (n, k) cumulative counts C(t_i).
    :return: The (n, k) integer observation array, optionally with C(t_i).
    """
    thetas = np.asarray(thetas, dtype=np.float64).reshape(-1, 2)
    times = np.asarray(times, dtype=np.float64).reshape(-1)
    if np.any(thetas < 0):
        raise DomainError('aphid rates must be nonnegative')
    if np.any(np.diff(times) < 0):
        raise DomainError('aphid sampling times must be sorted')
    if len(times) and (times[0] < 0 or times[-1] > t_max):
        raise DomainError(f'aphid sampling times must lie in [0, {t_max}]')
    n_paths, k = thetas.shape[0], len(times)
    obs = np.zeros((n_paths, k), dtype=np.int64)
    births = np.zeros((n_paths, k), dtype=np.int64)
    pop = np.full(n_paths, n0, dtype=np.int64)
    cum = np.full(n_paths, n0, dtype=np.int64)
    t = np.zeros(n_paths)
    next_obs = np.zeros(n_paths, dtype=np.int64)
    lam, mu = thetas[:, 0], thetas[:, 1]
    idx = np.arange(n_paths) if k else np.zeros(0, dtype=np.int64)
    steps = 0
    while idx.size:
        steps += 1
        n_a, c_a = pop[idx], cum[idx]
        birth_rate = lam[idx] * n_a
        total = birth_rate + mu[idx] * n_a * c_a
        alive = total > 0
        with np.errstate(divide='ignore'):
            dt = rng.exponential(1.0, size=idx.size) / np.where(alive, total, 1.0)
        t_next = np.where(alive, t[idx] + dt, np.inf)

        # record every sampling time passed before the next event
        while True:
            pending = next_obs[idx] < k
            m = pending.copy()
            m[pending] = t_next[pending] > times[next_obs[idx][pending]]
            if not np.any(m):
                break
            rows = idx[m]
            obs[rows, next_obs[rows]] = pop[rows]
            births[rows, next_obs[rows]] = cum[rows]
            next_obs[rows] += 1

        running = next_obs[idx] < k
        idx, birth_rate, total = idx[running], birth_rate[running], total[running]
        t[idx] = t_next[running]
        is_birth = rng.random(idx.size) * total < birth_rate
        pop[idx] += np.where(is_birth, 1, -1)
        cum[idx] += is_birth
    log.debug('aphid: %d paths finished in %d steps', n_paths, steps)
    if return_births:
        return obs, births
    return obs


def aphid_simulate(theta, times, rng: np.random.Generator, n0=28):
    """Simulate (N(t_1), ..., N(t_k)) for one theta = (lambda, mu)."""
    return aphid_simulate_batch(np.asarray(theta).reshape(1, 2), times, rng, n0)[0]


@dataclass(frozen=True)
class AphidModel(SimulationModel):
    """Aphid population growth with cumulative-size-dependent death rate."""

    n0: int = 28
    t_max: float = APHID_T_MAX

    name = 'aphid'
    theta_dim = 2

    def prior_sample_n(self, rng, n):
        # truncate the Gaussian tails to positive rates by redrawing
        out = rng.multivariate_normal(APHID_PRIOR_MEAN, APHID_PRIOR_COV, size=n)
        bad = np.any(out <= 0, axis=1)
        while np.any(bad):
            out[bad] = rng.multivariate_normal(APHID_PRIOR_MEAN, APHID_PRIOR_COV, size=int(bad.sum()))
            bad = np.any(out <= 0, axis=1)
        return out

    def prior_mean(self):
        # of the untruncated Gaussian; the truncated mass is negligible
        return APHID_PRIOR_MEAN.copy()

    def simulate_batch(self, thetas, design, rng):
        times = self.validate_design(design)
        return aphid_simulate_batch(thetas, times, rng, self.n0, self.t_max)

    def dim_y(self, design):
        return len(as_design(design))

    def validate_design(self, design):
        design = tuple(float(x) for x in as_design(design))
        if not design:
            raise DomainError('aphid design needs at least one sampling time')
        if any(b < a for a, b in zip(design[:-1], design[1:])):
            raise DomainError(f'aphid sampling times {design} must be sorted')
        if design[0] < 0 or design[-1] > self.t_max:
            raise DomainError(f'aphid sampling times {design} must lie in [0, {self.t_max}]')
        return design

    def integer_mask(self, design):
        return np.ones(self.dim_y(design), dtype=bool)


# ----------------------------------------------------------------------------
# Oracle models with closed-form information gain

@dataclass(frozen=True)
class GaussianLocationModel(SimulationModel):
    """y = theta + eps with theta ~ N(0, I) and eps ~ N(0, sigma^2 I).

    Any design is accepted and ignored.
    """

    sigma: float = 1.0
    dim: int = 1

    name = 'gaussian'
    has_likelihood = True

    @property
    def theta_dim(self):
        return self.dim

    def prior_sample_n(self, rng, n):
        return rng.normal(size=(n, self.dim))

    def prior_mean(self):
        return np.zeros(self.dim)

    def simulate_batch(self, thetas, design, rng):
        thetas = np.asarray(thetas, dtype=np.float64)
        return thetas + self.sigma * rng.normal(size=thetas.shape)

    def log_likelihood(self, y, theta, design):
        return np.sum(norm.logpdf(y, loc=theta, scale=self.sigma), axis=-1)

    def dim_y(self, design):
        return self.dim

    def expected_information_gain(self):
        """The exact expected KLD utility."""
        return 0.5 * self.dim * np.log1p(1.0 / self.sigma ** 2)


@dataclass(frozen=True)
class NullModel(SimulationModel):
    """Observations independent of theta; the expected information gain is zero."""

    dim: int = 1

    name = 'null'
    has_likelihood = True

    def prior_sample_n(self, rng, n):
        return rng.normal(size=(n, 1))

    def prior_mean(self):
        return np.zeros(1)

    def simulate_batch(self, thetas, design, rng):
        return rng.normal(size=(np.shape(thetas)[0], self.dim))

    def log_likelihood(self, y, theta, design):
        y = np.asarray(y, dtype=np.float64)
        shape = np.broadcast_shapes(y.shape[:-1], np.shape(theta)[:-1])
        return np.broadcast_to(np.sum(norm.logpdf(y), axis=-1), shape)

    def dim_y(self, design):
        return self.dim


MODELS = {
    'toy': ToyModel,
    'ricker': RickerModel,
    'aphid': AphidModel,
    'gaussian': GaussianLocationModel,
    'null': NullModel,
}


def model_from_config(name, **params) -> SimulationModel:
    """Construct a model by name.

    :raise ConfigError: for an unknown name or parameter.
    """
    cls = MODELS.get(name)
    if cls is None:
        raise ConfigError(f'unknown model {name!r}, expected one of {sorted(MODELS)}', 'model.name')
    try:
        return cls(**params)
    except TypeError as ex:
        raise ConfigError(str(ex), 'model') from ex
