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

"""Nearest-neighbor differential entropy estimation.

Uses the Kozachenko-Leonenko form with Euclidean k-th neighbor distances and
the unit-ball volume:

    H = psi(n) - psi(k) + log V_dim + (dim / n) sum_i log rho_i

All values are in nats.
"""

from .error import ArgumentError
from .structs import EntropyEstimate
import logging
import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from scipy.special import digamma, gammaln

log = logging.getLogger(__name__)


K_DEFAULT = 3
KDTREE_DIM_MAX = 10
KDTREE_LEAFSIZE = 16
RHO_FLOOR = 1e-12
_BRUTE_CHUNK = 1024


def _as_points(samples, k):
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, np.newaxis]
    if x.ndim != 2 or x.shape[1] < 1:
        raise ArgumentError(f'samples must be an (n, dim) matrix, got shape {x.shape}')
    k = int(k)
    if k < 1:
        raise ArgumentError(f'k must be positive, got {k}')
    if x.shape[0] <= k:
        raise ArgumentError(f'need n > k samples, got n={x.shape[0]}, k={k}')
    if not np.all(np.isfinite(x)):
        raise ArgumentError('samples contain non-finite entries')
    return x, k


def log_unit_ball_volume(dim: int) -> float:
    """log of pi^(dim/2) / Gamma(dim/2 + 1)."""
    return 0.5 * dim * np.log(np.pi) - gammaln(0.5 * dim + 1.0)


def _brute_distances(x, k):
    n = x.shape[0]
    rho = np.empty(n)
    for start in range(0, n, _BRUTE_CHUNK):
        stop = min(start + _BRUTE_CHUNK, n)
        dist = cdist(x[start:stop], x)
        dist[np.arange(stop - start), np.arange(start, stop)] = np.inf
        rho[start:stop] = np.partition(dist, k - 1, axis=1)[:, k - 1]
    return rho


def knn_distances(samples, k=K_DEFAULT, workers=1) -> np.ndarray:
    """Compute every sample's k-th nearest-neighbor distance, self excluded.

    A median-split kd-tree serves dim <= 10, a brute-force scan otherwise.

    :param samples: The (n, dim) points.
    :param k: The neighbor order.
    :param workers: The kd-tree query parallelism, -1 for all cores.
    :return: The length-n distance vector.
    """
    x, k = _as_points(samples, k)
    if x.shape[1] > KDTREE_DIM_MAX:
        log.debug('knn: brute force, n=%d, dim=%d', *x.shape)
        return _brute_distances(x, k)
    tree = cKDTree(x, leafsize=KDTREE_LEAFSIZE, balanced_tree=True)
    # the self match is one of the zero distances, so the (k+1)-th is the k-th neighbor
    dist, _ = tree.query(x, k=k + 1, workers=workers)
    return dist[:, k]


def knn_query(points, query_index, k=K_DEFAULT) -> float:
    """Exact k-th nearest-neighbor distance of one point, self excluded."""
    x, k = _as_points(points, k)
    query_index = int(query_index)
    dist = np.sqrt(np.sum((x - x[query_index]) ** 2, axis=1))
    dist = np.delete(dist, query_index)
    return float(np.partition(dist, k - 1)[k - 1])


def knn_entropy(samples, k=K_DEFAULT, workers=1) -> EntropyEstimate:
    """Estimate differential entropy from samples.

    Distances are floored at 1e-12 times the largest coordinate range so
    duplicate points keep the estimate finite.  Callers with lattice-valued
    data should :func:`jitter` first.

    :param samples: The (n, dim) samples with n > k.
    :param k: The neighbor order.
    :param workers: The kd-tree query parallelism.
    :return: The :class:`EntropyEstimate`.
    :raise ArgumentError: on n <= k or non-finite samples.
    """
    x, k = _as_points(samples, k)
    n, dim = x.shape
    rho = knn_distances(x, k, workers=workers)
    span = float(np.max(np.ptp(x, axis=0)))
    floor = RHO_FLOOR * (span if span > 0 else 1.0)
    rho = np.maximum(rho, floor)
    value = digamma(n) - digamma(k) + log_unit_ball_volume(dim) + dim * np.mean(np.log(rho))
    return EntropyEstimate(value=float(value), n=n, k=k, dim=dim)


def jitter(samples, scale, rng: np.random.Generator) -> np.ndarray:
    """Add independent Uniform(-scale/2, scale/2) noise.

    :param samples: The (n, dim) points.
    :param scale: The width, scalar or one per column.  Zero is the identity.
    :param rng: The generator.
    :return: A new (n, dim) array.
    """
    x = np.array(samples, dtype=np.float64)
    scale = np.asarray(scale, dtype=np.float64)
    if np.any(scale < 0):
        raise ArgumentError('jitter scale must be nonnegative')
    if not np.any(scale):
        return x
    return x + (rng.random(x.shape) - 0.5) * scale
