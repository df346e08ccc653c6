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

"""Prior partition by size-constrained k-means on the simulated outputs."""

from .error import ArgumentError, InfeasibleConstraintError
from .rng import child_seed
from .structs import PartitionResult
import logging
import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import kmeans_plusplus

log = logging.getLogger(__name__)


MAX_ITER = 100


def _sse(x, labels, centers):
    return float(np.sum((x - centers[labels]) ** 2))


def _means(x, labels, L):
    counts = np.bincount(labels, minlength=L)
    sums = np.zeros((L, x.shape[1]))
    np.add.at(sums, labels, x)
    return sums / counts[:, np.newaxis]


def _constrained_assign(x, centers, n_min):
    """Nearest-centroid assignment, then empty and undersized cluster repair.

    :return: (labels, centers) where centers may hold reseeded rows.
    """
    n, L = x.shape[0], centers.shape[0]
    centers = centers.copy()
    d2 = cdist(x, centers, 'sqeuclidean')
    labels = np.argmin(d2, axis=1)
    counts = np.bincount(labels, minlength=L)
    rows = np.arange(n)

    for c in np.flatnonzero(counts == 0):
        own = d2[rows, labels].copy()
        own[counts[labels] <= 1] = -np.inf
        i = int(np.argmax(own))
        centers[c] = x[i]
        d2[:, c] = np.sum((x - x[i]) ** 2, axis=1)
        counts[labels[i]] -= 1
        labels[i] = c
        counts[c] += 1

    while True:
        deficient = np.flatnonzero(counts < n_min)
        if not deficient.size:
            break
        c = deficient[np.argmin(counts[deficient])]
        cost = d2[:, c] - d2[rows, labels]
        cost[(labels == c) | (counts[labels] <= n_min)] = np.inf
        i = int(np.argmin(cost))
        counts[labels[i]] -= 1
        labels[i] = c
        counts[c] += 1
    return labels, centers


def constrained_kmeans(points, L, n_min, rng: np.random.Generator, max_iter=MAX_ITER, history=None):
    """Cluster points into L groups of at least n_min members each.

    Lloyd iterations with k-means++ seeding.  The assignment step assigns
    each point to its nearest centroid, reseeds empty clusters at the point
    farthest from its centroid, then moves into each undersized cluster the
    outside point with the smallest squared-distance cost increase, never
    taking a point from a cluster already at n_min.  A step whose assignment
    would raise the within-cluster sum of squares is rejected and ends the
    iteration, so the recorded objective never increases.

    :param points: The (n, dim) points.
    :param L: The number of clusters.
    :param n_min: The minimum cluster size.
    :param rng: The generator for the seeding.
    :param max_iter: The iteration cap.
    :param history: When a list, receives the objective after each iteration.
    :return: The length-n label vector with values in 1..L.
    :raise InfeasibleConstraintError: when n < L * max(n_min, 1).
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, np.newaxis]
    n = x.shape[0]
    L, n_min = int(L), int(n_min)
    if L < 1 or n_min < 0:
        raise InfeasibleConstraintError(f'need L >= 1 and n_min >= 0, got L={L}, n_min={n_min}', 'lbkld.L')
    if n < L * max(n_min, 1):
        raise InfeasibleConstraintError(f'n={n} samples cannot fill L={L} clusters of n_min={n_min}',
                                        'lbkld.n_min')
    if L == 1:
        if history is not None:
            history.append(_sse(x, np.zeros(n, dtype=np.int64), x.mean(axis=0, keepdims=True)))
        return np.ones(n, dtype=np.int64)

    centers, _ = kmeans_plusplus(x, n_clusters=L, random_state=child_seed(rng))
    labels, _ = _constrained_assign(x, centers, n_min)
    centers = _means(x, labels, L)
    sse = _sse(x, labels, centers)
    if history is not None:
        history.append(sse)
    for iteration in range(1, max_iter):
        candidate, used = _constrained_assign(x, centers, n_min)
        if np.array_equal(candidate, labels):
            log.debug('constrained_kmeans converged after %d iterations', iteration)
            break
        if _sse(x, candidate, used) > sse:
            log.debug('constrained_kmeans stopped at iteration %d: repair raised the objective', iteration)
            break
        labels = candidate
        centers = _means(x, labels, L)
        sse = _sse(x, labels, centers)
        if history is not None:
            history.append(sse)
    else:
        log.warning('constrained_kmeans hit the %d iteration cap', max_iter)
    return labels + 1


def partition_prior(theta, y_star, L, n_min, rng: np.random.Generator) -> PartitionResult:
    """Partition prior samples by clustering their paired outputs.

    :param theta: The (n, p) prior samples.
    :param y_star: The (n, dim) outputs, row-aligned with theta.
    :param L: The number of mixture components.
    :param n_min: The minimum component size.
    :param rng: The generator.
    :return: The :class:`PartitionResult`.
    """
    theta = np.asarray(theta)
    y_star = np.asarray(y_star)
    if theta.shape[0] != y_star.shape[0]:
        raise ArgumentError(f'theta has {theta.shape[0]} rows but y_star has {y_star.shape[0]}')
    n = y_star.shape[0]
    labels = constrained_kmeans(y_star, L, n_min, rng)
    groups = [np.flatnonzero(labels == label) for label in range(1, L + 1)]
    counts = np.array([len(g) for g in groups], dtype=np.int64)
    result = PartitionResult(labels=labels, groups=groups, counts=counts, weights=counts / n)
    log.debug('%s', result.info(verbose=True))
    return result
