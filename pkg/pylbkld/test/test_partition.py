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

"""Test the constrained k-means prior partition."""

from pylbkld.error import ArgumentError, InfeasibleConstraintError
from pylbkld.models import ToyModel, sample_joint
from pylbkld.partition import constrained_kmeans, partition_prior
from pylbkld.rng import substream
import numpy as np
import os
import unittest

SLOW = os.environ.get('PYLBKLD_SLOW_TESTS') == '1'


def _random_instance(seed):
    rng = substream(seed)
    L = int(rng.integers(2, 6))
    n_min = int(rng.integers(1, 15))
    n = L * n_min + int(rng.integers(0, 200))
    dim = int(rng.integers(1, 4))
    # skewed blobs so the size constraint binds
    centers = rng.normal(scale=5.0, size=(L, dim))
    weights = rng.dirichlet(np.full(L, 0.3))
    labels = rng.choice(L, size=n, p=weights)
    return centers[labels] + rng.normal(size=(n, dim)), L, n_min


class TestConstrainedKmeans(unittest.TestCase):

    def _check(self, seed):
        x, L, n_min = _random_instance(seed)
        history = []
        labels = constrained_kmeans(x, L, n_min, substream(seed, 1), history=history)
        self.assertEqual((x.shape[0],), labels.shape)
        counts = np.bincount(labels, minlength=L + 1)[1:]
        self.assertEqual(0, np.bincount(labels)[0])
        self.assertTrue(np.all(counts >= n_min), f'seed {seed}: counts {counts} < {n_min}')
        self.assertTrue(np.all(np.diff(history) <= 1e-9 * max(history[0], 1.0)),
                        f'seed {seed}: objective increased {history}')
        again = constrained_kmeans(x, L, n_min, substream(seed, 1))
        np.testing.assert_array_equal(labels, again)

    def test_randomized(self):
        for seed in range(50):
            self._check(seed)

    @unittest.skipUnless(SLOW, 'set PYLBKLD_SLOW_TESTS=1')
    def test_randomized_1000(self):
        for seed in range(1000):
            self._check(seed)

    def test_separated_blobs(self):
        rng = substream(100)
        x = np.concatenate([rng.normal(loc=c, scale=0.1, size=(40, 2)) for c in (-10.0, 0.0, 10.0)])
        labels = constrained_kmeans(x, 3, 10, substream(101))
        for start in (0, 40, 80):
            self.assertEqual(1, len(np.unique(labels[start:start + 40])))
        self.assertEqual(3, len(np.unique(labels)))

    def test_constraint_binds(self):
        rng = substream(102)
        x = np.concatenate([rng.normal(loc=0.0, size=(95, 1)), rng.normal(loc=50.0, size=(5, 1))])
        labels = constrained_kmeans(x, 2, 20, substream(103))
        counts = np.bincount(labels)[1:]
        self.assertEqual(2, len(counts))
        self.assertTrue(np.all(counts >= 20))
        # the outliers share a group
        self.assertEqual(1, len(np.unique(labels[95:])))

    def test_single_group(self):
        labels = constrained_kmeans(np.arange(10.0), 1, 10, substream(0))
        np.testing.assert_array_equal(np.ones(10), labels)

    def test_exact_fit(self):
        x = substream(104).normal(size=(30, 2))
        labels = constrained_kmeans(x, 3, 10, substream(105))
        np.testing.assert_array_equal([10, 10, 10], np.bincount(labels)[1:])

    def test_infeasible(self):
        with self.assertRaises(InfeasibleConstraintError):
            constrained_kmeans(np.zeros((29, 1)), 3, 10, substream(0))

    def test_zero_n_min(self):
        x = substream(106).normal(size=(50, 1))
        labels = constrained_kmeans(x, 4, 0, substream(107))
        self.assertEqual(4, len(np.unique(labels)))


class TestPartitionPrior(unittest.TestCase):

    def test_groups_and_weights(self):
        rng = substream(200)
        theta = rng.random((200, 2))
        y = theta[:, :1] + 0.01 * rng.normal(size=(200, 1))
        part = partition_prior(theta, y, 4, 20, substream(201))
        self.assertEqual(4, part.L)
        self.assertEqual(200, sum(len(g) for g in part.groups))
        np.testing.assert_array_equal(np.arange(200), np.sort(np.concatenate(part.groups)))
        for label, group in enumerate(part.groups, start=1):
            self.assertTrue(np.all(part.labels[group] == label))
            self.assertTrue(np.all(np.diff(group) > 0))
        self.assertEqual(1, sum(part.exact_weights))
        self.assertAlmostEqual(1.0, float(np.sum(part.weights)))
        self.assertIn('L=4', part.info())

    def test_toy_groups_narrow_outputs(self):
        theta, batch = sample_joint(ToyModel(), (5.0,), 10000, substream(202))
        part = partition_prior(theta, batch.values, 5, 10, substream(203))
        total = float(np.var(batch.values))
        for group in part.groups:
            self.assertLess(float(np.var(batch.values[group])), total)

    def test_row_mismatch(self):
        with self.assertRaises(ArgumentError):
            partition_prior(np.zeros((10, 1)), np.zeros((9, 1)), 1, 1, substream(0))
