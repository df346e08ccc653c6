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

"""Test the expected-utility estimators."""

from pylbkld.error import ArgumentError, CapabilityError, ConfigError
from pylbkld.estimators import AbcConfig, AbcPool, LbkldConfig, NestedMcConfig, abc_rejection, \
    d_posterior_precision, estimate, lbkld_estimate, lbkld_nopartition, nested_mc_kld, posterior_moments, \
    posterior_summary, replicate_inference, simulate_pool
from pylbkld.entry_points.posterior import posterior_samples
from pylbkld.models import APHID_REFERENCE_DESIGNS, AphidModel, GaussianLocationModel, NullModel, RickerModel, \
    SimulationModel, ToyModel
from pylbkld.partition import partition_prior
from pylbkld.rng import Stream, substream
from pylbkld.structs import EstimatorKind, PartitionResult
from dataclasses import dataclass
import numpy as np
import os
import unittest
from unittest import mock

SLOW = os.environ.get('PYLBKLD_SLOW_TESTS') == '1'


@dataclass(frozen=True)
class IdentityModel(SimulationModel):
    """y = theta exactly."""
    name = 'identity'

    def prior_sample_n(self, rng, n):
        return rng.normal(size=(n, 1))

    def prior_mean(self):
        return np.zeros(1)

    def simulate_batch(self, thetas, design, rng):
        return np.array(thetas, dtype=np.float64)

    def dim_y(self, design):
        return 1


@dataclass(frozen=True)
class PointMassModel(SimulationModel):
    """A degenerate prior at zero."""
    name = 'point_mass'

    def prior_sample_n(self, rng, n):
        return np.zeros((n, 1))

    def prior_mean(self):
        return np.zeros(1)

    def simulate_batch(self, thetas, design, rng):
        return rng.normal(size=(np.shape(thetas)[0], 1))

    def dim_y(self, design):
        return 1


@dataclass(frozen=True)
class LatticeModel(SimulationModel):
    """y = theta with theta uniform on {0, ..., 5}; the information gain is log 6."""
    name = 'lattice'

    def prior_sample_n(self, rng, n):
        return rng.integers(0, 6, size=(n, 1)).astype(np.float64)

    def prior_mean(self):
        return np.array([2.5])

    def simulate_batch(self, thetas, design, rng):
        return np.array(thetas, dtype=np.float64)

    def dim_y(self, design):
        return 1

    def integer_mask(self, design):
        return np.ones(1, dtype=bool)


def relabeled_partition(theta, y_star, L, n_min, rng):
    part = partition_prior(theta, y_star, L, n_min, rng)
    return PartitionResult(labels=L + 1 - part.labels, groups=part.groups[::-1], counts=part.counts[::-1],
                           weights=part.weights[::-1])


class TestLbkld(unittest.TestCase):

    def setUp(self):
        self.cfg = LbkldConfig(n=500, L=2, n_min=10, replications=3)

    def test_deterministic(self):
        a = lbkld_estimate(ToyModel(), (5.0,), self.cfg, 11)
        b = lbkld_estimate(ToyModel(), (5.0,), self.cfg, Stream(11))
        self.assertEqual(a.value, b.value)
        self.assertEqual(a.std_error, b.std_error)
        c = lbkld_estimate(ToyModel(), (5.0,), self.cfg, 12)
        self.assertNotEqual(a.value, c.value)

    def test_accounting(self):
        est = lbkld_estimate(ToyModel(), (5.0,), self.cfg, 1)
        self.assertEqual(3 * 500 * 3, est.n_sims)
        self.assertEqual(3, est.replications)
        self.assertEqual(EstimatorKind.LBKLD_PARTITION, est.kind)
        self.assertEqual((5.0,), est.design)
        self.assertTrue(np.isfinite(est.value))
        self.assertGreater(est.std_error, 0.0)

    def test_single_group_matches_nopartition(self):
        cfg = LbkldConfig(n=400, L=1, n_min=1, replications=2)
        a = lbkld_estimate(ToyModel(), (10.0,), cfg, 3)
        b = lbkld_nopartition(ToyModel(), (10.0,), cfg, 3)
        self.assertEqual(a.value, b.value)
        self.assertEqual(EstimatorKind.LBKLD_NOPARTITION, b.kind)

    def test_workers_do_not_change_result(self):
        a = lbkld_estimate(ToyModel(), (5.0,), self.cfg, 4, workers=1)
        b = lbkld_estimate(ToyModel(), (5.0,), self.cfg, 4, workers=2)
        self.assertEqual(a.value, b.value)

    def test_gaussian_equality_case(self):
        m = GaussianLocationModel()
        cfg = LbkldConfig(n=2000, L=1, n_min=1, replications=5)
        est = lbkld_estimate(m, (), cfg, 5)
        self.assertLess(abs(est.value - m.expected_information_gain()), 0.06)

    def test_null_model_is_zero(self):
        cfg = LbkldConfig(n=2000, L=1, n_min=1, replications=5)
        est = lbkld_estimate(NullModel(), (), cfg, 6)
        self.assertLess(abs(est.value), 0.06)

    def test_ricker_integer_statistic(self):
        cfg = LbkldConfig(n=300, L=2, n_min=20, replications=2)
        est = lbkld_estimate(RickerModel(), (1, 2), cfg, 7)
        self.assertTrue(np.isfinite(est.value))
        self.assertEqual(3 * 300 * 2, est.n_sims)

    def test_lattice_outputs_stay_below_gain(self):
        # y* = theta + U is Uniform(-0.5, 5.5); z = U - U' is triangular on [-1, 1] with entropy 1/2
        cfg = LbkldConfig(n=5000, L=1, n_min=1, replications=5)
        est = lbkld_estimate(LatticeModel(), (), cfg, 8)
        expect = np.log(6.0) - 0.5 + 0.5 * np.log(2.0)
        self.assertLess(abs(est.value - expect), 0.05)
        self.assertLess(est.value, np.log(6.0))

    def test_cluster_labels_do_not_change_value(self):
        cfg = LbkldConfig(n=600, L=3, n_min=20, replications=2)
        expect = lbkld_estimate(ToyModel(), (5.0,), cfg, 9)
        with mock.patch('pylbkld.estimators.partition_prior', side_effect=relabeled_partition) as fn:
            actual = lbkld_estimate(ToyModel(), (5.0,), cfg, 9)
        self.assertEqual(2, fn.call_count)
        self.assertAlmostEqual(expect.value, actual.value, places=12)

    def test_config_errors(self):
        for cfg in [LbkldConfig(n=1), LbkldConfig(L=0), LbkldConfig(n_min=3, k_nn=3),
                    LbkldConfig(n=40, L=5, n_min=10), LbkldConfig(replications=0),
                    LbkldConfig(jitter_scale=-1.0)]:
            with self.assertRaises(ConfigError):
                cfg.validate()

    def test_design_domain(self):
        with self.assertRaises(ValueError):
            lbkld_estimate(ToyModel(), (1.0,), self.cfg, 0)

    @unittest.skipUnless(SLOW, 'set PYLBKLD_SLOW_TESTS=1')
    def test_bound_below_nested(self):
        m = ToyModel()
        cfg = LbkldConfig(n=10000, L=5, n_min=10, replications=20)
        for d in [2.0, 5.0, 10.0, 20.0, 50.0, 100.0]:
            lb = lbkld_estimate(m, (d,), cfg, 1)
            lb1 = lbkld_nopartition(m, (d,), cfg, 1)
            ref = nested_mc_kld(m, (d,), NestedMcConfig(n=20000, n_inner=1000), 2)
            se = np.hypot(lb.std_error, ref.std_error)
            self.assertLessEqual(lb.value, ref.value + 2 * se, f'd={d}')
            self.assertGreaterEqual(lb.value, lb1.value - 2 * np.hypot(lb.std_error, lb1.std_error), f'd={d}')


class TestNestedMc(unittest.TestCase):

    def test_gaussian(self):
        m = GaussianLocationModel()
        est = nested_mc_kld(m, (), NestedMcConfig(n=4000, n_inner=500), 1)
        self.assertLess(abs(est.value - m.expected_information_gain()), 0.05)
        self.assertGreater(est.std_error, 0.0)
        self.assertEqual(4000, est.n_sims)
        self.assertEqual(EstimatorKind.NESTED_MC_KLD, est.kind)

    def test_replications(self):
        est = nested_mc_kld(GaussianLocationModel(), (), NestedMcConfig(n=200, n_inner=100, replications=3), 1)
        self.assertEqual(3, est.replications)
        self.assertEqual(600, est.n_sims)

    def test_deterministic(self):
        cfg = NestedMcConfig(n=200, n_inner=100)
        a = nested_mc_kld(ToyModel(), (5.0,), cfg, 2)
        b = nested_mc_kld(ToyModel(), (5.0,), cfg, 2)
        self.assertEqual(a.value, b.value)

    def test_no_likelihood(self):
        with self.assertRaises(CapabilityError):
            nested_mc_kld(RickerModel(), (1, 2), NestedMcConfig(n=10, n_inner=10), 0)

    @unittest.skipUnless(SLOW, 'set PYLBKLD_SLOW_TESTS=1')
    def test_gaussian_equality_full(self):
        m = GaussianLocationModel()
        lb = lbkld_estimate(m, (), LbkldConfig(n=5000, L=1, n_min=1, replications=20), 1)
        ref = nested_mc_kld(m, (), NestedMcConfig(n=10000, n_inner=1000), 2)
        u = m.expected_information_gain()
        self.assertLess(abs(lb.value - u), 0.05)
        self.assertLess(abs(ref.value - u), 0.05)
        self.assertLess(abs(lb.value - ref.value), 2 * np.hypot(lb.std_error, ref.std_error))


class TestAbc(unittest.TestCase):

    def test_rejection_nearest(self):
        pool = AbcPool(theta=np.arange(10.0)[:, np.newaxis], y=np.arange(10.0)[:, np.newaxis])
        accepted = abc_rejection(None, (), [3.2], AbcConfig(n_sim=10, n_keep=3), pool)
        np.testing.assert_array_equal([[3.0], [4.0], [2.0]], accepted)

    def test_rejection_ties_keep_lower_index(self):
        pool = AbcPool(theta=np.arange(4.0)[:, np.newaxis], y=np.array([[1.0], [0.0], [2.0], [1.0]]))
        accepted = abc_rejection(None, (), [1.0], AbcConfig(n_sim=4, n_keep=2), pool)
        np.testing.assert_array_equal([[0.0], [3.0]], accepted)

    def test_rejection_drops_constant_coordinate(self):
        y = np.column_stack([np.arange(5.0), np.zeros(5)])
        pool = AbcPool(theta=np.arange(5.0)[:, np.newaxis], y=y)
        accepted = abc_rejection(None, (), [2.0, 100.0], AbcConfig(n_sim=5, n_keep=1), pool)
        np.testing.assert_array_equal([[2.0]], accepted)

    def test_rejection_too_many(self):
        pool = AbcPool(theta=np.zeros((5, 1)), y=np.zeros((5, 1)))
        with self.assertRaises(ConfigError):
            abc_rejection(None, (), [0.0], AbcConfig(n_sim=10, n_keep=6), pool)

    def test_summary(self):
        x = substream(1).normal(size=(5000, 2))
        mean, cov = posterior_summary(x)
        np.testing.assert_allclose([0, 0], mean, atol=0.05)
        np.testing.assert_allclose(np.eye(2), cov, atol=0.05)
        _, cov1 = posterior_summary(x[:, 0])
        self.assertEqual((1, 1), cov1.shape)
        with self.assertRaises(ArgumentError):
            posterior_summary(x[:1])

    def test_moments(self):
        m = posterior_moments(substream(2).normal(size=(20000, 2)))
        np.testing.assert_allclose([1, 1], m['sd'], atol=0.03)
        np.testing.assert_allclose([0, 0], m['skewness'], atol=0.1)
        np.testing.assert_allclose([0, 0], m['excess_kurtosis'], atol=0.15)

    def test_d_posterior(self):
        cfg = AbcConfig(n_sim=2000, n_keep=50, n_outer=10)
        est = d_posterior_precision(ToyModel(), (5.0,), cfg, 3)
        self.assertEqual(EstimatorKind.D_POSTERIOR_PRECISION, est.kind)
        self.assertEqual(2010, est.n_sims)
        self.assertGreater(est.value, 0.0)
        self.assertEqual([], est.flags)
        again = d_posterior_precision(ToyModel(), (5.0,), cfg, 3)
        self.assertEqual(est.value, again.value)

    def test_d_posterior_fresh_pools(self):
        cfg = AbcConfig(n_sim=200, n_keep=20, n_outer=3, reuse_pool=False)
        est = d_posterior_precision(ToyModel(), (5.0,), cfg, 4)
        self.assertEqual(3 * 201, est.n_sims)

    def test_d_posterior_det_floor(self):
        cfg = AbcConfig(n_sim=100, n_keep=10, n_outer=2)
        est = d_posterior_precision(PointMassModel(), (), cfg, 5)
        self.assertEqual(['det_floor'], est.flags)
        self.assertEqual(1e300, est.value)
        self.assertIn('flags', est.to_dict())

    def test_pool(self):
        pool = simulate_pool(ToyModel(), (5.0,), 100, substream(6))
        self.assertEqual(100, pool.n_sim)
        self.assertEqual((100, 1), pool.y.shape)


class TestReplicateInference(unittest.TestCase):

    def test_identity_model(self):
        cfg = AbcConfig(n_sim=20000, n_keep=1)
        result = replicate_inference(IdentityModel(), (), cfg, 20, 1)
        self.assertEqual(20, result.trials)
        self.assertEqual((20, 1), result.posterior_mean.shape)
        self.assertLess(float(result.mse[0]), 1e-4)

    def test_shared_truth_across_designs(self):
        cfg = AbcConfig(n_sim=500, n_keep=20)
        a = replicate_inference(ToyModel(), (5.0,), cfg, 5, 2)
        b = replicate_inference(ToyModel(), (50.0,), cfg, 5, 2)
        np.testing.assert_array_equal(a.theta_true, b.theta_true)

    def test_trials(self):
        with self.assertRaises(ConfigError):
            replicate_inference(ToyModel(), (5.0,), AbcConfig(n_sim=10, n_keep=1), 0, 0)


class TestEstimate(unittest.TestCase):

    def test_dispatch(self):
        cfg = LbkldConfig(n=300, L=1, n_min=1, replications=2)
        a = estimate('lbkld_partition', ToyModel(), (5.0,), cfg, 1)
        b = lbkld_estimate(ToyModel(), (5.0,), cfg, 1)
        self.assertEqual(a.value, b.value)
        est = estimate(EstimatorKind.NESTED_MC_KLD, ToyModel(), (5.0,), NestedMcConfig(n=50, n_inner=20), 1)
        self.assertEqual(EstimatorKind.NESTED_MC_KLD, est.kind)

    def test_unknown(self):
        with self.assertRaises(ConfigError):
            estimate('bogus', ToyModel(), (5.0,), LbkldConfig(), 1)


class TestPosteriorShape(unittest.TestCase):

    def setUp(self):
        self.abc = AbcConfig(n_sim=100000, n_keep=1000)

    def test_toy_bimodal_at_d5(self):
        _, accepted = posterior_samples(ToyModel(), (5.0,), self.abc, [0.5], Stream(2))
        counts, _ = np.histogram(accepted[:, 0], bins=20, range=(0.0, 1.0))
        # G(theta, 5) peaks at theta = 0.2, so one mode lies on each side
        low = int(np.argmax(counts[:4]))
        high = 4 + int(np.argmax(counts[4:]))
        smaller = min(counts[low], counts[high])
        self.assertGreater(smaller, 0)
        self.assertLess(counts[low:high + 1].min(), 0.5 * smaller)

    def test_toy_spread_grows_with_d(self):
        iqr = []
        for d in (5.0, 100.0):
            _, accepted = posterior_samples(ToyModel(), (d,), self.abc, [0.5], Stream(2))
            q25, q75 = np.percentile(accepted[:, 0], [25, 75])
            iqr.append(q75 - q25)
        self.assertGreaterEqual(iqr[1], 1.5 * iqr[0])

    @unittest.skipUnless(SLOW, 'set PYLBKLD_SLOW_TESTS=1')
    def test_aphid_near_gaussian(self):
        m = AphidModel()
        design = APHID_REFERENCE_DESIGNS['lbkld'][4]
        _, accepted = posterior_samples(m, design, self.abc, m.prior_mean(), Stream(6))
        moments = posterior_moments(accepted)
        self.assertTrue(np.all(np.abs(moments['skewness']) < 0.5), moments['skewness'])
        self.assertTrue(np.all(np.abs(moments['excess_kurtosis']) < 1.0), moments['excess_kurtosis'])


class TestRickerInference(unittest.TestCase):

    @unittest.skipUnless(SLOW, 'set PYLBKLD_SLOW_TESTS=1')
    def test_mse_by_design(self):
        cfg = AbcConfig(n_sim=10000, n_keep=100)
        a = replicate_inference(RickerModel(), (1, 2), cfg, 200, 4)
        b = replicate_inference(RickerModel(), (2, 3), cfg, 200, 4)
        np.testing.assert_array_equal(a.theta_true, b.theta_true)
        self.assertLess(a.mse[0], b.mse[0])
        self.assertLess(a.mse[1], b.mse[1])
        self.assertLess(abs(a.mse[2] - b.mse[2]), 0.25 * max(a.mse[2], b.mse[2]))
