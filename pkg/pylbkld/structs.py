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

from dataclasses import dataclass, field
import enum
from fractions import Fraction
import numpy as np


class EstimatorKind(str, enum.Enum):
    LBKLD_PARTITION = 'lbkld_partition'
    LBKLD_NOPARTITION = 'lbkld_nopartition'
    NESTED_MC_KLD = 'nested_mc_kld'
    D_POSTERIOR_PRECISION = 'd_posterior_precision'


@dataclass
class SampleBatch:
    """An (n, dim) block of simulated points and where it came from."""
    values: np.ndarray
    design: tuple = ()
    key: tuple = ()

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    n: int
    k: int
    dim: int


@dataclass
class PartitionResult:
    """Clustering of the joint samples into L prior mixture components.

    Labels are 1-based.  ``groups[l - 1]`` holds the ascending sample indices
    with label l and ``counts[l - 1]`` its size N(l).
    """
    labels: np.ndarray
    groups: list
    counts: np.ndarray
    weights: np.ndarray

    @property
    def L(self) -> int:
        return len(self.groups)

    @property
    def exact_weights(self) -> list:
        """The weights N(l) / n as fractions, summing to exactly 1."""
        n = int(np.sum(self.counts))
        return [Fraction(int(c), n) for c in self.counts]

    def info(self, verbose=None) -> str:
        strs = [f'partition: L={self.L}, n={len(self.labels)}']
        if verbose:
            for idx, (count, weight) in enumerate(zip(self.counts, self.weights)):
                strs.append(f'    {idx + 1}: N={count} w={weight:.6g}')
        return '\n'.join(strs)


@dataclass
class UtilityEstimate:
    design: tuple
    kind: EstimatorKind
    value: float
    std_error: float
    n_sims: int
    replications: int
    flags: list = field(default_factory=list)

    def to_dict(self, seed=None) -> dict:
        d = {
            'design': list(self.design),
            'kind': getattr(self.kind, 'value', self.kind),
            'value': float(self.value),
            'std_error': float(self.std_error),
            'n_sims': int(self.n_sims),
            'replications': int(self.replications),
        }
        if self.flags:
            d['flags'] = list(self.flags)
        if seed is not None:
            d['seed'] = int(seed)
        return d


@dataclass
class InferenceResult:
    """Posterior means from repeated ABC inference at one design.

    Row t holds trial t.
    """
    design: tuple
    theta_true: np.ndarray
    posterior_mean: np.ndarray

    @property
    def trials(self) -> int:
        return self.theta_true.shape[0]

    @property
    def mse(self) -> np.ndarray:
        """The per-coordinate mean squared error of the posterior means."""
        err = self.posterior_mean - self.theta_true
        return np.mean(err * err, axis=0)
