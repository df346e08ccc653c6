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

"""Counter-based random streams keyed by logical work index.

Every work unit (replication, design row, trial, SPSA evaluation) derives
its own Philox stream from the run seed plus a tuple of integer keys, so
results never depend on scheduling order or worker count.
"""

from dataclasses import dataclass
import numpy as np


SEED_MASK = (1 << 64) - 1


def substream(seed, *key) -> np.random.Generator:
    """Construct the generator for one logical work unit.

    :param seed: The 64-bit run seed.
    :param key: Nonnegative integers identifying the work unit.
    :return: An independent :class:`numpy.random.Generator`.
    """
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(rng: np.random.Generator) -> int:
    """Draw a 32-bit integer seed for libraries that only accept legacy seeds."""
    return int(rng.integers(0, 2**32 - 1, dtype=np.uint64))


@dataclass(frozen=True)
class Stream:
    """A splittable handle on the substream tree of one run.

    :param seed: The 64-bit run seed.
    :param key: The path of logical indices from the root.
    """
    seed: int
    key: tuple = ()

    def child(self, *key) -> 'Stream':
        """The sub-stream at key appended to this path."""
        return Stream(self.seed, self.key + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        return substream(self.seed, *self.key)


def as_stream(stream) -> Stream:
    """Accept a :class:`Stream` or a bare integer seed."""
    if isinstance(stream, Stream):
        return stream
    return Stream(int(stream))
