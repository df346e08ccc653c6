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

from .error import LbkldError, DomainError, ArgumentError, ConfigError, InfeasibleConstraintError, \
    CapabilityError, DivergenceError
from .structs import EstimatorKind, EntropyEstimate, PartitionResult, UtilityEstimate, InferenceResult
from .rng import Stream, substream
from .models import SimulationModel, ToyModel, RickerModel, AphidModel, GaussianLocationModel, NullModel, \
    model_from_config
from .entropy import knn_entropy
from .partition import constrained_kmeans, partition_prior
from .estimators import LbkldConfig, NestedMcConfig, AbcConfig, lbkld_estimate, lbkld_nopartition, \
    nested_mc_kld, abc_rejection, d_posterior_precision, estimate, replicate_inference
from .optimize import DesignSpec, SpsaConfig, sweep, spsa_optimize
from .config import RunConfig, load_config
from .version import *

__all__ = [__version__, EstimatorKind, UtilityEstimate, Stream, SimulationModel, ToyModel, RickerModel,
           AphidModel, GaussianLocationModel, NullModel, knn_entropy, constrained_kmeans, partition_prior,
           lbkld_estimate, lbkld_nopartition, nested_mc_kld, abc_rejection, d_posterior_precision,
           estimate, replicate_inference, sweep, spsa_optimize, DesignSpec, SpsaConfig, RunConfig,
           load_config]
