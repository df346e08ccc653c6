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

from pylbkld.config import add_common_arguments, config_from_args
from pylbkld.error import ConfigError
from pylbkld.io import write_sweep_csv
from pylbkld.optimize import sweep
from pylbkld.rng import Stream
import logging

log = logging.getLogger(__name__)


def parser_config(p):
    """Estimate the expected utility at every design of an enumerable space."""
    add_common_arguments(p)
    return on_cmd


def on_cmd(args):
    cfg = config_from_args(args)
    if not cfg.design.enumerable:
        raise ConfigError(f'time_box with k={cfg.design.k} is not enumerable, use optimize', 'design.k')
    model = cfg.model.build()
    result = sweep(model, cfg.design, cfg.estimator, cfg.estimator_config(), Stream(cfg.seed),
                   workers=cfg.resolved_workers())
    write_sweep_csv(result, cfg.estimator, cfg.seed, cfg.output_path)
    return 0
