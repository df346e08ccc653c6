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
from pylbkld.estimators import estimate
from pylbkld.io import write_json
from pylbkld.rng import Stream
import logging

log = logging.getLogger(__name__)


def parser_config(p):
    """Estimate the expected utility at one design point."""
    add_common_arguments(p)
    return on_cmd


def on_cmd(args):
    cfg = config_from_args(args)
    if cfg.design.kind != 'point':
        raise ConfigError(f'utility needs a point design, got {cfg.design.kind}', 'design.kind')
    model = cfg.model.build()
    # design index 0, the same stream as the first row of a sweep
    est = estimate(cfg.estimator, model, cfg.design.value, cfg.estimator_config(),
                   Stream(cfg.seed).child(0), workers=cfg.resolved_workers())
    result = est.to_dict(seed=cfg.seed)
    write_json(result)
    if cfg.output_path:
        write_json(result, cfg.output_path)
    return 0
