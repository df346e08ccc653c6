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
from pylbkld.estimators import replicate_inference
from pylbkld.io import write_csv, write_json
from pylbkld.rng import Stream
import logging

log = logging.getLogger(__name__)

NAME = 'replicate-infer'


def parser_config(p):
    """Repeat ABC inference on synthetic data and report posterior mean errors."""
    add_common_arguments(p)
    return on_cmd


def on_cmd(args):
    cfg = config_from_args(args)
    if cfg.design.kind != 'point':
        raise ConfigError(f'replicate-infer needs a point design, got {cfg.design.kind}', 'design.kind')
    model = cfg.model.build()
    result = replicate_inference(model, cfg.design.value, cfg.abc, cfg.infer.trials, Stream(cfg.seed),
                                 workers=cfg.resolved_workers())
    p = model.theta_dim
    header = ['trial'] + [f'theta_true_{i + 1}' for i in range(p)] + [f'posterior_mean_{i + 1}' for i in range(p)]
    rows = [[t] + list(result.theta_true[t]) + list(result.posterior_mean[t]) for t in range(result.trials)]
    rows.append(['mse'] + [None] * p + list(result.mse))
    write_csv(header, rows, cfg.output_path)
    summary = {
        'design': list(result.design),
        'trials': result.trials,
        'mse': result.mse,
        'seed': cfg.seed,
    }
    if cfg.output_path:
        write_json(summary)
    return 0
