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
from pylbkld.error import ConfigError, DivergenceError
from pylbkld.estimators import estimate
from pylbkld.io import trace_path, write_json, write_trace_csv
from pylbkld.optimize import spsa_optimize
from pylbkld.rng import Stream
import logging

log = logging.getLogger(__name__)


def parser_config(p):
    """Optimize a time_box design by SPSA."""
    add_common_arguments(p)
    return on_cmd


def on_cmd(args):
    cfg = config_from_args(args)
    if cfg.design.kind != 'time_box':
        raise ConfigError(f'optimize needs a time_box design, got {cfg.design.kind}', 'design.kind')
    if not cfg.output_path:
        raise ConfigError('optimize writes a trace sidecar and needs an output path', 'output_path')
    model = cfg.model.build()
    est_cfg = cfg.estimator_config()
    stream = Stream(cfg.seed)
    sidecar = trace_path(cfg.output_path)
    workers = cfg.resolved_workers()
    try:
        design, trace = spsa_optimize(model, cfg.design, cfg.estimator, est_cfg, stream.child(0), cfg.spsa,
                                      workers=workers)
    except DivergenceError as ex:
        write_trace_csv(ex.trace or [], sidecar)
        raise

    # all scored designs share one stream
    final = estimate(cfg.estimator, model, design, est_cfg, stream.child(1), workers=workers)
    compare = [estimate(cfg.estimator, model, d, est_cfg, stream.child(1), workers=workers).to_dict()
               for d in cfg.spsa.compare]
    result = {
        'design': list(design),
        'estimate': final.to_dict(),
        'compare': compare,
        'iterations': len(trace),
        'seed': cfg.seed,
        'trace_path': sidecar,
    }
    write_trace_csv(trace, sidecar)
    write_json(result, cfg.output_path)
    write_json(result)
    return 0
