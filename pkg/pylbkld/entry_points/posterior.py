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
from pylbkld.estimators import abc_rejection, posterior_moments, simulate_pool
from pylbkld.io import write_csv, write_json
from pylbkld.rng import Stream
import logging
import numpy as np
import os

log = logging.getLogger(__name__)


def parser_config(p):
    """Sample one ABC posterior and summarize its shape."""
    add_common_arguments(p)
    return on_cmd


def posterior_samples(model, design, abc, theta_true, stream):
    """The accepted ABC samples for data simulated at theta_true.

    The pool draws from ``stream.child(0)`` and y_obs from ``stream.child(1)``.
    """
    design = model.validate_design(design)
    y_obs = model.simulate(theta_true, design, stream.child(1).generator())
    pool = simulate_pool(model, design, abc.n_sim, stream.child(0).generator())
    return y_obs, abc_rejection(model, design, y_obs, abc, pool)


def on_cmd(args):
    cfg = config_from_args(args)
    if cfg.design.kind != 'point':
        raise ConfigError(f'posterior needs a point design, got {cfg.design.kind}', 'design.kind')
    model = cfg.model.build()
    if cfg.posterior.theta_true:
        theta_true = np.array(cfg.posterior.theta_true, dtype=np.float64)
    else:
        theta_true = model.prior_mean()
    y_obs, accepted = posterior_samples(model, cfg.design.value, cfg.abc, theta_true, Stream(cfg.seed))
    moments = posterior_moments(accepted)
    q25, q75 = np.percentile(accepted, [25, 75], axis=0)
    summary = {
        'design': list(model.validate_design(cfg.design.value)),
        'theta_true': theta_true,
        'y_obs': y_obs,
        'n_keep': int(accepted.shape[0]),
        'iqr': q75 - q25,
        'seed': cfg.seed,
        **moments,
    }
    header = [f'theta_{i + 1}' for i in range(accepted.shape[1])]
    write_csv(header, accepted.tolist(), cfg.output_path)
    if cfg.output_path:
        stem, _ = os.path.splitext(cfg.output_path)
        write_json(summary, stem + '_summary.json')
        write_json(summary)
    return 0
