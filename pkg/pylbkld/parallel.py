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

"""Order-preserving worker pool."""

from .error import ConfigError
import logging
import multiprocessing
import os

log = logging.getLogger(__name__)


WORKERS_ENV = 'LBKLD_WORKERS'


def default_workers() -> int:
    """The worker count from LBKLD_WORKERS, or 1."""
    value = os.environ.get(WORKERS_ENV)
    if value is None or not value.strip():
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise ConfigError(f'{WORKERS_ENV}={value!r} is not an integer', WORKERS_ENV)
    if workers < 1:
        raise ConfigError(f'{WORKERS_ENV} must be >= 1, got {workers}', WORKERS_ENV)
    return workers


def ordered_map(fn, items, workers=1) -> list:
    """Apply fn to every item and return results in item order.

    :param fn: A picklable callable.
    :param items: The work items, each carrying its own random stream key.
    :param workers: The process count.  1 runs in the calling process.
    """
    items = list(items)
    workers = min(int(workers or 1), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    log.info('dispatching %d items to %d workers', len(items), workers)
    with multiprocessing.Pool(processes=workers) as pool:
        return list(pool.imap(fn, items))
