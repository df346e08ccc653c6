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

"""Result writers.

JSON is UTF-8 with sorted keys and two-space indent.  CSV floats use 17
significant digits so every double reads back exactly.  All files use LF
line endings.
"""

from .error import ArgumentError
import csv
import io
import json
import logging
import numbers
import numpy as np
import os
import sys

log = logging.getLogger(__name__)


FLOAT_FORMAT = '%.17g'
ARGMAX_PREFIX = '# argmax: '


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f'{type(obj).__name__} is not JSON serializable')


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + '\n'


def write_json(obj, path=None):
    """Write obj as JSON to path, or to standard output when path is None."""
    s = dumps_json(obj)
    if path is None:
        sys.stdout.write(s)
        sys.stdout.flush()
        return
    _makedirs(path)
    with open(path, 'wt', encoding='utf-8', newline='\n') as f:
        f.write(s)
    log.info('wrote %s', path)


def _makedirs(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def format_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return FLOAT_FORMAT % float(value)
    return str(value)


def write_csv(header, rows, path=None, footer=None):
    """Write rows under header with 17 significant digit floats.

    :param header: The column names.
    :param rows: Iterable of row sequences.
    :param path: The output path, or None for standard output.
    :param footer: Optional comment lines written verbatim after the rows.
    """
    buf = io.StringIO(newline='')
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ArgumentError(f'row has {len(row)} cells, header has {len(header)}')
        w.writerow([format_cell(v) for v in row])
    for line in footer or []:
        buf.write(line + '\n')
    if path is None:
        sys.stdout.write(buf.getvalue())
        sys.stdout.flush()
        return
    _makedirs(path)
    with open(path, 'wt', encoding='utf-8', newline='') as f:
        f.write(buf.getvalue())
    log.info('wrote %s', path)


def _design_cells(design, k):
    return list(design) + [None] * (k - len(design))


def sweep_table(result, kind, seed):
    """The (header, rows, footer) of a design sweep."""
    k = max(len(d) for d, _ in result.rows)
    header = [f'design_{i + 1}' for i in range(k)] + ['estimator', 'value', 'std_error', 'n_sims', 'seed']
    rows = []
    for design, est in result.rows:
        rows.append(_design_cells(design, k) + [getattr(kind, 'value', kind), float(est.value),
                                                float(est.std_error), int(est.n_sims), int(seed)])
    design = ','.join(format_cell(v) for v in result.argmax_design)
    footer = [f'{ARGMAX_PREFIX}design={design} value={FLOAT_FORMAT % result.argmax_value}']
    return header, rows, footer


def write_sweep_csv(result, kind, seed, path=None):
    header, rows, footer = sweep_table(result, kind, seed)
    write_csv(header, rows, path, footer)


def read_sweep_csv(path):
    """Read a sweep CSV back.

    :return: dict with 'rows' as (design, value, std_error) tuples and
        'argmax' as the (design, value) recorded in the trailing comment.
    """
    rows = []
    argmax = None
    with open(path, 'rt', encoding='utf-8', newline='') as f:
        lines = f.read().split('\n')
    body = [line for line in lines if line and not line.startswith('#')]
    for line in lines:
        if line.startswith(ARGMAX_PREFIX):
            design_part, value_part = line[len(ARGMAX_PREFIX):].split(' ')
            design = tuple(float(v) for v in design_part[len('design='):].split(','))
            argmax = (design, float(value_part[len('value='):]))
    reader = csv.DictReader(body)
    k = sum(1 for name in reader.fieldnames if name.startswith('design_'))
    for r in reader:
        design = tuple(float(r[f'design_{i + 1}']) for i in range(k) if r[f'design_{i + 1}'] != '')
        rows.append((design, float(r['value']), float(r['std_error'])))
    return {'rows': rows, 'argmax': argmax}


def trace_path(path) -> str:
    """The SPSA trace sidecar path: ``<stem>_trace.csv`` next to path."""
    stem, _ = os.path.splitext(path)
    return stem + '_trace.csv'


def write_trace_csv(trace, path=None):
    k = len(trace[0]['design']) if trace else 0
    header = ['iteration'] + [f'design_{i + 1}' for i in range(k)] + ['utility']
    rows = [[t['iteration']] + list(t['design']) + [t['utility']] for t in trace]
    write_csv(header, rows, path)
