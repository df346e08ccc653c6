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

"""Test the result writers."""

from pylbkld.io import dumps_json, format_cell, read_sweep_csv, trace_path, write_csv, write_json, \
    write_sweep_csv, write_trace_csv
from pylbkld.optimize import SweepResult
from pylbkld.structs import EstimatorKind, UtilityEstimate
import json
import numpy as np
import os
import shutil
import tempfile
import unittest


class TestIo(unittest.TestCase):

    def setUp(self):
        self._dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self._dir, ignore_errors=True)

    def _path(self, name):
        return os.path.join(self._dir, name)

    def test_format_cell(self):
        self.assertEqual('0.10000000000000001', format_cell(0.1))
        self.assertEqual('21', format_cell(21.0))
        self.assertEqual('7', format_cell(np.int64(7)))
        self.assertEqual('', format_cell(None))
        self.assertEqual('true', format_cell(True))
        self.assertEqual('lbkld', format_cell('lbkld'))
        self.assertEqual(0.1, float(format_cell(0.1)))

    def test_json(self):
        s = dumps_json({'b': np.float64(0.5), 'a': np.arange(2)})
        self.assertEqual('{\n  "a": [\n    0,\n    1\n  ],\n  "b": 0.5\n}\n', s)
        path = self._path('sub/out.json')
        write_json({'x': 1}, path)
        with open(path, 'rb') as f:
            raw = f.read()
        self.assertNotIn(b'\r', raw)
        self.assertEqual({'x': 1}, json.loads(raw))

    def test_csv_lf(self):
        path = self._path('t.csv')
        write_csv(['a', 'b'], [[1, 0.5], [2, None]], path, footer=['# end'])
        with open(path, 'rb') as f:
            self.assertEqual(b'a,b\n1,0.5\n2,\n# end\n', f.read())

    def test_sweep_round_trip(self):
        rows = [((1, 2), UtilityEstimate((1, 2), EstimatorKind.LBKLD_PARTITION, 0.3, 0.01, 60, 2)),
                ((1, 3), UtilityEstimate((1, 3), EstimatorKind.LBKLD_PARTITION, 0.1 + 0.2, 0.02, 60, 2)),
                ((2, 3), UtilityEstimate((2, 3), EstimatorKind.LBKLD_PARTITION, -1.0 / 3, 0.02, 60, 2))]
        result = SweepResult(rows=rows, argmax_design=(1, 3), argmax_value=0.1 + 0.2)
        path = self._path('sweep.csv')
        write_sweep_csv(result, EstimatorKind.LBKLD_PARTITION, 42, path)
        with open(path, 'rt') as f:
            lines = f.read().split('\n')
        self.assertEqual('design_1,design_2,estimator,value,std_error,n_sims,seed', lines[0])
        self.assertEqual('1,3,lbkld_partition,0.30000000000000004,0.02,60,42', lines[2])
        self.assertTrue(lines[4].startswith('# argmax: '))
        back = read_sweep_csv(path)
        self.assertEqual(3, len(back['rows']))
        self.assertEqual(-1.0 / 3, back['rows'][2][1])
        best = max(back['rows'], key=lambda r: r[1])
        self.assertEqual(((1.0, 3.0), 0.1 + 0.2), back['argmax'])
        self.assertEqual(back['argmax'], (best[0], best[1]))

    def test_trace(self):
        self.assertEqual(os.path.join('out', 'run_trace.csv'), trace_path(os.path.join('out', 'run.json')))
        path = self._path('trace.csv')
        write_trace_csv([{'iteration': 0, 'design': (1.0, 2.0), 'utility': 0.25}], path)
        with open(path, 'rt') as f:
            self.assertEqual('iteration,design_1,design_2,utility\n0,1,2,0.25\n', f.read())
