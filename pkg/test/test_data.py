# coding=utf-8

# Copyright (C) 2017 Max Harmathy <max.harmathy@web.de>
# Copyright (C) 2026 pqc-backprop contributors
#
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 2 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.


from unittest import TestCase
from unittest.mock import patch

import json
from io import StringIO
from threading import get_ident

from pqc_backprop.display.simple import LinePrintInterface
from pqc_backprop.errors import ParameterError
from pqc_backprop.experiments import KINDS, RUNNERS, load_experiments
from pqc_backprop.main import resource_path
from pqc_backprop.workers import THREADS_VARIABLE, resolve_threads, run_tasks


class TestData(TestCase):
    """
    Test provided JSON data
    """

    experiment_data = None

    def setUp(self):
        if self.experiment_data is None:
            with open(resource_path("experiments.json")) as handle:
                self.experiment_data = json.load(handle)

    def test_experiment_data(self):
        """
        Makes sure, that the provided experiment data is in expected
        structure.
        """
        for data_set in self.experiment_data:
            self.assertIs(type(data_set), dict)
            for main_key in ["name", "kind", "description", "seed"]:
                self.assertIn(main_key, data_set.keys())
            self.assertIs(type(data_set["name"]), str)
            self.assertIs(type(data_set["seed"]), int)
            self.assertIn(data_set["kind"], KINDS)

    def test_consistency(self):
        """
        Assuming the structure of the data is correct, every entry loads and
        names are unique.
        """
        configs = list(load_experiments(resource_path("experiments.json")))
        names = [config.name for config in configs]
        self.assertEqual(len(names), len(set(names)))
        self.assertEqual(set(config.kind for config in configs), set(KINDS))
        self.assertEqual(set(RUNNERS), set(KINDS))
        seeds = [config.seed for config in configs]
        self.assertEqual(len(seeds), len(set(seeds)))


class TestWorkers(TestCase):

    def test_resolve(self):
        self.assertEqual(resolve_threads(3), 3)
        self.assertGreaterEqual(resolve_threads(0), 1)
        with patch.dict("os.environ", {THREADS_VARIABLE: "5"}):
            self.assertEqual(resolve_threads(), 5)
        with patch.dict("os.environ", {THREADS_VARIABLE: "many"}):
            self.assertRaises(ParameterError, resolve_threads)
        with patch.dict("os.environ", clear=True):
            self.assertEqual(resolve_threads(), 1)
        self.assertRaises(ParameterError, resolve_threads, -1)

    def test_order(self):
        arguments = [(i,) for i in range(50)]
        self.assertEqual(run_tasks(lambda i: i * i, arguments, threads=4),
                         [i * i for i in range(50)])
        self.assertEqual(run_tasks(lambda i: i * i, arguments, threads=1),
                         [i * i for i in range(50)])
        self.assertEqual(run_tasks(lambda i: i, [], threads=4), [])

    def test_threads_used(self):
        idents = run_tasks(lambda _: get_ident(), [(i,) for i in range(4)],
                           threads=1)
        self.assertEqual(set(idents), {get_ident()})

    def test_first_failure(self):
        def task(i):
            if i in (3, 7):
                raise ValueError(i)
            return i

        for threads in (1, 4):
            with self.assertRaises(ValueError) as context:
                run_tasks(task, [(i,) for i in range(10)], threads=threads)
            self.assertEqual(context.exception.args, (3,))

    def test_on_done(self):
        done = []
        run_tasks(lambda i: i, [(i,) for i in range(6)], threads=3,
                  on_done=done.append)
        self.assertEqual(sorted(done), list(range(6)))


class TestLinePrintInterface(TestCase):

    def test_update(self):
        stream = StringIO()
        display = LinePrintInterface(stream)
        display.update_task(42.0, "certificate", "3/7")
        display.update(100)
        display.cleanup()
        self.assertEqual(stream.getvalue().splitlines(),
                         ["[ 42.0%] 3/7 (certificate)", "[100.0%] "])

    def test_quiet(self):
        stream = StringIO()
        display = LinePrintInterface(stream, quiet=True)
        display.update_task(50.0, "mc", "1/2")
        self.assertEqual(stream.getvalue(), "")
