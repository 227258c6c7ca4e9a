# coding=utf-8

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

import csv
import json
import math
import os
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO
from tempfile import TemporaryDirectory
from unittest import TestCase

from pqc_backprop.main import command_line_interface, parse_observable
from pqc_backprop.pauli import parse_pauli

EXAMPLE = {
    "n": 1,
    "initial_clifford": [{"gate": "H", "qubits": [0]}],
    "layers": [{"noise": {"type": "amplitude_damping", "gamma": 0.19},
                "rotation_qubit": 0, "clifford": []}],
}

CLIFFORD_ONLY = {
    "n": 1,
    "initial_clifford": [{"gate": "H", "qubits": [0]}],
    "layers": [],
}


class TestCommandLine(TestCase):

    def setUp(self):
        self.directory = TemporaryDirectory()
        self.example = self.write("example.json", EXAMPLE)

    def tearDown(self):
        self.directory.cleanup()

    def path(self, name):
        return os.path.join(self.directory.name, name)

    def write(self, name, data):
        with open(self.path(name), "w") as handle:
            json.dump(data, handle)
        return self.path(name)

    def run_cli(self, *argv):
        output = StringIO()
        with redirect_stdout(output), redirect_stderr(StringIO()), \
                self.assertRaises(SystemExit) as context:
            command_line_interface(list(argv))
        return context.exception.code, output.getvalue()

    def rows(self, text):
        return list(csv.reader(StringIO(text)))

    def test_build(self):
        out = self.path("s.json")
        code, text = self.run_cli("build", "-c", self.example, "-o", "X",
                                  "--ell", "1", "--out", out)
        self.assertEqual(code, 0)
        summary = json.loads(text)
        self.assertIsNone(summary["r_certificate"])
        self.assertEqual(summary["bound"], 0.0)
        self.assertEqual(summary["terms"], 1)
        with open(out) as handle:
            data = json.load(handle)
        self.assertEqual(data["meta"]["m"], 1)
        self.assertEqual(data["terms"][0]["key"], [[1, "cos"]])
        self.assertAlmostEqual(data["terms"][0]["coeff"], 0.9)

    def test_build_truncated_and_traced(self):
        trace = self.path("trace.json")
        code, text = self.run_cli("build", "-c", self.example, "-o", "X",
                                  "--ell", "0", "--out", self.path("s.json"),
                                  "--trace", trace)
        self.assertEqual(code, 0)
        summary = json.loads(text)
        self.assertEqual(summary["r_certificate"], 0)
        self.assertEqual(summary["bound"], 1.0)
        with open(trace) as handle:
            paths = json.load(handle)
        self.assertEqual([path["outcome"] for path in paths], ["discarded"])

    def test_usage_errors(self):
        code, _ = self.run_cli("build", "-c", self.example, "-o", "X",
                               "--ell", "-1", "--out", self.path("s.json"))
        self.assertEqual(code, 2)
        self.assertFalse(os.path.exists(self.path("s.json")))
        code, _ = self.run_cli("build", "-c", self.example, "-o", "X",
                               "--out", self.path("s.json"))
        self.assertEqual(code, 2)
        code, _ = self.run_cli("build", "-c", self.example, "-o", "XQ",
                               "--ell", "1", "--out", self.path("s.json"))
        self.assertEqual(code, 2)
        code, _ = self.run_cli("build", "-c", self.path("missing.json"),
                               "-o", "X", "--ell", "1",
                               "--out", self.path("s.json"))
        self.assertEqual(code, 2)

    def test_schema_error(self):
        broken = self.write("broken.json", {"n": 1})
        code, _ = self.run_cli("build", "-c", broken, "-o", "X", "--ell", "1",
                               "--out", self.path("s.json"))
        self.assertEqual(code, 2)

    def test_admissibility(self):
        circuit = dict(EXAMPLE, layers=[{
            "noise": {"type": "normal_form", "t": [0.5, 0, 0],
                      "D": [0.5, 0.5, 0.5]},
            "rotation_qubit": 0, "clifford": []}])
        code, _ = self.run_cli("build", "-c", self.write("bad.json", circuit),
                               "-o", "X", "--ell", "1",
                               "--out", self.path("s.json"))
        self.assertEqual(code, 3)

    def test_gen_and_oracle_limit(self):
        out = self.path("wide.json")
        code, text = self.run_cli("gen", "random", "--qubits", "8",
                                  "--layers", "1", "--gamma", "0.1",
                                  "--seed", "3", "--out", out)
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(text)["n"], 8)
        theta = self.write("theta.json", [[0.0]])
        code, _ = self.run_cli("oracle", "-c", out, "-o", "Z" * 8,
                               "--theta", theta)
        self.assertEqual(code, 4)

    def test_gen_reproducible(self):
        first, second = self.path("a.json"), self.path("b.json")
        for out in (first, second):
            code, _ = self.run_cli("gen", "qaoa", "--nodes", "6",
                                   "--rounds", "1", "--gamma", "0.1",
                                   "--seed", "3", "--out", out)
            self.assertEqual(code, 0)
        with open(first) as a, open(second) as b:
            self.assertEqual(a.read(), b.read())

    def test_sample_thread_independent(self):
        circuit = self.path("c.json")
        self.run_cli("gen", "random", "--qubits", "3", "--layers", "6",
                     "--gamma", "0.2", "--seed", "5", "--out", circuit)
        contents = []
        for threads in ("1", "4"):
            out = self.path("mc{}.json".format(threads))
            code, text = self.run_cli("--threads", threads, "sample", "-c",
                                      circuit, "-o", "ZZI", "--ell", "2",
                                      "--trees", "50", "--seed", "9",
                                      "--out", out)
            self.assertEqual(code, 0)
            summary = json.loads(text)
            self.assertGreater(summary["mc_bound"],
                               summary["statistical_term_literal"])
            with open(out) as handle:
                contents.append(handle.read())
        self.assertEqual(contents[0], contents[1])

    def test_sample_without_layers(self):
        circuit = self.write("clifford.json", CLIFFORD_ONLY)
        out = self.path("mc.json")
        code, text = self.run_cli("sample", "-c", circuit, "-o", "X",
                                  "--ell", "1", "--trees", "2", "--out", out)
        self.assertEqual(code, 0)
        summary = json.loads(text)
        self.assertAlmostEqual(summary["mc_bound"],
                               math.sqrt(2 * math.log(40) / 2))
        self.assertTrue(os.path.exists(out))
        code, text = self.run_cli("validate", out, "-c", circuit,
                                  "--samples", "100")
        self.assertEqual(code, 0)
        summary = json.loads(text)
        self.assertEqual(summary["delta_empirical"], 0.0)
        self.assertTrue(summary["passed"])

    def test_weighted_certificate(self):
        surrogate = self.path("s.json")
        code, text = self.run_cli("build", "-c", self.example, "-o", "10.0:X",
                                  "--ell", "0", "--out", surrogate)
        self.assertEqual(code, 0)
        summary = json.loads(text)
        self.assertEqual(summary["weight_norm"], 10.0)
        self.assertEqual(summary["bound"], 10.0)
        code, text = self.run_cli("validate", surrogate, "-c", self.example,
                                  "--samples", "2000")
        self.assertEqual(code, 0)
        summary = json.loads(text)
        self.assertEqual(summary["bound"], 10.0)
        self.assertAlmostEqual(summary["delta_empirical"], 9.0 / math.sqrt(2),
                               delta=0.5)
        self.assertTrue(summary["passed"])

    def test_eval_and_oracle(self):
        surrogate = self.path("s.json")
        self.run_cli("build", "-c", self.example, "-o", "X", "--exact",
                     "--out", surrogate)
        theta = self.write("theta.json", [[0.0], [math.pi / 2], [1.0]])
        code, text = self.run_cli("eval", surrogate, "--theta", theta)
        self.assertEqual(code, 0)
        rows = self.rows(text)
        self.assertEqual(rows[0], ["theta_1", "value"])
        self.assertAlmostEqual(float(rows[1][1]), 0.9)
        self.assertAlmostEqual(float(rows[2][1]), 0.0)
        for method in ("ptm", "density"):
            code, text = self.run_cli("oracle", "-c", self.example, "-o", "X",
                                      "--theta", theta, "--method", method)
            self.assertEqual(code, 0)
            self.assertAlmostEqual(float(self.rows(text)[3][1]),
                                   0.9 * math.cos(1.0))

    def test_eval_csv(self):
        surrogate = self.path("s.json")
        self.run_cli("build", "-c", self.example, "-o", "X", "--ell", "3",
                     "--out", surrogate)
        theta = self.path("theta.csv")
        with open(theta, "w") as handle:
            handle.write("# angles\ntheta_1\n0.0\n3.141592653589793\n")
        code, text = self.run_cli("eval", surrogate, "--theta", theta)
        self.assertEqual(code, 0)
        values = [float(row[1]) for row in self.rows(text)[1:]]
        self.assertEqual(len(values), 2)
        self.assertAlmostEqual(values[1], -0.9)

    def test_validate(self):
        circuit = self.path("c.json")
        self.run_cli("gen", "random", "--qubits", "2", "--layers", "5",
                     "--gamma", "0.2", "--seed", "2", "--out", circuit)
        surrogate = self.path("s.json")
        self.run_cli("build", "-c", circuit, "-o", "0.5:ZZ", "-o", "XI",
                     "--ell", "2", "--out", surrogate)
        code, text = self.run_cli("validate", surrogate, "-c", circuit,
                                  "--samples", "2000", "--seed", "1")
        self.assertEqual(code, 0)
        summary = json.loads(text)
        self.assertTrue(summary["passed"])
        self.assertEqual(summary["observable"], "0.5:ZZ 1.0:XI")

        other = self.path("other.json")
        self.run_cli("gen", "random", "--qubits", "2", "--layers", "5",
                     "--gamma", "0.2", "--seed", "3", "--out", other)
        code, _ = self.run_cli("validate", surrogate, "-c", other,
                               "--samples", "100")
        self.assertEqual(code, 2)

    def test_experiment_list(self):
        code, text = self.run_cli("experiment", "--list")
        self.assertEqual(code, 0)
        names = [line.split()[0] for line in text.splitlines()]
        self.assertIn("certificate", names)
        self.assertIn("oracle-triangle", names)
        code, _ = self.run_cli("experiment", "no-such-experiment")
        self.assertEqual(code, 2)

    def test_experiment_run(self):
        config = self.write("experiments.json", [{
            "name": "tiny", "kind": "orthogonality", "layers": [1, 3],
            "instances": 2, "samples": 200}])
        out = self.path("tiny.csv")
        code, text = self.run_cli("experiment", "tiny", "--config", config,
                                  "--out", out, "-q")
        self.assertIn(code, (0, 1))
        self.assertEqual(json.loads(text)["rows"], 2)
        with open(out) as handle:
            self.assertTrue(handle.readline().startswith(
                "# experiment=tiny kind=orthogonality"))


class TestObservableArguments(TestCase):

    def test_single(self):
        self.assertEqual(parse_observable(["XZ"]), parse_pauli("XZ"))

    def test_sum(self):
        self.assertEqual(parse_observable(["0.5:ZZ", "XI"]),
                         [(0.5, parse_pauli("ZZ")), (1.0, parse_pauli("XI"))])
        self.assertEqual(parse_observable(["-2:-XY"]),
                         [(-2.0, parse_pauli("-XY"))])
