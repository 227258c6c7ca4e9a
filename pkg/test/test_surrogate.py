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

import json
import math
import os
from tempfile import TemporaryDirectory
from types import SimpleNamespace
from unittest import TestCase

import numpy as np

from pqc_backprop.errors import ModeError, ParameterError, SchemaError
from pqc_backprop.surrogate import Surrogate, certificate_bound, \
    empirical_l2, l2_distance, l2_norm, load_surrogate, mc_bound, \
    mc_statistical_term, save_surrogate, surrogate_from_json

COS_1 = ((1, "cos"),)


class TestSurrogate(TestCase):

    def setUp(self):
        self.surrogate = Surrogate(2, {COS_1: 0.9,
                                       ((1, "sin"), (2, "cos")): -0.5,
                                       (): 0.25})

    def test_evaluate(self):
        example = Surrogate(1, {COS_1: 0.9})
        self.assertEqual(example.evaluate([0.0]), 0.9)
        self.assertAlmostEqual(example.evaluate([math.pi / 2]), 0.0)
        theta = [0.3, 1.1]
        expected = 0.9 * math.cos(0.3) - 0.5 * math.sin(0.3) * math.cos(
            1.1) + 0.25
        self.assertAlmostEqual(self.surrogate.evaluate(theta), expected)

    def test_evaluate_batch(self):
        thetas = np.array([[0.0, 0.0], [0.3, 1.1], [2.0, -1.0]])
        batch = self.surrogate.evaluate_batch(thetas)
        for row, value in zip(thetas, batch):
            self.assertAlmostEqual(value, self.surrogate.evaluate(row))
        with self.assertRaises(ParameterError):
            self.surrogate.evaluate_batch(np.zeros((3, 1)))
        with self.assertRaises(ParameterError):
            self.surrogate.evaluate([0.0])

    def test_keys(self):
        self.assertEqual(list(self.surrogate.terms)[0], ())
        self.assertEqual(len(Surrogate(1, {COS_1: 0.0})), 0)
        with self.assertRaises(ParameterError):
            Surrogate(2, {((2, "cos"), (1, "sin")): 1.0})
        with self.assertRaises(ParameterError):
            Surrogate(2, {((3, "cos"),): 1.0})
        with self.assertRaises(ParameterError):
            Surrogate(2, {((1, "tan"),): 1.0})

    def test_arithmetic(self):
        difference = self.surrogate - self.surrogate
        self.assertEqual(len(difference), 0)
        doubled = 2.0 * self.surrogate
        self.assertEqual(doubled.coefficient(COS_1), 1.8)
        self.assertEqual(-self.surrogate, (-1.0) * self.surrogate)
        with self.assertRaises(ParameterError):
            self.surrogate + Surrogate(1)


class TestDistances(TestCase):

    def test_orthogonal_monomials(self):
        example = Surrogate(1, {COS_1: 0.9})
        self.assertAlmostEqual(l2_norm(example), 0.9 / math.sqrt(2))
        self.assertAlmostEqual(l2_distance(example, Surrogate(1)),
                               0.6364, places=4)
        mixed = Surrogate(2, {(): 1.0, ((1, "sin"), (2, "sin")): 2.0})
        self.assertAlmostEqual(l2_norm(mixed), math.sqrt(1.0 + 4.0 / 4.0))
        self.assertEqual(l2_distance(mixed, mixed), 0.0)

    def test_empirical(self):
        example = Surrogate(1, {COS_1: 0.9})
        estimate, error = empirical_l2(example, Surrogate(1), 20000, seed=3)
        self.assertLess(abs(estimate - 0.9 / math.sqrt(2)), 5 * error)
        self.assertGreater(error, 0.0)
        self.assertEqual(empirical_l2(example, Surrogate(1), 20000, seed=3),
                         (estimate, error))
        self.assertEqual(empirical_l2(example, example, 100), (0.0, 0.0))

    def test_empirical_callable(self):
        example = Surrogate(1, {COS_1: 0.9})
        estimate, _ = empirical_l2(example, example.evaluate_batch, 50)
        self.assertEqual(estimate, 0.0)
        with self.assertRaises(ParameterError):
            empirical_l2(example, example, 1)


class TestBounds(TestCase):

    def report(self, **fields):
        data = dict(mode="deterministic", r_certificate=4, formal_bound=True,
                    gamma_min=0.19, weight_norm=1.0)
        data.update(fields)
        return SimpleNamespace(**data)

    def test_certificate(self):
        self.assertAlmostEqual(certificate_bound(self.report()), 0.6561)
        self.assertEqual(certificate_bound(self.report(r_certificate=0)),
                         1.0)
        self.assertEqual(certificate_bound(self.report(r_certificate=None)),
                         0.0)
        self.assertEqual(certificate_bound(self.report(mode="exact",
                                                       r_certificate=None)),
                         0.0)
        self.assertIsNone(certificate_bound(self.report(formal_bound=False,
                                                        gamma_min=None)))
        with self.assertRaises(ModeError):
            certificate_bound(self.report(mode="mc"))

    def test_mc_bound(self):
        self.assertAlmostEqual(mc_bound(3, 10 ** 12, 0.05, gamma=0.19),
                               0.6561, places=4)
        self.assertAlmostEqual(mc_bound(None, 800, 0.05, gamma=0.19),
                               0.0960, places=4)
        self.assertAlmostEqual(mc_bound(1, 800, 0.05, contraction=0.5),
                               0.25 + mc_statistical_term(800, 0.05))
        self.assertAlmostEqual(mc_statistical_term(800, 0.05, "literal"),
                               math.sqrt(2 * math.log(10) / 800))
        self.assertEqual(mc_statistical_term(10, 0.9, "literal"), 0.0)

    def test_weight_norm_scaling(self):
        self.assertAlmostEqual(
            certificate_bound(self.report(weight_norm=2.5)), 2.5 * 0.6561)
        self.assertEqual(certificate_bound(self.report(
            weight_norm=2.5, r_certificate=None)), 0.0)
        self.assertAlmostEqual(
            mc_bound(1, 800, 0.05, contraction=0.5, weight_norm=4.0),
            4.0 * mc_bound(1, 800, 0.05, contraction=0.5))
        self.assertAlmostEqual(
            mc_bound(None, 800, 0.05, gamma=0.19, weight_norm=3.0),
            3.0 * mc_statistical_term(800, 0.05))
        with self.assertRaises(ParameterError):
            mc_bound(1, 800, 0.05, contraction=0.5, weight_norm=-1.0)

    def test_mc_bound_arguments(self):
        with self.assertRaises(ParameterError):
            mc_bound(3, 800, 1.5, gamma=0.19)
        with self.assertRaises(ParameterError):
            mc_bound(3, 800, 0.05)
        with self.assertRaises(ParameterError):
            mc_bound(3, 800, 0.05, gamma=0.19, contraction=0.5)
        with self.assertRaises(ParameterError):
            mc_bound(3, 0, 0.05, gamma=0.19)
        with self.assertRaises(ParameterError):
            mc_statistical_term(800, 0.05, "tight")


class TestFiles(TestCase):

    def test_round_trip(self):
        surrogate = Surrogate(3, {(): -1.0, ((1, "sin"), (3, "cos")): 0.125})
        meta = {"mode": "exact", "observable": "ZZ"}
        with TemporaryDirectory() as directory:
            path = os.path.join(directory, "surrogate.json")
            save_surrogate(surrogate, meta, path)
            loaded, loaded_meta = load_surrogate(path)
        self.assertEqual(loaded, surrogate)
        self.assertEqual(loaded_meta, dict(meta, m=3))

    def test_schema(self):
        def error_path(data):
            with self.assertRaises(SchemaError) as context:
                surrogate_from_json(data)
            return context.exception.path

        self.assertEqual(error_path([]), "$")
        self.assertEqual(error_path({"meta": {}, "terms": []}), "meta.m")
        self.assertEqual(error_path({"meta": {"m": 1}, "terms": {}}), "terms")
        self.assertEqual(error_path({"meta": {"m": 1}, "terms": [
            {"key": [], "coeff": 1.0}, {"key": [[1, "cos"]]}]}), "terms[1]")
        self.assertEqual(error_path({"meta": {"m": 1}, "terms": [
            {"key": [[2, "cos"]], "coeff": 1.0}]}), "terms[0].key")
        self.assertEqual(error_path({"meta": {"m": 1}, "terms": [
            {"key": [[1, "cos"]], "coeff": 1.0},
            {"key": [[1, "cos"]], "coeff": 2.0}]}), "terms[1].key")

    def test_invalid_json(self):
        with TemporaryDirectory() as directory:
            path = os.path.join(directory, "broken.json")
            with open(path, "w") as handle:
                handle.write("{")
            with self.assertRaises(SchemaError):
                load_surrogate(path)
            with open(path, "w") as handle:
                json.dump({"meta": {"m": 0}, "terms": []}, handle)
            surrogate, _ = load_surrogate(path)
        self.assertEqual(surrogate, Surrogate(0))
