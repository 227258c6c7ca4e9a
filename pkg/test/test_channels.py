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

import math
from unittest import TestCase

import numpy as np

from pqc_backprop.channels import adjoint_action, amplitude_damping, \
    channel_from_json, compose, convex_combine, damping_of, dephasing, \
    depolarizing, identity, noisy_rotation_adjoint, normal_form, \
    q_factor_table, split_conservation, transfer_matrix, validate
from pqc_backprop.errors import ParameterError, SchemaError

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.diag([1, -1]).astype(complex),
)


def heisenberg_matrix(kraus, unitary=None):
    """
    4x4 matrix of O -> sum_K K^dagger U^dagger O U K in the basis I, X, Y, Z;
    column j is the image of basis element j.
    """
    unitary = np.eye(2) if unitary is None else unitary
    matrix = np.zeros((4, 4))
    for j, pauli in enumerate(PAULI):
        rotated = unitary.conj().T @ pauli @ unitary
        image = sum(k.conj().T @ rotated @ k for k in kraus)
        for i, basis in enumerate(PAULI):
            matrix[i, j] = np.trace(basis @ image).real / 2.0
    return matrix


class TestConstructors(TestCase):

    def test_amplitude_damping(self):
        channel = amplitude_damping(0.19)
        self.assertEqual(channel.t, (0.0, 0.0, 0.19))
        self.assertAlmostEqual(channel.D[0], 0.9, places=15)
        self.assertAlmostEqual(channel.D[1], 0.9, places=15)
        self.assertAlmostEqual(channel.D[2], 0.81, places=15)
        self.assertEqual(adjoint_action(channel, "Z"), (0.19, channel.D[2]))
        self.assertEqual(adjoint_action(channel, "I"), (1.0, 1.0))

    def test_kraus_agrees_with_normal_form(self):
        channels = [amplitude_damping(0.3), amplitude_damping(1.0),
                    depolarizing(0.2), dephasing(0.4), identity(),
                    compose(amplitude_damping(0.1), dephasing(0.2)),
                    convex_combine([0.25, 0.75], [amplitude_damping(0.5),
                                                  depolarizing(0.1)])]
        for channel in channels:
            expected = transfer_matrix(channel).T
            np.testing.assert_allclose(heisenberg_matrix(channel.kraus),
                                       expected, atol=1e-12,
                                       err_msg=str(channel))

    def test_ranges(self):
        for gamma in (0.0, -0.1, 1.5, float("nan")):
            with self.assertRaises(ParameterError):
                amplitude_damping(gamma)
        with self.assertRaises(ParameterError):
            depolarizing(1.2)
        with self.assertRaises(ParameterError):
            dephasing(-0.1)

    def test_depolarizing_and_dephasing(self):
        self.assertEqual(depolarizing(0.3).D, (0.7, 0.7, 0.7))
        self.assertEqual(dephasing(0.25).D, (0.75, 0.75, 1.0))
        self.assertTrue(dephasing(0.25).is_unital)
        self.assertFalse(amplitude_damping(0.25).is_unital)


class TestAlgebra(TestCase):

    def test_compose_damping(self):
        a, b = 0.2, 0.35
        channel = compose(amplitude_damping(a), amplitude_damping(b))
        expected = amplitude_damping(1 - (1 - a) * (1 - b))
        for left, right in zip(channel.t + channel.D, expected.t + expected.D):
            self.assertAlmostEqual(left, right, places=14)
        self.assertAlmostEqual(damping_of(channel), 1 - (1 - a) * (1 - b))

    def test_compose_order(self):
        first = normal_form((0.1, 0.0, 0.2), (0.5, 0.4, 0.6))
        second = amplitude_damping(0.3)
        np.testing.assert_allclose(
            transfer_matrix(compose(first, second)),
            transfer_matrix(second) @ transfer_matrix(first), atol=1e-15)

    def test_convex_combine(self):
        channel = convex_combine([0.5, 0.5], [identity(),
                                              amplitude_damping(0.4)])
        self.assertAlmostEqual(channel.t[2], 0.2)
        self.assertAlmostEqual(channel.D[2], 0.8)
        with self.assertRaises(ParameterError):
            convex_combine([0.5, 0.6], [identity(), identity()])
        with self.assertRaises(ParameterError):
            convex_combine([1.5, -0.5], [identity(), identity()])
        with self.assertRaises(ParameterError):
            convex_combine([1.0], [identity(), identity()])

    def test_rotation_matches_kraus_picture(self):
        theta = 0.7
        unitary = np.diag([np.exp(0.5j * theta), np.exp(-0.5j * theta)])
        for channel in (amplitude_damping(0.3), dephasing(0.2),
                        compose(amplitude_damping(0.1), dephasing(0.2))):
            np.testing.assert_allclose(
                heisenberg_matrix(channel.kraus, unitary),
                noisy_rotation_adjoint(channel, theta), atol=1e-12)

    def test_rotation_acts_before_general_channel(self):
        theta = 0.7
        channel = normal_form((0.1, -0.2, 0.05), (0.6, 0.5, 0.7))
        rotation = noisy_rotation_adjoint(identity(), theta)
        noise = transfer_matrix(channel).T
        np.testing.assert_allclose(noisy_rotation_adjoint(channel, theta),
                                   rotation @ noise, atol=1e-12)
        self.assertFalse(np.allclose(noisy_rotation_adjoint(channel, theta),
                                     noise @ rotation))


class TestValidate(TestCase):

    def test_amplitude_damping_passes(self):
        report = validate(amplitude_damping(0.3))
        self.assertTrue(report.passed)
        self.assertTrue(report.admissible)
        self.assertEqual(report.saturated_axes, ("Z",))
        self.assertEqual(report.saturating_axis, "Z")

    def test_identity_has_unital_saturations(self):
        report = validate(identity())
        self.assertEqual(report.saturation_count, 3)
        self.assertTrue(report.passed)
        self.assertIsNone(report.saturating_axis)
        self.assertTrue(report.admissible)

    def test_non_unital_x_saturation(self):
        report = validate(normal_form((0.5, 0.0, 0.0), (0.5, 0.5, 0.5)))
        self.assertTrue(report.passed)
        self.assertEqual(report.saturating_axis, "X")
        self.assertFalse(report.admissible)

    def test_two_saturations_with_non_unital(self):
        report = validate(normal_form((0.0, 0.0, 0.5), (1.0, 0.0, 0.5)))
        self.assertFalse(report.saturation_ok)
        self.assertFalse(report.passed)

    def test_axis_bound(self):
        report = validate(normal_form((0.0, 0.0, 0.0), (1.2, 0.5, 0.5)))
        self.assertEqual(report.axis_ok, (False, True, True))
        self.assertFalse(report.passed)

    def test_constraint_off_axis(self):
        # every axis below 1, but a diagonal direction exceeds it
        report = validate(normal_form((0.6, 0.6, 0.0), (0.35, 0.35, 0.0)))
        self.assertTrue(all(report.axis_ok))
        self.assertFalse(report.constraint_ok)


class TestTables(TestCase):

    def test_q_factor_table(self):
        gamma = 0.36
        table = q_factor_table(amplitude_damping(gamma))
        self.assertAlmostEqual(table["0_Z"], 1 - gamma)
        self.assertEqual(table["0_I"], gamma)
        self.assertAlmostEqual(table["+1_X"], 0.8)
        self.assertEqual(table["-1_Y"], table["+1_Y"])
        self.assertEqual(table["0_X"], 0.0)
        self.assertAlmostEqual(table["mc_Z"], 1.0)

    def test_split_conservation(self):
        for gamma in (0.05, 0.19, 0.5, 1.0):
            values = split_conservation(gamma)
            self.assertAlmostEqual(values["z_split_pairs"], 1.0, places=15)
            self.assertAlmostEqual(values["z_split_single"], 1.0, places=15)
            self.assertAlmostEqual(values["pm_split_pair"],
                                   values["pm_expected"], places=15)

    def test_damping_of(self):
        self.assertEqual(damping_of(amplitude_damping(0.3)), 0.3)
        self.assertIsNone(damping_of(depolarizing(0.3)))
        self.assertIsNone(damping_of(identity()))


class TestJson(TestCase):

    def test_round_trip(self):
        channel = convex_combine(
            [0.5, 0.5], [compose(amplitude_damping(0.1), dephasing(0.2)),
                         depolarizing(0.3)])
        again = channel_from_json(channel.to_json())
        self.assertEqual(again, channel)
        self.assertEqual(again.to_json(), channel.to_json())

    def test_errors(self):
        cases = [
            ({"type": "amplitude_damping"}, "noise.gamma"),
            ({"type": "amplitude_damping", "gamma": 2}, "noise"),
            ({"type": "kraus"}, "noise.type"),
            ({"type": "normal_form", "t": [0, 0], "D": [1, 1, 1]},
             "noise.t"),
            ({"type": "compose", "channels": [{"type": "identity"}]},
             "noise.channels"),
            ({"type": "compose", "channels": [
                {"type": "identity"}, {"type": "dephasing"}]},
             "noise.channels[1].lambda"),
            ([], "noise"),
        ]
        for data, path in cases:
            with self.assertRaises(SchemaError) as context:
                channel_from_json(data)
            self.assertEqual(context.exception.path, path, msg=str(data))

    def test_normal_form_without_kraus(self):
        channel = channel_from_json({"type": "normal_form",
                                     "t": [0, 0, 0.1], "D": [0.9, 0.9, 0.9]})
        self.assertIsNone(channel.kraus)
        self.assertTrue(math.isclose(channel.axis_sum("Z"), 1.0))
