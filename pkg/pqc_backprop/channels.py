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

"""
Single-qubit noise channels in diagonal normal form.

A channel maps the Bloch vector w to t + D w; its adjoint maps each Pauli
P in {X, Y, Z} to t_P I + D_P P and fixes I. Composition is written in
Schroedinger order: ``compose(first, second)`` applies ``first`` to the state
and then ``second``, so D = D1 D2 and t = t2 + D2 t1 per axis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from pqc_backprop.errors import ParameterError, SchemaError
from pqc_backprop.rng import STREAM_CONSTRAINT, philox

AXES = "XYZ"
TOLERANCE = 1e-9
CONSTRAINT_SAMPLES = 256

_I2 = np.eye(2, dtype=complex)
_PAULI_MATRICES = {
    "I": _I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class NormalFormChannel:
    t: tuple
    D: tuple
    label: str = field(default="normal_form", compare=False)
    # Kraus operators when known; the density-matrix oracle needs them
    kraus: tuple = field(default=None, compare=False, repr=False)
    origin: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        t = tuple(float(value) for value in self.t)
        d = tuple(float(value) for value in self.D)
        if len(t) != 3 or len(d) != 3:
            raise ParameterError("t and D need three entries each")
        if not all(math.isfinite(value) for value in t + d):
            raise ParameterError("t and D must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "D", d)

    def axis_sum(self, axis):
        index = AXES.index(axis)
        return abs(self.D[index]) + abs(self.t[index])

    @property
    def is_unital(self):
        return not any(self.t)

    def to_json(self):
        if self.origin is not None:
            return self.origin
        return {"type": "normal_form", "t": list(self.t), "D": list(self.D)}

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class ChannelReport:
    axis_sums: tuple
    axis_ok: tuple
    saturated_axes: tuple
    saturation_ok: bool
    constraint_max: float
    constraint_ok: bool
    saturating_axis: str

    @property
    def saturation_count(self):
        return len(self.saturated_axes)

    @property
    def admissible(self):
        """The engine only accepts a non-unital saturation along Z."""
        return self.saturating_axis in (None, "Z")

    @property
    def passed(self):
        return all(self.axis_ok) and self.saturation_ok and self.constraint_ok


def _check_range(name, value, low, high, low_open=False):
    value = float(value)
    if math.isnan(value) or value > high or value < low or (
            low_open and value == low):
        bracket = "(" if low_open else "["
        raise ParameterError("{} must lie in {}{}, {}], got {}".format(
            name, bracket, low, high, value))
    return value


def identity():
    return NormalFormChannel((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), "identity",
                             kraus=(_I2,), origin={"type": "identity"})


def amplitude_damping(gamma):
    """
    :param gamma: damping parameter in (0, 1]; 1 resets the qubit to |0>
    """
    gamma = _check_range("gamma", gamma, 0.0, 1.0, low_open=True)
    root = math.sqrt(1.0 - gamma)
    kraus = (np.array([[1, 0], [0, root]], dtype=complex),
             np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex))
    return NormalFormChannel((0.0, 0.0, gamma), (root, root, 1.0 - gamma),
                             "amplitude_damping({!r})".format(gamma),
                             kraus=kraus,
                             origin={"type": "amplitude_damping",
                                     "gamma": gamma})


def depolarizing(p):
    p = _check_range("p", p, 0.0, 1.0)
    kraus = (math.sqrt(1.0 - 0.75 * p) * _I2,) + tuple(
        math.sqrt(p / 4.0) * _PAULI_MATRICES[axis] for axis in AXES)
    return NormalFormChannel((0.0, 0.0, 0.0), (1.0 - p,) * 3,
                             "depolarizing({!r})".format(p), kraus=kraus,
                             origin={"type": "depolarizing", "p": p})


def dephasing(lam):
    """
    :param lam: X/Y damping of the transfer matrix, D_X = D_Y = 1 - lam
    """
    lam = _check_range("lambda", lam, 0.0, 1.0)
    kraus = (math.sqrt(1.0 - lam / 2.0) * _I2,
             math.sqrt(lam / 2.0) * _PAULI_MATRICES["Z"])
    return NormalFormChannel((0.0, 0.0, 0.0), (1.0 - lam, 1.0 - lam, 1.0),
                             "dephasing({!r})".format(lam), kraus=kraus,
                             origin={"type": "dephasing", "lambda": lam})


def normal_form(t, D, label="normal_form"):
    channel = NormalFormChannel(t, D, label)
    return NormalFormChannel(channel.t, channel.D, label,
                             origin={"type": "normal_form",
                                     "t": list(channel.t),
                                     "D": list(channel.D)})


def compose(first, second):
    """
    Channel applying ``first`` and then ``second`` to the state.
    """
    d = tuple(d1 * d2 for d1, d2 in zip(first.D, second.D))
    t = tuple(t2 + d2 * t1 for t1, t2, d2 in zip(first.t, second.t, second.D))
    kraus = None
    if first.kraus is not None and second.kraus is not None:
        kraus = tuple(k2 @ k1 for k2 in second.kraus for k1 in first.kraus)
    return NormalFormChannel(t, d, "compose({}, {})".format(first, second),
                             kraus=kraus,
                             origin={"type": "compose",
                                     "channels": [first.to_json(),
                                                  second.to_json()]})


def convex_combine(weights, channels, tol=TOLERANCE):
    """
    Probabilistic mixture of channels.
    :raises ParameterError: on negative weights or weights not summing to 1
    """
    weights = [float(weight) for weight in weights]
    channels = list(channels)
    if not channels or len(weights) != len(channels):
        raise ParameterError("need one weight per channel")
    if any(weight < 0 for weight in weights):
        raise ParameterError("weights must be non-negative")
    total = math.fsum(weights)
    if abs(total - 1.0) > tol:
        raise ParameterError("weights sum to {!r}, not 1".format(total))
    t = tuple(math.fsum(w * c.t[i] for w, c in zip(weights, channels))
              for i in range(3))
    d = tuple(math.fsum(w * c.D[i] for w, c in zip(weights, channels))
              for i in range(3))
    kraus = None
    if all(c.kraus is not None for c in channels):
        kraus = tuple(math.sqrt(w) * k for w, c in zip(weights, channels)
                      for k in c.kraus if w > 0)
    label = "mixture({})".format(", ".join(
        "{!r}*{}".format(w, c) for w, c in zip(weights, channels)))
    return NormalFormChannel(t, d, label, kraus=kraus,
                             origin={"type": "mixture", "weights": weights,
                                     "channels": [c.to_json()
                                                  for c in channels]})


def validate(channel, tol=TOLERANCE, samples=CONSTRAINT_SAMPLES, seed=0):
    """
    Check the normal-form constraints: per-axis bound, number of saturated
    axes, and sum_P b_P^2 |D_P| + sum_P |b_P t_P| <= 1 on the three axes and
    ``samples`` random unit vectors b.
    """
    sums = tuple(channel.axis_sum(axis) for axis in AXES)
    axis_ok = tuple(value <= 1.0 + tol for value in sums)
    saturated = tuple(axis for axis, value in zip(AXES, sums)
                      if abs(1.0 - value) <= tol)
    non_unital = tuple(axis for axis in saturated
                       if abs(channel.t[AXES.index(axis)]) > tol)
    # two saturated axes only contradict the constraint when one is non-unital
    saturation_ok = len(saturated) <= 1 or not non_unital

    directions = philox(seed, STREAM_CONSTRAINT).standard_normal((samples, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    directions = np.vstack([np.eye(3), directions])
    d = np.abs(np.asarray(channel.D))
    t = np.abs(np.asarray(channel.t))
    values = directions ** 2 @ d + np.abs(directions) @ t
    constraint_max = float(values.max())

    return ChannelReport(
        axis_sums=sums,
        axis_ok=axis_ok,
        saturated_axes=saturated,
        saturation_ok=saturation_ok,
        constraint_max=constraint_max,
        constraint_ok=constraint_max <= 1.0 + tol,
        saturating_axis=non_unital[0] if len(non_unital) == 1 else (
            "".join(non_unital) or None),
    )


def adjoint_action(channel, axis):
    """
    Coefficients (of I, of the same axis) of the adjoint channel applied to
    a single Pauli. The identity is fixed, reported as (1, 1).
    """
    if axis == "I":
        return 1.0, 1.0
    index = AXES.index(axis)
    return channel.t[index], channel.D[index]


def transfer_matrix(channel):
    """Schroedinger-picture Pauli transfer matrix, basis order I, X, Y, Z."""
    matrix = np.eye(4)
    for i in range(3):
        matrix[i + 1, 0] = channel.t[i]
        matrix[i + 1, i + 1] = channel.D[i]
    return matrix


def noisy_rotation_adjoint(channel, theta):
    """
    Adjoint transfer matrix of the noisy rotation acting on Pauli coefficient
    vectors (I, X, Y, Z); column j is the image of basis Pauli j.
    """
    c, s = math.cos(theta), math.sin(theta)
    tx, ty, tz = channel.t
    dx, dy, dz = channel.D
    return np.array([[1.0, tx, ty, tz],
                     [0.0, dx * c, -dy * s, 0.0],
                     [0.0, dx * s, dy * c, 0.0],
                     [0.0, 0.0, 0.0, dz]])


def damping_of(channel, tol=TOLERANCE):
    """
    The damping parameter if the channel is exactly amplitude damping,
    otherwise None.
    """
    gamma = channel.t[2]
    if not 0.0 < gamma <= 1.0 or abs(channel.t[0]) > tol or abs(
            channel.t[1]) > tol:
        return None
    root = math.sqrt(1.0 - gamma)
    expected = (root, root, 1.0 - gamma)
    if all(abs(a - b) <= tol for a, b in zip(channel.D, expected)):
        return gamma
    return None


def contraction(channel):
    """max over X, Y of |D_P| + |t_P|"""
    return max(channel.axis_sum("X"), channel.axis_sum("Y"))


def q_factor_table(channel):
    """
    Per-process noise factors Q of the deterministic expansion, plus the
    sampling factors |D_P| + |t_P| of the Monte-Carlo expansion.
    """
    (tx, ty, tz), (dx, dy, dz) = channel.t, channel.D
    return {
        "0": 1.0,
        "0_Z": abs(dz), "0_I": abs(tz),
        "+1_X": abs(dx), "-1_X": abs(dx), "0_X": abs(tx),
        "+1_Y": abs(dy), "-1_Y": abs(dy), "0_Y": abs(ty),
        "mc_X": channel.axis_sum("X"), "mc_Y": channel.axis_sum("Y"),
        "mc_Z": channel.axis_sum("Z"),
    }


def split_conservation(gamma):
    """
    Error-contribution identities of a single amplitude-damping split,
    computed from the factor table: the Z split's four pair products and the
    +/-1 pair's damped self-interaction (two paths, weight 2**-1 each).
    """
    table = q_factor_table(amplitude_damping(gamma))
    z_pairs = math.fsum(a * b for a in (table["0_Z"], table["0_I"])
                        for b in (table["0_Z"], table["0_I"]))
    z_single = table["0_Z"] + table["0_I"]
    pm_pair = math.fsum(table[label] ** 2 * 0.5 for label in ("+1_X", "-1_X"))
    return {"z_split_pairs": z_pairs, "z_split_single": z_single,
            "pm_split_pair": pm_pair, "pm_expected": 1.0 - gamma}


def channel_from_json(data, path="noise"):
    """
    Build a channel from its JSON object.
    :raises SchemaError: naming the offending field
    """
    if not isinstance(data, dict) or "type" not in data:
        raise SchemaError(path, "expected a channel object with a type")
    kind = data["type"]

    def number(key):
        if key not in data:
            raise SchemaError("{}.{}".format(path, key), "missing")
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError("{}.{}".format(path, key), "expected a number")
        return value

    def vector(key):
        value = data.get(key)
        if not isinstance(value, list) or len(value) != 3 or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool)
                for v in value):
            raise SchemaError("{}.{}".format(path, key),
                              "expected three numbers")
        return value

    def children(expected=None):
        value = data.get("channels")
        if not isinstance(value, list) or not value or (
                expected is not None and len(value) != expected):
            raise SchemaError(path + ".channels", "expected a list of channels")
        return [channel_from_json(item, "{}.channels[{}]".format(path, i))
                for i, item in enumerate(value)]

    try:
        if kind == "identity":
            return identity()
        if kind == "amplitude_damping":
            return amplitude_damping(number("gamma"))
        if kind == "depolarizing":
            return depolarizing(number("p"))
        if kind == "dephasing":
            return dephasing(number("lambda"))
        if kind == "normal_form":
            return normal_form(vector("t"), vector("D"))
        if kind == "compose":
            first, second = children(2)
            return compose(first, second)
        if kind == "mixture":
            channels = children()
            weights = data.get("weights")
            if not isinstance(weights, list):
                raise SchemaError(path + ".weights", "expected a list")
            return convex_combine(weights, channels)
    except ParameterError as error:
        raise SchemaError(path, str(error))
    raise SchemaError(path + ".type", "unknown channel type {!r}".format(kind))
