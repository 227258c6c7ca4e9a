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
Trigonometric surrogates: sparse sums of products of cos/sin of the rotation
angles, keyed by monomials ``((layer, "cos"|"sin"), ...)`` with strictly
increasing 1-based layer indices.
"""

import json
import logging
import math
from types import MappingProxyType

import numpy as np

from pqc_backprop.circuit import dumps_canonical, write_atomic
from pqc_backprop.errors import ModeError, ParameterError, SchemaError
from pqc_backprop.rng import uniform_angles

log = logging.getLogger(__name__)

TRIG = ("cos", "sin")


def check_key(key, m):
    """
    :return: the key as a tuple of (layer, trig) tuples
    :raises ParameterError: on unordered, duplicate or out of range layers
    """
    key = tuple((int(layer), trig) for layer, trig in key)
    previous = 0
    for layer, trig in key:
        if trig not in TRIG:
            raise ParameterError("unknown factor {!r}".format(trig))
        if layer <= previous or layer > m:
            raise ParameterError(
                "monomial {} is not strictly increasing within 1..{}".format(
                    list(key), m))
        previous = layer
    return key


class Surrogate:
    """
    Immutable map from monomial key to coefficient. Exact zero coefficients
    are not stored.
    """

    def __init__(self, m, terms=None):
        if m < 0:
            raise ParameterError("angle count must be non-negative")
        self.m = m
        checked = {}
        for key, coeff in (terms or {}).items():
            coeff = float(coeff)
            if coeff != 0.0:
                checked[check_key(key, m)] = coeff
        self._terms = dict(sorted(checked.items()))

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __eq__(self, other):
        if not isinstance(other, Surrogate):
            return NotImplemented
        return self.m == other.m and self._terms == other._terms

    def __repr__(self):
        return "Surrogate(m={}, terms={})".format(self.m, self._terms)

    def coefficient(self, key):
        return self._terms.get(tuple(key), 0.0)

    def _check_same(self, other):
        if self.m != other.m:
            raise ParameterError("angle counts differ: {} and {}".format(
                self.m, other.m))

    def __add__(self, other):
        self._check_same(other)
        keys = sorted(set(self._terms) | set(other._terms))
        return Surrogate(self.m, {key: self.coefficient(key) +
                                  other.coefficient(key) for key in keys})

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, factor):
        return Surrogate(self.m, {key: factor * coeff
                                  for key, coeff in self._terms.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def evaluate(self, theta):
        return evaluate(self, theta)

    def evaluate_batch(self, thetas):
        return evaluate_batch(self, thetas)

    def to_json(self):
        return [{"key": [[layer, trig] for layer, trig in key], "coeff": coeff}
                for key, coeff in self._terms.items()]


def evaluate(s, theta):
    """sum of coeff * prod of trig factors, summed with math.fsum"""
    theta = _angles(s, theta)
    cos, sin = np.cos(theta), np.sin(theta)
    values = []
    for key, coeff in s:
        value = coeff
        for layer, trig in key:
            value *= cos[layer - 1] if trig == "cos" else sin[layer - 1]
        values.append(value)
    return math.fsum(values)


def evaluate_batch(s, thetas):
    """Vectorised evaluation of an (M, m) array of angle vectors."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 2 or thetas.shape[1] != s.m:
        raise ParameterError("expected angle rows of length {}, got {}".format(
            s.m, thetas.shape))
    factors = {"cos": np.cos(thetas), "sin": np.sin(thetas)}
    total = np.zeros(thetas.shape[0])
    for key, coeff in s:
        term = np.full(thetas.shape[0], coeff)
        for layer, trig in key:
            term *= factors[trig][:, layer - 1]
        total += term
    return total


def _angles(s, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.shape[0] != s.m:
        raise ParameterError("expected {} angle(s), got shape {}".format(
            s.m, theta.shape))
    return theta


def l2_distance(s1, s2):
    """
    Exact L2 distance over the angle torus. Distinct monomials are orthogonal
    and a monomial of length k has squared norm 2**-k.
    """
    s1._check_same(s2)
    keys = set(s1.terms) | set(s2.terms)
    squares = [math.ldexp((s1.coefficient(key) - s2.coefficient(key)) ** 2,
                          -len(key)) for key in sorted(keys)]
    return math.sqrt(math.fsum(squares))


def l2_norm(s):
    return l2_distance(s, Surrogate(s.m))


def certificate_bound(report):
    """
    (1 - gamma_min)**(r/2) for a deterministic build, times the weight norm
    sum |w| of a Pauli sum; 0 for an exact build.
    None when some layer is not amplitude damping, since then no bound is
    proved.
    """
    if report.mode == "mc":
        raise ModeError("certificate bounds need a deterministic build")
    if report.r_certificate is None:
        return 0.0
    if not report.formal_bound:
        return None
    return report.weight_norm * (1.0 - report.gamma_min) ** (
        report.r_certificate / 2.0)


def mc_statistical_term(trees, delta, reading="loose"):
    """
    sqrt(2 log(2/delta) / K). ``reading="literal"`` takes the logarithm of
    1/(2 delta) instead, clamped at zero.
    """
    _check_mc(trees, delta)
    if reading == "loose":
        logarithm = math.log(2.0 / delta)
    elif reading == "literal":
        logarithm = max(0.0, math.log(1.0 / (2.0 * delta)))
    else:
        raise ParameterError("unknown reading {!r}".format(reading))
    return math.sqrt(2.0 * logarithm / trees)


def mc_bound(ell, trees, delta, gamma=None, contraction=None,
             reading="loose", weight_norm=1.0):
    """
    Confidence-1-delta bound of a Monte-Carlo build. Pass ``gamma`` for
    amplitude damping or ``contraction`` = max over X, Y of |D_P| + |t_P| for
    other channels. ``ell=None`` drops the truncation term. Both terms are
    scaled by ``weight_norm``, the sum |w| of a Pauli sum.
    """
    _check_mc(trees, delta)
    if (gamma is None) == (contraction is None):
        raise ParameterError("pass exactly one of gamma and contraction")
    if ell is None:
        truncation = 0.0
    elif ell < 0:
        raise ParameterError("ell must be non-negative")
    elif gamma is not None:
        if not 0.0 < gamma <= 1.0:
            raise ParameterError("gamma must lie in (0, 1]")
        truncation = (1.0 - gamma) ** ((ell + 1) / 2.0)
    else:
        if not 0.0 <= contraction <= 1.0:
            raise ParameterError("contraction must lie in [0, 1]")
        truncation = contraction ** (ell + 1)
    if weight_norm < 0:
        raise ParameterError("weight_norm must be non-negative")
    return weight_norm * (truncation + mc_statistical_term(trees, delta,
                                                           reading))


def _check_mc(trees, delta):
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie in (0, 1), got {}".format(delta))
    if trees < 1:
        raise ParameterError("tree count must be at least 1")


def l2_from_values(values, reference):
    """
    Root mean squared difference of two sample vectors and its delta-method
    standard error.
    """
    differences = np.asarray(values, dtype=float) - np.asarray(
        reference, dtype=float)
    if differences.shape[0] < 2:
        raise ParameterError("need at least two samples")
    squares = differences ** 2
    mean = float(np.mean(squares))
    estimate = math.sqrt(mean)
    if estimate == 0.0:
        return 0.0, 0.0
    error = float(np.std(squares, ddof=1)) / math.sqrt(squares.shape[0])
    return estimate, error / (2.0 * estimate)


def empirical_l2(s, reference, samples, seed=0):
    """
    Monte-Carlo estimate of the L2 distance between ``s`` and ``reference``
    over uniform angles. ``reference`` is a Surrogate or a callable taking an
    (M, m) angle array and returning M values.
    """
    if samples < 2:
        raise ParameterError("need at least two samples")
    thetas = uniform_angles(seed, samples, s.m)
    if isinstance(reference, Surrogate):
        s._check_same(reference)
        expected = reference.evaluate_batch(thetas)
    else:
        expected = reference(thetas)
    return l2_from_values(s.evaluate_batch(thetas), expected)


def surrogate_to_json(s, meta):
    return {"meta": dict(meta, m=s.m), "terms": s.to_json()}


def surrogate_from_json(data):
    """
    :return: (surrogate, meta)
    :raises SchemaError: naming the offending field
    """
    if not isinstance(data, dict) or "meta" not in data or "terms" not in data:
        raise SchemaError("$", "expected an object with meta and terms")
    meta = data["meta"]
    if not isinstance(meta, dict) or not isinstance(meta.get("m"), int):
        raise SchemaError("meta.m", "expected an integer")
    if not isinstance(data["terms"], list):
        raise SchemaError("terms", "expected a list")
    terms = {}
    for i, term in enumerate(data["terms"]):
        path = "terms[{}]".format(i)
        if not isinstance(term, dict) or not isinstance(
                term.get("key"), list) or not isinstance(
                    term.get("coeff"), (int, float)):
            raise SchemaError(path, "expected key and coeff")
        try:
            key = check_key([tuple(pair) for pair in term["key"]], meta["m"])
        except (TypeError, ValueError) as error:
            raise SchemaError(path + ".key", str(error))
        if key in terms:
            raise SchemaError(path + ".key", "duplicate monomial")
        terms[key] = term["coeff"]
    return Surrogate(meta["m"], terms), meta


def save_surrogate(s, meta, path):
    write_atomic(path, dumps_canonical(surrogate_to_json(s, meta)))


def load_surrogate(path):
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as error:
            raise SchemaError("$", "invalid JSON: {}".format(error))
    return surrogate_from_json(data)
