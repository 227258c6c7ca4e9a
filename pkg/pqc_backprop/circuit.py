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
Circuit representation

    U(theta) = (o_i C_i o Rz^{(q_i)}(theta_i) o N_i) o C_0

with JSON serialisation and the benchmark generators (QAOA on random regular
graphs, random Clifford+Rz circuits).
"""

import hashlib
import json
import os
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from tempfile import mkstemp

import networkx as nx
import numpy as np

from pqc_backprop.channels import channel_from_json, identity
from pqc_backprop.errors import GraphGenerationError, ParameterError, \
    SchemaError
from pqc_backprop.pauli import CliffordGate, CliffordLayer, PauliString, \
    conjugate_layer, format_pauli
from pqc_backprop.rng import philox, randrange

RESTART_BUDGET = 10 ** 4

_RANDOM_SINGLE = ("H", "S", "SDG", "X", "Y", "Z")
_RANDOM_TWO = ("CX", "CZ", "SWAP")


@dataclass(frozen=True)
class Layer:
    noise: object
    rotation_qubit: int
    clifford: CliffordLayer = field(default_factory=CliffordLayer)

    def to_json(self):
        return {"noise": self.noise.to_json(),
                "rotation_qubit": self.rotation_qubit,
                "clifford": self.clifford.to_json()}


@dataclass(frozen=True)
class Circuit:
    n: int
    initial_clifford: CliffordLayer = field(default_factory=CliffordLayer)
    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        self.check()

    @property
    def m(self):
        return len(self.layers)

    def check(self):
        """
        :raises SchemaError: naming the first offending field
        """
        if not isinstance(self.n, int) or self.n < 1:
            raise SchemaError("n", "expected a positive integer")
        _check_clifford(self.initial_clifford, self.n, "initial_clifford")
        for i, layer in enumerate(self.layers):
            if not 0 <= layer.rotation_qubit < self.n:
                raise SchemaError("layers[{}].rotation_qubit".format(i),
                                  "qubit {} outside of {} qubit(s)".format(
                                      layer.rotation_qubit, self.n))
            _check_clifford(layer.clifford, self.n,
                            "layers[{}].clifford".format(i))

    def channels(self):
        return [layer.noise for layer in self.layers]

    def to_json(self):
        return {"n": self.n,
                "initial_clifford": self.initial_clifford.to_json(),
                "layers": [layer.to_json() for layer in self.layers]}


def _check_clifford(layer, n, path):
    for j, gate in enumerate(layer.gates):
        if max(gate.qubits) >= n:
            raise SchemaError("{}[{}].qubits".format(path, j),
                              "qubit {} outside of {} qubit(s)".format(
                                  max(gate.qubits), n))


def check_angles(circuit, theta):
    """
    :return: the angle vector as a float array
    :raises ParameterError: if the length differs from the layer count
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.shape[0] != circuit.m:
        raise ParameterError("expected {} angle(s), got shape {}".format(
            circuit.m, theta.shape))
    return theta


def dumps_canonical(data):
    """Sorted keys, compact separators, shortest round-trip floats."""
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def circuit_hash(circuit):
    return hashlib.sha256(dumps_canonical(circuit.to_json()).encode(
        "utf-8")).hexdigest()[:16]


def circuit_from_json(data):
    if not isinstance(data, dict):
        raise SchemaError("$", "expected an object")
    for key in ("n", "initial_clifford", "layers"):
        if key not in data:
            raise SchemaError(key, "missing")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SchemaError("n", "expected a positive integer")
    if not isinstance(data["layers"], list):
        raise SchemaError("layers", "expected a list")
    initial = CliffordLayer.from_json(data["initial_clifford"],
                                      "initial_clifford")
    layers = []
    for i, item in enumerate(data["layers"]):
        path = "layers[{}]".format(i)
        if not isinstance(item, dict):
            raise SchemaError(path, "expected an object")
        for key in ("noise", "rotation_qubit", "clifford"):
            if key not in item:
                raise SchemaError("{}.{}".format(path, key), "missing")
        qubit = item["rotation_qubit"]
        if isinstance(qubit, bool) or not isinstance(qubit, int):
            raise SchemaError(path + ".rotation_qubit", "expected an integer")
        layers.append(Layer(channel_from_json(item["noise"], path + ".noise"),
                            qubit,
                            CliffordLayer.from_json(item["clifford"],
                                                    path + ".clifford")))
    return Circuit(n, initial, tuple(layers))


def load_circuit(path):
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as error:
            raise SchemaError("$", "invalid JSON: {}".format(error))
    return circuit_from_json(data)


def write_atomic(path, text):
    """Write to a temporary file next to ``path`` and rename on success."""
    directory = os.path.dirname(os.path.abspath(path))
    handle, temporary = mkstemp(prefix=".pqc-", dir=directory)
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as stream:
            stream.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise


def save_circuit(circuit, path):
    write_atomic(path, dumps_canonical(circuit.to_json()))


def random_regular_graph(nodes, degree=3, seed=0, restarts=RESTART_BUDGET):
    """
    Uniform pairing model: ``degree`` points per node are matched by a random
    permutation; matchings with loops or multi-edges are rejected and the
    whole matching is redrawn.
    :raises GraphGenerationError: on odd point count or exhausted restarts
    """
    if degree < 1 or nodes <= degree:
        raise GraphGenerationError(
            "need nodes > degree >= 1, got nodes={} degree={}".format(
                nodes, degree))
    if nodes * degree % 2:
        raise GraphGenerationError(
            "nodes * degree = {} is odd".format(nodes * degree))
    generator = philox(seed)
    points = np.repeat(np.arange(nodes), degree)
    for _ in range(restarts):
        order = points[generator.permutation(points.shape[0])]
        edges = set()
        for k in range(0, order.shape[0], 2):
            u, v = int(order[k]), int(order[k + 1])
            edge = (min(u, v), max(u, v))
            if u == v or edge in edges:
                break
            edges.add(edge)
        else:
            graph = nx.Graph()
            graph.add_nodes_from(range(nodes))
            graph.add_edges_from(sorted(edges))
            assert all(d == degree for _, d in graph.degree())
            return graph
    raise GraphGenerationError(
        "no simple {}-regular graph on {} nodes after {} restarts".format(
            degree, nodes, restarts))


def load_graph(path):
    graph = nx.read_edgelist(path, nodetype=int)
    if nx.number_of_selfloops(graph):
        raise SchemaError(path, "graph has self-loops")
    return graph


def save_graph(graph, path):
    lines = ["{} {}".format(u, v) for u, v in _edges(graph)]
    write_atomic(path, "\n".join(lines) + "\n")


def _edges(graph):
    return sorted((min(u, v), max(u, v)) for u, v in graph.edges())


def qaoa_circuit(graph, rounds, noise):
    """
    Per round: for each edge (i, j) the cost term CX(i,j) Rz_j CX(i,j), then
    for each node the mixer H Rz H. C_0 prepares |+>^n.
    """
    if rounds < 1:
        raise ParameterError("rounds must be at least 1")
    nodes = sorted(graph.nodes())
    if nodes != list(range(len(nodes))):
        raise ParameterError("graph nodes must be 0..n-1")
    n = len(nodes)
    edges = _edges(graph)

    segments = [[CliffordGate("H", (q,)) for q in nodes]]
    rotations = []

    def rotate(qubit, around):
        segments[-1].extend(around)
        rotations.append(qubit)
        segments.append(list(around))

    for _ in range(rounds):
        for i, j in edges:
            rotate(j, [CliffordGate("CX", (i, j))])
        for q in nodes:
            rotate(q, [CliffordGate("H", (q,))])

    layers = tuple(Layer(noise, q, CliffordLayer(tuple(segment)))
                   for q, segment in zip(rotations, segments[1:]))
    return Circuit(n, CliffordLayer(tuple(segments[0])), layers)


def qaoa_angle_map(graph, rounds, cost_angles, mixer_angles):
    """
    Expand per-round angles into the per-rotation angle vector of
    ``qaoa_circuit``: every cost rotation of round p gets cost_angles[p] and
    every mixer rotation mixer_angles[p].
    """
    if len(cost_angles) != rounds or len(mixer_angles) != rounds:
        raise ParameterError("need one cost and one mixer angle per round")
    edge_count = graph.number_of_edges()
    node_count = graph.number_of_nodes()
    theta = []
    for p in range(rounds):
        theta.extend([float(cost_angles[p])] * edge_count)
        theta.extend([float(mixer_angles[p])] * node_count)
    return np.asarray(theta)


@lru_cache(maxsize=None)
def single_qubit_cliffords():
    """
    The 24 single-qubit Cliffords as shortest H/S words, in breadth-first
    order; two words are the same element when they map X and Z to the same
    signed Paulis.
    """
    x, z = PauliString.single(1, 0, "X"), PauliString.single(1, 0, "Z")

    def action(word):
        layer = CliffordLayer(tuple(CliffordGate(g, (0,)) for g in word))
        return format_pauli(conjugate_layer(x, layer)), format_pauli(
            conjugate_layer(z, layer))

    words = [()]
    seen = {action(())}
    queue = deque(words)
    while queue:
        word = queue.popleft()
        for gate in ("H", "S"):
            candidate = word + (gate,)
            key = action(candidate)
            if key not in seen:
                seen.add(key)
                words.append(candidate)
                queue.append(candidate)
    assert len(words) == 24
    return tuple(words)


def random_circuit(n, m, noise=None, seed=0,
                   single_qubit_random_cliffords=False,
                   two_qubit_density=0.5):
    """
    Random Clifford+Rz circuit. Each layer draws its rotation qubit, an
    optional random single-qubit Clifford on that qubit and n random gates,
    a gate being two-qubit with probability ``two_qubit_density``. Structural
    draws use integers only.
    """
    if n < 1 or m < 1:
        raise ParameterError("n and m must be at least 1")
    if not 0.0 <= two_qubit_density <= 1.0:
        raise ParameterError("two_qubit_density must lie in [0, 1]")
    noise = noise if noise is not None else identity()
    threshold = int(round(two_qubit_density * 1000))
    cliffords = single_qubit_cliffords()
    generator = philox(seed)

    def random_gate():
        if n > 1 and randrange(generator, 1000) < threshold:
            a = randrange(generator, n)
            b = randrange(generator, n - 1)
            if b >= a:
                b += 1
            return CliffordGate(_RANDOM_TWO[randrange(generator, 3)], (a, b))
        return CliffordGate(_RANDOM_SINGLE[randrange(generator, 6)],
                            (randrange(generator, n),))

    layers = []
    for _ in range(m):
        qubit = randrange(generator, n)
        gates = []
        if single_qubit_random_cliffords:
            word = cliffords[randrange(generator, len(cliffords))]
            gates.extend(CliffordGate(g, (qubit,)) for g in word)
        gates.extend(random_gate() for _ in range(n))
        layers.append(Layer(noise, qubit, CliffordLayer(tuple(gates))))
    initial = CliffordLayer(tuple(random_gate() for _ in range(n)))
    return Circuit(n, initial, tuple(layers))
