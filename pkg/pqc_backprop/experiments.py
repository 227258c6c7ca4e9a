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

"""
Experiment drivers. Each driver takes an ExperimentConfig, builds its
instances from seeds, runs them on the worker pool and returns an
ExperimentTable whose rows are in instance order.
"""

import csv
import hashlib
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from threading import Lock

import numpy as np

from pqc_backprop.channels import amplitude_damping, channel_from_json, \
    damping_of
from pqc_backprop.circuit import dumps_canonical, qaoa_circuit, \
    random_circuit, random_regular_graph
from pqc_backprop.engine import build_deterministic, build_mc, exact_tree, \
    sample_tree
from pqc_backprop.errors import ParameterError, SchemaError
from pqc_backprop.oracle import density_matrix_expectation, \
    ptm_expectation_batch
from pqc_backprop.pauli import LETTERS, PauliString, format_pauli, \
    parse_pauli
from pqc_backprop.rng import STREAM_INSTANCES, philox, randrange, \
    uniform_angles
from pqc_backprop.surrogate import Surrogate, certificate_bound, \
    empirical_l2, l2_distance, l2_from_values, l2_norm, mc_bound
from pqc_backprop.workers import run_tasks

log = logging.getLogger(__name__)

KINDS = ("r_vs_ell", "certificate", "mc", "scaling", "oracle_triangle",
         "orthogonality", "mc_unbiasedness", "random_clifford_decay")
FAMILIES = ("qaoa", "random")
ORACLE_TOLERANCE = 1e-8


@dataclass
class ExperimentConfig:
    """
    One experiment. Size ranges ``qubits`` and ``layers`` are inclusive
    [low, high] pairs; ``nodes``, ``rounds`` and ``gammas`` are cycled over
    the instances. ``sigma`` is the number of standard errors allowed on
    sampled integrals, ``margin`` the slack on Monte-Carlo pass fractions.
    """
    name: str
    kind: str
    description: str = ""
    family: str = "random"
    nodes: list = field(default_factory=lambda: [8])
    degree: int = 3
    rounds: list = field(default_factory=lambda: [1])
    qubits: list = field(default_factory=lambda: [1, 4])
    layers: list = field(default_factory=lambda: [1, 8])
    random_cliffords: bool = False
    noise: dict = None
    gammas: list = field(default_factory=lambda: [0.1])
    ell: list = field(default_factory=lambda: [0, 1, 2])
    trees: int = 100
    delta: float = 0.1
    repeats: int = 1
    instances: int = 1
    samples: int = 1000
    points: int = 5
    sigma: float = 4.0
    margin: float = 0.05
    seed: int = 0
    output: str = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError("kind", "expected one of {}".format(
                ", ".join(KINDS)))
        if self.family not in FAMILIES:
            raise SchemaError("family", "expected qaoa or random")
        if not self.ell or any(not isinstance(ell, int) or ell < 0
                               for ell in self.ell):
            raise SchemaError("ell", "expected a non-empty list of "
                                     "non-negative integers")
        for name in ("repeats", "instances", "trees", "points"):
            if getattr(self, name) < 1:
                raise SchemaError(name, "must be at least 1")
        if self.samples < 2:
            raise SchemaError("samples", "must be at least 2")
        for name in ("qubits", "layers"):
            value = getattr(self, name)
            if len(value) != 2 or not 1 <= value[0] <= value[1]:
                raise SchemaError(name, "expected [low, high] with "
                                        "1 <= low <= high")
        for name in ("nodes", "rounds", "gammas"):
            if not getattr(self, name):
                raise SchemaError(name, "must not be empty")
        if not 0.0 < self.delta < 1.0:
            raise SchemaError("delta", "must lie in (0, 1)")
        if self.noise is not None:
            channel_from_json(self.noise, "noise")

    @property
    def config_hash(self):
        return hashlib.sha256(dumps_canonical(asdict(self)).encode(
            "utf-8")).hexdigest()[:16]


@dataclass
class ExperimentTable:
    name: str
    columns: list
    rows: list = field(default_factory=list)
    passed: bool = None
    notes: list = field(default_factory=list)


@dataclass
class Instance:
    index: int
    seed: int
    circuit: object
    observable: PauliString
    gamma: float
    nodes: int = None
    rounds: int = None


def load_experiments(path):
    with open(path, encoding="utf-8") as handle:
        experiment_data_list = json.load(handle)

    for experiment_data_set in experiment_data_list:
        yield ExperimentConfig(**experiment_data_set)


def find_experiment(path, name):
    for config in load_experiments(path):
        if config.name == name:
            return config
    raise ParameterError("no experiment named {!r} in {}".format(name, path))


def make_instance(cfg, index):
    seed = cfg.seed + index
    generator = philox(seed, STREAM_INSTANCES)
    if cfg.noise is not None:
        noise = channel_from_json(cfg.noise)
    else:
        noise = amplitude_damping(cfg.gammas[index % len(cfg.gammas)])
    gamma = damping_of(noise)

    if cfg.family == "qaoa":
        nodes = cfg.nodes[index % len(cfg.nodes)]
        rounds = cfg.rounds[index % len(cfg.rounds)]
        graph = random_regular_graph(nodes, cfg.degree, seed)
        circuit = qaoa_circuit(graph, rounds, noise)
        edges = sorted(graph.edges())
        i, j = edges[randrange(generator, len(edges))]
        letters = ["I"] * nodes
        letters[i] = letters[j] = "Z"
        return Instance(index, seed, circuit, parse_pauli("".join(letters)),
                        gamma, nodes, rounds)

    n = cfg.qubits[0] + randrange(generator, cfg.qubits[1] - cfg.qubits[0] + 1)
    m = cfg.layers[0] + randrange(generator, cfg.layers[1] - cfg.layers[0] + 1)
    circuit = random_circuit(n, m, noise, seed, cfg.random_cliffords)
    text = "I" * n
    while "I" * n == text:
        text = "".join(LETTERS[randrange(generator, 4)] for _ in range(n))
    return Instance(index, seed, circuit, parse_pauli(text), gamma)


def _run_instances(cfg, function, threads, display, count=None):
    """Run ``function(cfg, instance_index)`` for every instance in order."""
    count = cfg.instances if count is None else count
    lock = Lock()
    done = [0]

    def progress(_):
        if display is None:
            return
        with lock:
            done[0] += 1
            display.update_task(100.0 * done[0] / count, cfg.name,
                                "{}/{}".format(done[0], count))

    results = run_tasks(function, [(cfg, index) for index in range(count)],
                        threads, on_done=progress)
    return [row for rows in results for row in rows]


def _ms(started):
    return round((time.perf_counter() - started) * 1000.0, 3)


def _r_rows(cfg, index):
    instance = make_instance(cfg, index)
    rows = []
    previous = None
    for ell in sorted(cfg.ell):
        started = time.perf_counter()
        report = build_deterministic(instance.circuit, instance.observable,
                                     ell)
        build_ms = _ms(started)
        r = report.r_certificate
        monotone = previous is None or r is None or (
            previous != "exact" and r >= previous)
        if not monotone:
            log.warning("instance %d: r dropped from %s to %s at ell=%d",
                        instance.seed, previous, r, ell)
        previous = "exact" if r is None else r
        rows.append(["instance", instance.seed, instance.nodes,
                     instance.rounds, ell, previous, report.discarded_count,
                     int(monotone), build_ms, None, None, None])
    return rows


def run_r_vs_ell(cfg, threads=1, display=None):
    """
    Certificate r against the cutoff on QAOA instances with a ZZ observable
    on one edge. Per cutoff a summary row gives the mean and the minimum of
    r over the instances that were truncated and the number that were
    exact. The trend is judged by the least-squares slope of the mean.
    """
    if cfg.family != "qaoa":
        raise ParameterError("r_vs_ell needs the qaoa family")
    table = ExperimentTable(cfg.name, [
        "row_type", "instance_seed", "nodes", "rounds", "ell", "r",
        "discarded_count", "monotone", "build_ms", "mean_r", "min_r",
        "exact_count"])
    table.rows = _run_instances(cfg, _r_rows, threads, display)

    ells, means = [], []
    for ell in sorted(cfg.ell):
        values = [row[5] for row in table.rows if row[4] == ell]
        truncated = [r for r in values if r != "exact"]
        mean = float(np.mean(truncated)) if truncated else None
        minimum = min(truncated) if truncated else None
        if mean is not None:
            ells.append(ell)
            means.append(mean)
        table.rows.append(["summary", None, None, None, ell, None, None,
                           None, None, mean, minimum,
                           len(values) - len(truncated)])

    violations = sum(1 for row in table.rows
                     if row[0] == "instance" and not row[7])
    table.notes.append("monotonicity exceptions: {}".format(violations))
    if len(ells) >= 2:
        slope = float(np.polyfit(ells, means, 1)[0])
        table.notes.append("slope of mean r: {:.6g}".format(slope))
        table.passed = slope > 0
    return table


def _certificate_rows(cfg, index):
    instance = make_instance(cfg, index)
    circuit, observable = instance.circuit, instance.observable
    thetas = uniform_angles(instance.seed, cfg.samples, circuit.m)
    reference = ptm_expectation_batch(circuit, observable, thetas)
    exact = exact_tree(circuit, observable).surrogate
    rows = []
    for ell in sorted(cfg.ell):
        report = build_deterministic(circuit, observable, ell)
        estimate, error = l2_from_values(
            report.surrogate.evaluate_batch(thetas), reference)
        bound = certificate_bound(report)
        if report.r_certificate is None:
            passed = estimate <= ORACLE_TOLERANCE
        else:
            passed = estimate <= bound + cfg.sigma * error
        rows.append([instance.seed, circuit.n, circuit.m, instance.gamma, ell,
                     report.r_certificate, bound, estimate, error,
                     l2_distance(report.surrogate, exact), int(passed)])
    return rows


def run_certificate_validation(cfg, threads=1, display=None):
    """Sampled distance to the dense oracle against (1 - gamma)**(r/2)."""
    if make_instance(cfg, 0).gamma is None:
        raise ParameterError("certificate validation needs amplitude damping")
    table = ExperimentTable(cfg.name, [
        "instance_seed", "n", "m", "gamma", "ell", "r", "bound",
        "delta_empirical", "std_error", "delta_analytic", "passed"])
    table.rows = _run_instances(cfg, _certificate_rows, threads, display)
    table.passed = all(row[-1] for row in table.rows)
    return table


def _mc_rows(cfg, index):
    instance = make_instance(cfg, index)
    circuit, observable = instance.circuit, instance.observable
    exact = exact_tree(circuit, observable).surrogate
    rows = []
    for ell in sorted(cfg.ell):
        within = 0
        first = None
        for repeat in range(cfg.repeats):
            report = build_mc(circuit, observable, ell, cfg.trees,
                              instance.seed * (1 << 20) + repeat)
            if first is None:
                first = report
            if instance.gamma is not None:
                bound = mc_bound(ell, cfg.trees, cfg.delta,
                                 gamma=report.gamma_min)
            else:
                bound = mc_bound(ell, cfg.trees, cfg.delta,
                                 contraction=report.contraction)
            if l2_distance(report.surrogate, exact) <= bound:
                within += 1
        fraction = within / cfg.repeats
        required = 1.0 - cfg.delta - cfg.margin
        estimate, error = empirical_l2(
            first.surrogate,
            lambda thetas: ptm_expectation_batch(circuit, observable, thetas),
            cfg.samples, instance.seed)
        consistent = estimate <= bound + cfg.sigma * error
        rows.append([instance.seed, circuit.n, circuit.m,
                     str(circuit.layers[0].noise) if circuit.m else "", ell,
                     cfg.trees, cfg.delta, cfg.repeats, bound, within,
                     fraction, required, estimate, error,
                     int(fraction >= required and consistent)])
    return rows


def run_mc_validation(cfg, threads=1, display=None):
    """
    Fraction of repeated Monte-Carlo builds whose exact distance to the
    untruncated tree stays below the confidence bound. The first repeat is
    also checked against the dense oracle by sampling.
    """
    table = ExperimentTable(cfg.name, [
        "instance_seed", "n", "m", "noise", "ell", "K", "delta", "repeats",
        "bound", "within_bound", "fraction", "required", "delta_empirical",
        "std_error", "passed"])
    table.rows = _run_instances(cfg, _mc_rows, threads, display)
    table.passed = all(row[-1] for row in table.rows)
    return table


def _unbiasedness_rows(cfg, index):
    instance = make_instance(cfg, index)
    circuit, observable = instance.circuit, instance.observable
    exact = exact_tree(circuit, observable).surrogate
    points = uniform_angles(instance.seed, cfg.points, circuit.m)
    values = np.array([
        sample_tree(circuit, observable, None, instance.seed,
                    tree_index=k).evaluate_batch(points)
        for k in range(cfg.trees)])
    expected = exact.evaluate_batch(points)
    rows = []
    for point in range(cfg.points):
        mean = float(np.mean(values[:, point]))
        error = float(np.std(values[:, point], ddof=1) / math.sqrt(
            cfg.trees)) if cfg.trees > 1 else 0.0
        passed = abs(mean - expected[point]) <= cfg.sigma * error + 1e-12
        rows.append([instance.seed, circuit.n, circuit.m, point,
                     float(expected[point]), mean, error, int(passed)])
    return rows


def run_mc_unbiasedness(cfg, threads=1, display=None):
    """Mean of single untruncated trees at fixed angles against the exact value."""
    table = ExperimentTable(cfg.name, [
        "instance_seed", "n", "m", "point", "exact", "mean", "std_error",
        "passed"])
    table.rows = _run_instances(cfg, _unbiasedness_rows, threads, display)
    table.passed = all(row[-1] for row in table.rows)
    return table


def _best_time(cfg, circuit, observable, ell):
    times = []
    for _ in range(cfg.repeats):
        started = time.perf_counter()
        build_deterministic(circuit, observable, ell)
        times.append(_ms(started))
    return min(times)


def run_scaling(cfg, threads=1, display=None):
    """
    Build time of one QAOA instance over the cutoff sweep and over the
    rounds (layer count) at the middle cutoff. Ratios of consecutive cutoffs
    in the middle third of the sweep must stay at or below 3.
    """
    if cfg.family != "qaoa":
        raise ParameterError("scaling needs the qaoa family")
    instance = make_instance(cfg, 0)
    table = ExperimentTable(cfg.name, [
        "sweep", "ell", "m", "build_ms", "ratio", "mid_range", "passed"])
    ells = sorted(cfg.ell)
    low, high = len(ells) // 3, (2 * len(ells) + 2) // 3
    previous = None
    for position, ell in enumerate(ells):
        build_ms = _best_time(cfg, instance.circuit, instance.observable, ell)
        ratio = build_ms / previous if previous else None
        mid = low <= position < high and ratio is not None
        table.rows.append(["ell", ell, instance.circuit.m, build_ms, ratio,
                           int(mid), int(ratio <= 3.0) if mid else None])
        previous = build_ms
        if display is not None:
            display.update(100.0 * (position + 1) / (len(ells) + len(
                cfg.rounds)), "ell={}".format(ell))

    graph = random_regular_graph(instance.nodes, cfg.degree, instance.seed)
    ell = ells[len(ells) // 2]
    sizes, times = [], []
    for position, rounds in enumerate(sorted(cfg.rounds)):
        circuit = qaoa_circuit(graph, rounds, instance.circuit.layers[0].noise)
        build_ms = _best_time(cfg, circuit, instance.observable, ell)
        sizes.append(circuit.m)
        times.append(build_ms)
        table.rows.append(["m", ell, circuit.m, build_ms, None, None, None])
        if display is not None:
            display.update(100.0 * (len(ells) + position + 1) / (
                len(ells) + len(cfg.rounds)), "rounds={}".format(rounds))
    if len(sizes) >= 2 and min(times) > 0:
        exponent = float(np.polyfit(np.log(sizes), np.log(times), 1)[0])
        table.notes.append("time ~ m**{:.3g}".format(exponent))

    checked = [row[-1] for row in table.rows if row[-1] is not None]
    table.passed = all(checked) if checked else None
    return table


def _triangle_rows(cfg, index):
    instance = make_instance(cfg, index)
    circuit, observable = instance.circuit, instance.observable
    exact = exact_tree(circuit, observable).surrogate
    points = uniform_angles(instance.seed, cfg.points, circuit.m)
    tree = exact.evaluate_batch(points)
    ptm = ptm_expectation_batch(circuit, observable, points)
    density = np.array([density_matrix_expectation(circuit, observable, theta)
                        for theta in points])
    gaps = (float(np.max(np.abs(tree - ptm))),
            float(np.max(np.abs(tree - density))),
            float(np.max(np.abs(ptm - density))))
    return [[instance.seed, circuit.n, circuit.m, instance.gamma,
             format_pauli(observable)] + list(gaps) +
            [int(max(gaps) <= ORACLE_TOLERANCE)]]


def run_oracle_triangle(cfg, threads=1, display=None):
    """Pairwise agreement of the exact tree and both dense simulators."""
    table = ExperimentTable(cfg.name, [
        "instance_seed", "n", "m", "gamma", "observable", "tree_vs_ptm",
        "tree_vs_density", "ptm_vs_density", "passed"])
    table.rows = _run_instances(cfg, _triangle_rows, threads, display)
    table.passed = all(row[-1] for row in table.rows)
    return table


def random_surrogate(generator, m, terms):
    """Up to ``terms`` random monomials with standard normal coefficients."""
    coefficients = {}
    for _ in range(terms):
        key = []
        for layer in range(1, m + 1):
            choice = randrange(generator, 3)
            if choice:
                key.append((layer, "cos" if choice == 1 else "sin"))
        coefficients[tuple(key)] = float(generator.standard_normal())
    return Surrogate(m, coefficients)


def _orthogonality_rows(cfg, index):
    seed = cfg.seed + index
    generator = philox(seed, STREAM_INSTANCES)
    m = cfg.layers[0] + randrange(generator, cfg.layers[1] - cfg.layers[0] + 1)
    first = random_surrogate(generator, m, 1 + randrange(generator, 8))
    second = random_surrogate(generator, m, 1 + randrange(generator, 8))
    analytic = l2_distance(first, second)
    estimate, error = empirical_l2(first, second, cfg.samples, seed)
    passed = abs(analytic - estimate) <= cfg.sigma * error + 1e-12
    return [[seed, m, len(first), len(second), analytic, estimate, error,
             int(passed)]]


def run_orthogonality(cfg, threads=1, display=None):
    """Analytic distance of random surrogate pairs against sampled integration."""
    table = ExperimentTable(cfg.name, [
        "pair_seed", "m", "terms_a", "terms_b", "analytic", "empirical",
        "std_error", "passed"])
    table.rows = _run_instances(cfg, _orthogonality_rows, threads, display)
    table.passed = all(row[-1] for row in table.rows)
    return table


def _decay_rows(cfg, index):
    instance = make_instance(cfg, index)
    circuit, observable = instance.circuit, instance.observable
    exact = exact_tree(circuit, observable).surrogate
    norm = l2_norm(exact)
    rows = []
    for ell in sorted(cfg.ell):
        report = build_deterministic(circuit, observable, ell)
        distance = l2_distance(report.surrogate, exact)
        reference = None
        if instance.gamma is not None:
            reference = (1.0 - 2.0 * instance.gamma / 3.0) ** (ell + 1)
        rows.append([instance.seed, circuit.n, circuit.m, instance.gamma, ell,
                     distance, norm, report.r_certificate, reference])
    return rows


def run_random_clifford_decay(cfg, threads=1, display=None):
    """
    Truncation error of circuits with a random single-qubit Clifford after
    every rotation, next to the (1 - 2 gamma / 3)**(ell + 1) average-case
    rate. Informational, nothing is asserted.
    """
    table = ExperimentTable(cfg.name, [
        "instance_seed", "n", "m", "gamma", "ell", "delta_analytic", "norm",
        "r", "reference_rate"])
    table.rows = _run_instances(cfg, _decay_rows, threads, display)
    for ell in sorted(cfg.ell):
        distances = [row[5] for row in table.rows if row[4] == ell]
        table.notes.append("ell={}: mean distance {:.6g}".format(
            ell, float(np.mean(distances))))
    return table


RUNNERS = {
    "r_vs_ell": run_r_vs_ell,
    "certificate": run_certificate_validation,
    "mc": run_mc_validation,
    "scaling": run_scaling,
    "oracle_triangle": run_oracle_triangle,
    "orthogonality": run_orthogonality,
    "mc_unbiasedness": run_mc_unbiasedness,
    "random_clifford_decay": run_random_clifford_decay,
}


def run_experiment(cfg, threads=1, display=None):
    log.info("running experiment %s (%s), config hash %s", cfg.name,
             cfg.kind, cfg.config_hash)
    return RUNNERS[cfg.kind](cfg, threads, display)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def write_table(table, cfg, stream):
    """CSV with a leading comment carrying the config hash, notes last."""
    stream.write("# experiment={} kind={} config-hash={}\n".format(
        cfg.name, cfg.kind, cfg.config_hash))
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(value) for value in row])
    for note in table.notes:
        stream.write("# {}\n".format(note))
