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
Pauli backpropagation through noisy Clifford+Rz circuits.

A branch carries a signed Pauli string, the product of its noise factors and
the monomial recording which rotations contributed a cos or a sin. Layers are
walked from the last to the first; at the rotation qubit the noisy rotation
either keeps the Pauli (I), splits it (Z into keep and collapse, X/Y into the
cos/sin pair and a collapse), or, in Monte-Carlo mode, samples one of the
alternatives. After the first layer the branch is conjugated through the
initial Clifford layer and closed against the all-zero state.

Subtrees are expanded depth-first on an explicit stack. The tree is cut into a
fixed number of subtrees independent of the thread count and all
contributions are summed with math.fsum, so results do not depend on the
number of workers.
"""

import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from pqc_backprop.channels import contraction, damping_of, validate
from pqc_backprop.circuit import circuit_hash
from pqc_backprop.errors import AdmissibilityError, ParameterError, \
    ResourceBudgetError
from pqc_backprop.pauli import PauliString, conjugate_bits, format_pauli
from pqc_backprop.rng import tree_generator
from pqc_backprop.surrogate import Surrogate
from pqc_backprop.workers import run_tasks

log = logging.getLogger(__name__)

PRUNE_BELOW = 1e-15
BRANCH_BUDGET = 2 ** 24
FRONTIER_BUDGET = 2 ** 22
# subtrees handed to the worker pool; fixed so the reduction never depends
# on the thread count
SUBTREE_TARGET = 64


class ProcessLabel(Enum):
    ZERO = "0"
    ZERO_Z = "0_Z"
    ZERO_I = "0_I"
    PLUS_X = "+1_X"
    MINUS_X = "-1_X"
    ZERO_X = "0_X"
    PLUS_Y = "+1_Y"
    MINUS_Y = "-1_Y"
    ZERO_Y = "0_Y"

    @property
    def h(self):
        """1 for the trigonometric processes, 0 otherwise."""
        return 1 if self.value[0] in "+-" else 0

    @property
    def axis(self):
        """The Pauli on the rotation qubit this process applies to."""
        return "I" if self is ProcessLabel.ZERO else self.value[-1]


# indexed by axis 0 = X, 1 = Y, 2 = Z
_PLUS = (ProcessLabel.PLUS_X, ProcessLabel.PLUS_Y)
_MINUS = (ProcessLabel.MINUS_X, ProcessLabel.MINUS_Y)
_KEEP = (None, None, ProcessLabel.ZERO_Z)
_COLLAPSE = (ProcessLabel.ZERO_X, ProcessLabel.ZERO_Y, ProcessLabel.ZERO_I)

_CLOSED = "closed"
_DISCARDED = "discarded"
_VANISHED = "vanished"
_SPLIT = "split"


@dataclass(frozen=True)
class Branch:
    """
    A finished path of a traced build. ``processes`` lists (layer, label)
    pairs for every layer the path went through, last layer first.
    """
    pauli: PauliString
    q_factor: float
    sign: int
    monomial_key: tuple
    splits: int
    h_weight: int
    processes: tuple
    outcome: str
    contribution: float = 0.0


@dataclass
class BuildReport:
    surrogate: Surrogate
    mode: str
    ell: int = None
    r_certificate: int = None
    discarded_count: int = 0
    expanded_branch_count: int = 0
    peak_live_branches: int = 0
    closed_count: int = 0
    trees: int = None
    seed: int = None
    formal_bound: bool = False
    gamma_min: float = None
    contraction: float = None
    observable: str = ""
    weight_norm: float = 1.0
    circuit_hash: str = ""
    seconds: float = 0.0
    paths: list = field(default=None, repr=False)

    def meta(self):
        """Header of the surrogate file; holds no timing."""
        return {
            "mode": self.mode,
            "ell": self.ell,
            "K": self.trees,
            "seed": self.seed,
            "r_certificate": self.r_certificate,
            "formal_bound": self.formal_bound,
            "circuit_hash": self.circuit_hash,
            "observable": self.observable,
            "weight_norm": self.weight_norm,
            "gamma_or_channel_summary": {"gamma_min": self.gamma_min,
                                         "contraction": self.contraction},
        }

    def summary(self):
        data = self.meta()
        data.update(terms=len(self.surrogate),
                    discarded=self.discarded_count,
                    branches=self.expanded_branch_count,
                    peak_live=self.peak_live_branches,
                    closed=self.closed_count,
                    build_ms=round(self.seconds * 1000.0, 3))
        return data


class _LayerRule:
    __slots__ = ("ops", "bit", "coefficients")

    def __init__(self, layer):
        self.ops = layer.clifford.heisenberg_ops
        self.bit = 1 << layer.rotation_qubit
        noise = layer.noise
        self.coefficients = tuple(
            (abs(noise.D[a]), int(noise.D[a] < 0),
             abs(noise.t[a]), int(noise.t[a] < 0)) for a in range(3))


class _Expansion:
    """
    Shared, read-only description of one tree walk. With a generator the
    walk samples (Monte-Carlo mode), without one it branches.
    """

    def __init__(self, circuit, ell, prune_below, generator=None,
                 trace=False):
        self.n = circuit.n
        self.rules = tuple(_LayerRule(layer) for layer in circuit.layers)
        self.initial_ops = circuit.initial_clifford.heisenberg_ops
        self.ell = math.inf if ell is None else ell
        self.prune_below = prune_below
        self.generator = generator
        self.trace = trace

    def root(self, observable):
        return (len(self.rules), observable.x, observable.z,
                int(observable.sign < 0), 1.0, (), 0, 0,
                () if self.trace else None)

    def advance(self, frame):
        """
        Walk one branch until it splits, closes, vanishes or is discarded.
        :return: (outcome, final state or child frames, contribution)
        """
        i, x, z, neg, q, key, splits, h, processes = frame
        rules = self.rules
        prune = self.prune_below
        generator = self.generator
        while i > 0 and (x | z):
            rule = rules[i - 1]
            for kind, a, b in rule.ops:
                x, z, neg = conjugate_bits(x, z, neg, kind, a, b)
            bit = rule.bit
            if not x & bit:
                if not z & bit:
                    if processes is not None:
                        processes += ((i, ProcessLabel.ZERO),)
                    i -= 1
                    continue
                axis = 2
            else:
                axis = 1 if z & bit else 0
            keep, keep_neg, collapse, collapse_neg = rule.coefficients[axis]

            if generator is None:
                children = []
                if keep >= prune:
                    if axis == 2:
                        children.append((_KEEP[2], keep, keep_neg, x, z,
                                         None))
                    else:
                        children.append((_PLUS[axis], keep, keep_neg, x, z,
                                         "cos"))
                        # X -> sin Y, Y -> -sin X
                        children.append((_MINUS[axis], keep, keep_neg ^ axis,
                                         x, z ^ bit, "sin"))
                if collapse >= prune:
                    children.append((_COLLAPSE[axis], collapse, collapse_neg,
                                     x & ~bit, z & ~bit, None))
                if not children:
                    return _VANISHED, (i, x, z, neg, q, key, splits, h,
                                       processes), 0.0
                if len(children) > 1:
                    if splits >= self.ell:
                        return _DISCARDED, (i, x, z, neg, q, key, splits, h,
                                            processes), 0.0
                    return _SPLIT, [
                        self._child(i, neg, q, key, splits + 1, h, processes,
                                    child) for child in children], 0.0
                label, factor, child_neg, x, z, trig = children[0]
            else:
                total = keep + collapse
                if total < prune:
                    return _VANISHED, (i, x, z, neg, q, key, splits, h,
                                       processes), 0.0
                if axis == 2:
                    if collapse < prune or (
                            keep >= prune and
                            generator.random() * total < keep):
                        label, child_neg, trig = _KEEP[2], keep_neg, None
                    else:
                        label, child_neg, trig = _COLLAPSE[2], collapse_neg, \
                            None
                        z &= ~bit
                elif keep < prune or (collapse >= prune and
                                      generator.random() * total < collapse):
                    label, child_neg, trig = _COLLAPSE[axis], collapse_neg, \
                        None
                    x &= ~bit
                    z &= ~bit
                else:
                    if splits >= self.ell:
                        return _DISCARDED, (i, x, z, neg, q, key, splits, h,
                                            processes), 0.0
                    children = ((_PLUS[axis], total, keep_neg, x, z, "cos"),
                                (_MINUS[axis], total, keep_neg ^ axis, x,
                                 z ^ bit, "sin"))
                    return _SPLIT, [
                        self._child(i, neg, q, key, splits + 1, h, processes,
                                    child) for child in children], 0.0
                factor = total

            q *= factor
            neg ^= child_neg
            if trig is not None:
                key = ((i, trig),) + key
                h += 1
            if processes is not None:
                processes += ((i, label),)
            i -= 1

        if processes is not None:
            processes += tuple((layer, ProcessLabel.ZERO)
                               for layer in range(i, 0, -1))
        for kind, a, b in self.initial_ops:
            x, z, neg = conjugate_bits(x, z, neg, kind, a, b)
        value = 0.0 if x else (-q if neg else q)
        return _CLOSED, (0, x, z, neg, q, key, splits, h, processes), value

    @staticmethod
    def _child(i, neg, q, key, splits, h, processes, child):
        label, factor, child_neg, x, z, trig = child
        if trig is not None:
            key = ((i, trig),) + key
            h += 1
        if processes is not None:
            processes += ((i, label),)
        return (i - 1, x, z, neg ^ child_neg, q * factor, key, splits, h,
                processes)

    def branch(self, outcome, state, value):
        i, x, z, neg, q, key, splits, h, processes = state
        return Branch(pauli=PauliString(self.n, x, z, -1 if neg else 1),
                      q_factor=q, sign=-1 if neg else 1, monomial_key=key,
                      splits=splits, h_weight=h, processes=processes,
                      outcome=outcome, contribution=value)


class _Tally:
    """Private accumulator of one subtree or tree."""

    def __init__(self):
        self.contributions = {}
        self.expanded = 0
        self.closed = 0
        self.discarded = 0
        self.min_h = None
        self.peak_live = 0
        self.paths = []

    def record(self, expansion, outcome, state, value):
        if outcome == _CLOSED:
            self.closed += 1
            if value != 0.0:
                self.contributions.setdefault(state[5], []).append(value)
        elif outcome == _DISCARDED:
            self.discarded += 1
            h = state[7]
            self.min_h = h if self.min_h is None else min(self.min_h, h)
        if expansion.trace:
            self.paths.append(expansion.branch(outcome, state, value))


def _expand(expansion, frames, branch_budget, frontier_budget):
    tally = _Tally()
    stack = list(reversed(frames))
    while stack:
        frame = stack.pop()
        tally.expanded += 1
        if tally.expanded > branch_budget:
            raise ResourceBudgetError(
                "branch budget", branch_budget,
                "lower ell or use the dense oracle for small circuits")
        outcome, state, value = expansion.advance(frame)
        if outcome == _SPLIT:
            stack.extend(reversed(state))
            if len(stack) > frontier_budget:
                raise ResourceBudgetError("frontier budget", frontier_budget)
            tally.peak_live = max(tally.peak_live, len(stack))
        else:
            tally.record(expansion, outcome, state, value)
    return tally


def _partition(expansion, root, tally):
    """
    Expand breadth-first until SUBTREE_TARGET frames are pending. Branches
    finishing on the way go to ``tally``.
    """
    queue = deque([root])
    while queue and len(queue) < SUBTREE_TARGET:
        tally.expanded += 1
        outcome, state, value = expansion.advance(queue.popleft())
        if outcome == _SPLIT:
            queue.extend(state)
        else:
            tally.record(expansion, outcome, state, value)
        tally.peak_live = max(tally.peak_live, len(queue))
    return list(queue)


def _coefficients(tallies):
    """Per-key fsum over all contributions, in task order."""
    merged = {}
    for tally in tallies:
        for key, values in tally.contributions.items():
            merged.setdefault(key, []).extend(values)
    return {key: math.fsum(values) for key, values in merged.items()}


def check_admissible(circuit):
    """
    :raises AdmissibilityError: naming the first layer whose channel breaks
      the normal-form constraints or saturates a non-unital X/Y axis
    """
    reports = {}
    for i, layer in enumerate(circuit.layers, start=1):
        if layer.noise not in reports:
            reports[layer.noise] = validate(layer.noise)
        report = reports[layer.noise]
        if not report.passed:
            raise AdmissibilityError(
                "layer {}: channel {} violates the normal-form constraints "
                "(axis sums {}, constraint maximum {:.6g})".format(
                    i, layer.noise, report.axis_sums, report.constraint_max))
        if not report.admissible:
            raise AdmissibilityError(
                "layer {}: channel {} saturates the non-unital axis {}".format(
                    i, layer.noise, report.saturating_axis))


def observable_terms(circuit, observable):
    """
    Normalise a PauliString or a sequence of (weight, PauliString) pairs.
    """
    if isinstance(observable, PauliString):
        terms = [(1.0, observable)]
    else:
        terms = [(float(weight), pauli) for weight, pauli in observable]
        if not terms:
            raise ParameterError("empty Pauli sum")
    for _, pauli in terms:
        if pauli.n != circuit.n:
            raise ParameterError(
                "observable {} has {} qubit(s), circuit has {}".format(
                    format_pauli(pauli), pauli.n, circuit.n))
    return terms


def weight_norm(terms):
    """sum of |w| over a Pauli sum; every error bound scales with it"""
    return math.fsum(abs(weight) for weight, _ in terms)


def describe_observable(terms):
    if len(terms) == 1 and terms[0][0] == 1.0:
        return format_pauli(terms[0][1])
    return " ".join("{!r}:{}".format(weight, format_pauli(pauli))
                    for weight, pauli in terms)


def _check_ell(ell):
    if ell is not None and (isinstance(ell, bool) or not isinstance(
            ell, int) or ell < 0):
        raise ParameterError("ell must be a non-negative integer, got {!r}"
                             .format(ell))


def _noise_summary(report, circuit):
    gammas = [damping_of(channel) for channel in circuit.channels()]
    if gammas and all(gamma is not None for gamma in gammas):
        report.gamma_min = min(gammas)
    if circuit.m:
        report.contraction = max(contraction(channel)
                                 for channel in circuit.channels())


def _branching_build(circuit, observable, ell, mode, threads, prune_below,
                     branch_budget, frontier_budget, keep_paths):
    _check_ell(ell)
    check_admissible(circuit)
    terms = observable_terms(circuit, observable)
    started = time.perf_counter()
    expansion = _Expansion(circuit, ell, prune_below, trace=keep_paths)

    surrogate = Surrogate(circuit.m)
    tallies = []
    for weight, pauli in terms:
        head = _Tally()
        frames = _partition(expansion, expansion.root(pauli), head)
        log.debug("%s: %d subtree(s) after partitioning", format_pauli(pauli),
                  len(frames))
        tallies_of_term = [head] + run_tasks(
            _expand, [(expansion, [frame], branch_budget, frontier_budget)
                      for frame in frames], threads)
        surrogate = surrogate + weight * Surrogate(
            circuit.m, _coefficients(tallies_of_term))
        tallies.extend(tallies_of_term)

    report = BuildReport(surrogate=surrogate, mode=mode, ell=ell)
    _fill_counts(report, tallies, branch_budget)
    minima = [tally.min_h for tally in tallies if tally.min_h is not None]
    report.r_certificate = min(minima) if minima else None
    _noise_summary(report, circuit)
    report.formal_bound = report.gamma_min is not None or circuit.m == 0
    report.observable = describe_observable(terms)
    report.weight_norm = weight_norm(terms)
    report.circuit_hash = circuit_hash(circuit)
    if keep_paths:
        report.paths = [path for tally in tallies for path in tally.paths]
    report.seconds = time.perf_counter() - started
    log.info("%s build: %d term(s), r=%s, %d discarded, %d branches",
             mode, len(surrogate), report.r_certificate,
             report.discarded_count, report.expanded_branch_count)
    return report


def _fill_counts(report, tallies, branch_budget=None):
    report.expanded_branch_count = sum(t.expanded for t in tallies)
    report.closed_count = sum(t.closed for t in tallies)
    report.discarded_count = sum(t.discarded for t in tallies)
    report.peak_live_branches = max((t.peak_live for t in tallies), default=0)
    if branch_budget is not None and \
            report.expanded_branch_count > branch_budget:
        raise ResourceBudgetError(
            "branch budget", branch_budget,
            "lower ell or use the dense oracle for small circuits")


def build_deterministic(circuit, observable, ell, threads=1,
                        prune_below=PRUNE_BELOW, branch_budget=BRANCH_BUDGET,
                        frontier_budget=FRONTIER_BUDGET, keep_paths=False):
    """
    Truncated backpropagation: a branch that would split for the
    (ell + 1)-th time is discarded and its count of cos/sin factors
    recorded. The report's ``r_certificate`` is the smallest such count.

    :param observable: a PauliString or a sequence of (weight, PauliString)
    :param keep_paths: keep every finished branch in ``report.paths``
    """
    return _branching_build(circuit, observable, ell, "deterministic",
                            threads, prune_below, branch_budget,
                            frontier_budget, keep_paths)


def exact_tree(circuit, observable, threads=1, prune_below=PRUNE_BELOW,
               branch_budget=BRANCH_BUDGET, frontier_budget=FRONTIER_BUDGET,
               keep_paths=False):
    """Untruncated expansion: the exact trigonometric form of the circuit."""
    return _branching_build(circuit, observable, None, "exact", threads,
                            prune_below, branch_budget, frontier_budget,
                            keep_paths)


def _tree_tally(circuit, pauli, ell, seed, tree_index, prune_below,
                branch_budget, frontier_budget):
    expansion = _Expansion(circuit, ell, prune_below,
                           generator=tree_generator(seed, tree_index))
    return _expand(expansion, [expansion.root(pauli)], branch_budget,
                   frontier_budget)


def sample_tree(circuit, observable, ell, seed, tree_index=0,
                prune_below=PRUNE_BELOW, branch_budget=BRANCH_BUDGET,
                frontier_budget=FRONTIER_BUDGET):
    """
    One Monte-Carlo tree, drawn from the generator of tree ``tree_index``
    of ``seed``. ``ell=None`` disables truncation.
    """
    _check_ell(ell)
    check_admissible(circuit)
    surrogate = Surrogate(circuit.m)
    for weight, pauli in observable_terms(circuit, observable):
        tally = _tree_tally(circuit, pauli, ell, seed, tree_index,
                            prune_below, branch_budget, frontier_budget)
        surrogate = surrogate + weight * Surrogate(
            circuit.m, _coefficients([tally]))
    return surrogate


def build_mc(circuit, observable, ell, trees, seed, threads=1,
             prune_below=PRUNE_BELOW, branch_budget=BRANCH_BUDGET,
             frontier_budget=FRONTIER_BUDGET):
    """
    Average of ``trees`` sampled trees; tree k draws from stream k + 1 of
    ``seed``. Every tree of a Pauli sum reuses the same streams.
    """
    _check_ell(ell)
    if isinstance(trees, bool) or not isinstance(trees, int) or trees < 1:
        raise ParameterError("tree count must be a positive integer")
    check_admissible(circuit)
    terms = observable_terms(circuit, observable)
    started = time.perf_counter()

    surrogate = Surrogate(circuit.m)
    tallies = []
    for weight, pauli in terms:
        tree_tallies = run_tasks(
            _tree_tally, [(circuit, pauli, ell, seed, k, prune_below,
                           branch_budget, frontier_budget)
                          for k in range(trees)], threads)
        per_key = {}
        for tally in tree_tallies:
            for key, value in _coefficients([tally]).items():
                per_key.setdefault(key, []).append(value)
        surrogate = surrogate + weight * Surrogate(
            circuit.m, {key: math.fsum(values) / trees
                        for key, values in per_key.items()})
        tallies.extend(tree_tallies)

    report = BuildReport(surrogate=surrogate, mode="mc", ell=ell,
                         trees=trees, seed=seed)
    _fill_counts(report, tallies)
    _noise_summary(report, circuit)
    report.observable = describe_observable(terms)
    report.weight_norm = weight_norm(terms)
    report.circuit_hash = circuit_hash(circuit)
    report.seconds = time.perf_counter() - started
    log.info("mc build: %d tree(s), %d term(s), %d discarded", trees,
             len(surrogate), report.discarded_count)
    return report
