#!/usr/bin/python3 -Es
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

import csv
import json
import logging
import os
import sys
from argparse import ArgumentParser, ArgumentTypeError
from gettext import bindtextdomain, textdomain, gettext as _
from io import StringIO
from sys import stderr, exit
from traceback import print_exc

from pqc_backprop.channels import amplitude_damping, channel_from_json, \
    identity
from pqc_backprop.circuit import circuit_hash, dumps_canonical, load_circuit, \
    load_graph, qaoa_angle_map, qaoa_circuit, random_circuit, \
    random_regular_graph, save_circuit, save_graph, write_atomic
from pqc_backprop.display.simple import LinePrintInterface
from pqc_backprop.engine import build_deterministic, build_mc, \
    describe_observable, exact_tree, observable_terms
from pqc_backprop.errors import ParameterError, PqcBackpropError, SchemaError
from pqc_backprop.experiments import ORACLE_TOLERANCE, find_experiment, \
    load_experiments, run_experiment, write_table
from pqc_backprop.oracle import density_matrix_expectation, \
    ptm_expectation_batch
from pqc_backprop.pauli import parse_pauli
from pqc_backprop.surrogate import certificate_bound, empirical_l2, \
    load_surrogate, mc_bound, mc_statistical_term, save_surrogate

log = logging.getLogger(__name__)


def base_path():
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def resource_path(relative_path):
    return os.path.join(base_path(), relative_path)


def _integer(text, low, message):
    try:
        value = int(text)
    except ValueError:
        raise ArgumentTypeError(_("expected an integer, got {!r}").format(
            text))
    if value < low:
        raise ArgumentTypeError(message)
    return value


def non_negative_int(text):
    return _integer(text, 0, _("must be non-negative"))


def positive_int(text):
    return _integer(text, 1, _("must be at least 1"))


def seed_int(text):
    value = _integer(text, 0, _("seeds must be non-negative"))
    if value >= 1 << 64:
        raise ArgumentTypeError(_("seeds must be below 2**64"))
    return value


def open_probability(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise ArgumentTypeError(_("must lie strictly between 0 and 1"))
    return value


def damping(text):
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise ArgumentTypeError(_("must lie in (0, 1]"))
    return value


def unit_interval(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise ArgumentTypeError(_("must lie in [0, 1]"))
    return value


def parse_observable(items):
    """
    ``-o`` values: Pauli text, or WEIGHT:PAULI for one term of a Pauli sum.
    """
    if len(items) == 1 and ":" not in items[0]:
        return parse_pauli(items[0])
    terms = []
    for item in items:
        weight, _separator, text = item.rpartition(":")
        try:
            terms.append((float(weight) if weight else 1.0, parse_pauli(text)))
        except ValueError as error:
            if isinstance(error, PqcBackpropError):
                raise
            raise ParameterError(_("invalid weight in {!r}").format(item))
    return terms


def load_angles(path):
    """Angle rows from a JSON array (of arrays) or from CSV rows."""
    with open(path, encoding="utf-8") as handle:
        if path.endswith(".csv"):
            rows = []
            for line, row in enumerate(csv.reader(handle), start=1):
                if not row or row[0].startswith("#"):
                    continue
                try:
                    rows.append([float(cell) for cell in row])
                except ValueError:
                    if rows:
                        raise SchemaError("{}:{}".format(path, line),
                                          "expected numbers")
            return rows
        try:
            data = json.load(handle)
        except json.JSONDecodeError as error:
            raise SchemaError(path, "invalid JSON: {}".format(error))
    if isinstance(data, list) and data and not isinstance(data[0], list):
        data = [data]
    if not isinstance(data, list) or not all(
            isinstance(row, list) for row in data):
        raise SchemaError(path, "expected an array of angle arrays")
    return data


def print_summary(data):
    print(json.dumps(data, sort_keys=True), file=sys.stdout, flush=True)


def cmd_build(args):
    circuit = load_circuit(args.circuit)
    observable = parse_observable(args.observable)
    if args.exact:
        report = exact_tree(circuit, observable, threads=args.threads,
                            keep_paths=bool(args.trace))
    else:
        if args.ell is None:
            raise ParameterError(_("--ell is required unless --exact is set"))
        report = build_deterministic(circuit, observable, args.ell,
                                     threads=args.threads,
                                     keep_paths=bool(args.trace))
    summary = report.summary()
    summary["bound"] = certificate_bound(report)
    save_surrogate(report.surrogate, report.meta(), args.out)
    if args.trace:
        write_atomic(args.trace, dumps_canonical([
            {"processes": [[layer, label.value]
                           for layer, label in path.processes],
             "pauli": str(path.pauli), "q_factor": path.q_factor,
             "sign": path.sign, "splits": path.splits,
             "h_weight": path.h_weight, "outcome": path.outcome,
             "key": [list(pair) for pair in path.monomial_key],
             "contribution": path.contribution} for path in report.paths]))
    print_summary(summary)
    return 0


def _mc_bounds(ell, trees, delta, gamma, contraction, weight_norm=1.0):
    if gamma is not None:
        bound = mc_bound(ell, trees, delta, gamma=gamma,
                         weight_norm=weight_norm)
    else:
        # no layers: every tree is exact, nothing is truncated
        if contraction is None:
            contraction = 0.0
        bound = mc_bound(ell, trees, delta, contraction=contraction,
                         weight_norm=weight_norm)
    return bound, weight_norm * mc_statistical_term(trees, delta, "literal")


def cmd_sample(args):
    circuit = load_circuit(args.circuit)
    observable = parse_observable(args.observable)
    report = build_mc(circuit, observable, args.ell, args.trees, args.seed,
                      threads=args.threads)
    summary = report.summary()
    summary["mc_bound"], summary["statistical_term_literal"] = _mc_bounds(
        args.ell, args.trees, args.delta, report.gamma_min,
        report.contraction, report.weight_norm)
    summary["delta"] = args.delta
    save_surrogate(report.surrogate, report.meta(), args.out)
    print_summary(summary)
    return 0


def _write_rows(header, rows):
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(value)) for value in row])


def cmd_eval(args):
    surrogate, meta = load_surrogate(args.surrogate)
    rows = load_angles(args.theta)
    if args.qaoa_graph:
        graph = load_graph(args.qaoa_graph)
        thetas = []
        for row in rows:
            if len(row) != 2 * args.rounds:
                raise ParameterError(_(
                    "expected {} per-round angles, got {}").format(
                        2 * args.rounds, len(row)))
            thetas.append(qaoa_angle_map(graph, args.rounds,
                                         row[:args.rounds],
                                         row[args.rounds:]))
    else:
        thetas = rows
    width = len(rows[0]) if rows else surrogate.m
    values = [surrogate.evaluate(theta) for theta in thetas]
    _write_rows(["theta_{}".format(i + 1) for i in range(width)] + ["value"],
                [list(row) + [value] for row, value in zip(rows, values)])
    return 0


def cmd_oracle(args):
    circuit = load_circuit(args.circuit)
    observable = parse_observable(args.observable)
    terms = observable_terms(circuit, observable)
    rows = load_angles(args.theta)
    values = []
    for theta in rows:
        if args.method == "ptm":
            value = sum(weight * float(ptm_expectation_batch(
                circuit, pauli, [theta])[0]) for weight, pauli in terms)
        else:
            value = sum(weight * density_matrix_expectation(
                circuit, pauli, theta) for weight, pauli in terms)
        values.append(value)
    _write_rows(["theta_{}".format(i + 1) for i in range(circuit.m)] +
                ["value"],
                [list(row) + [value] for row, value in zip(rows, values)])
    return 0


def bound_from_meta(meta, delta):
    """The bound a surrogate file's header promises, or None."""
    summary = meta.get("gamma_or_channel_summary") or {}
    gamma, contraction = summary.get("gamma_min"), summary.get("contraction")
    norm = meta.get("weight_norm", 1.0)
    if meta.get("mode") == "mc":
        return _mc_bounds(meta.get("ell"), meta["K"], delta, gamma,
                          contraction, norm)[0]
    r = meta.get("r_certificate")
    if r is None:
        return 0.0
    if not meta.get("formal_bound") or gamma is None:
        return None
    return norm * (1.0 - gamma) ** (r / 2.0)


def cmd_validate(args):
    surrogate, meta = load_surrogate(args.surrogate)
    circuit = load_circuit(args.circuit)
    if meta.get("circuit_hash") and meta["circuit_hash"] != circuit_hash(
            circuit):
        raise SchemaError("meta.circuit_hash",
                          _("surrogate was built for another circuit"))
    text = args.observable or meta.get("observable", "").split()
    terms = observable_terms(circuit, parse_observable(text))

    def reference(thetas):
        return sum(weight * ptm_expectation_batch(circuit, pauli, thetas)
                   for weight, pauli in terms)

    estimate, error = empirical_l2(surrogate, reference, args.samples,
                                   args.seed)
    bound = bound_from_meta(meta, args.delta)
    passed = None if bound is None else \
        estimate <= bound + args.sigma * error + ORACLE_TOLERANCE
    print_summary({"delta_empirical": estimate, "std_error": error,
                   "bound": bound, "sigma": args.sigma, "passed": passed,
                   "mode": meta.get("mode"), "samples": args.samples,
                   "seed": args.seed,
                   "observable": describe_observable(terms)})
    return 1 if passed is False else 0


def _noise(args):
    if args.noise:
        with open(args.noise, encoding="utf-8") as handle:
            try:
                return channel_from_json(json.load(handle))
            except json.JSONDecodeError as error:
                raise SchemaError(args.noise, "invalid JSON: {}".format(error))
    if args.gamma is not None:
        return amplitude_damping(args.gamma)
    return identity()


def cmd_gen(args):
    if args.family == "graph":
        save_graph(random_regular_graph(args.nodes, args.degree, args.seed),
                   args.out)
        return 0
    if args.family == "qaoa":
        if args.graph:
            graph = load_graph(args.graph)
        else:
            graph = random_regular_graph(args.nodes, args.degree, args.seed)
        circuit = qaoa_circuit(graph, args.rounds, _noise(args))
        if args.graph_out:
            save_graph(graph, args.graph_out)
    else:
        circuit = random_circuit(args.qubits, args.layers, _noise(args),
                                 args.seed, args.random_cliffords,
                                 args.two_qubit_density)
    save_circuit(circuit, args.out)
    print_summary({"n": circuit.n, "m": circuit.m,
                   "circuit_hash": circuit_hash(circuit), "out": args.out})
    return 0


def cmd_experiment(args):
    path = args.config or resource_path("experiments.json")
    if args.list:
        for config in load_experiments(path):
            print("{:24} {}".format(config.name, config.description))
        return 0
    if not args.name:
        raise ParameterError(_("name an experiment or pass --list"))
    config = find_experiment(path, args.name)
    display = LinePrintInterface(quiet=args.quiet)
    try:
        table = run_experiment(config, args.threads, display)
    finally:
        display.cleanup()
    output = args.out or config.output
    if output:
        buffer = StringIO()
        write_table(table, config, buffer)
        write_atomic(output, buffer.getvalue())
        print_summary({"experiment": config.name, "passed": table.passed,
                       "rows": len(table.rows), "notes": table.notes,
                       "config_hash": config.config_hash})
    else:
        write_table(table, config, sys.stdout)
    return 1 if table.passed is False else 0


def _circuit_arguments(parser):
    parser.add_argument("-c", "--circuit", required=True,
                        help=_("circuit file (JSON)"))
    parser.add_argument("-o", "--observable", required=True, action="append",
                        help=_("Pauli string, character k acting on qubit "
                               "k; repeat as WEIGHT:PAULI for a Pauli sum"))


def _noise_arguments(parser):
    parser.add_argument("--gamma", type=damping,
                        help=_("amplitude damping after every rotation"))
    parser.add_argument("--noise", help=_("channel file (JSON)"))
    parser.add_argument("--seed", type=seed_int, default=0,
                        help=_("generator seed"))
    parser.add_argument("--out", required=True, help=_("circuit file"))


def argument_parser():
    arg_parser = ArgumentParser(
        prog="pqc-backprop",
        description=_("Trigonometric surrogates of noisy Clifford+Rz "
                      "circuits by Pauli backpropagation"))
    arg_parser.add_argument("-d", "--debug", action="store_true",
                            default=False, help=_("turn debugging mode on"))
    arg_parser.add_argument("-v", "--verbose", action="store_true",
                            default=False, help=_("log progress details"))
    arg_parser.add_argument("--threads", type=non_negative_int,
                            help=_("worker threads, 0 for one per CPU "
                                   "(default: $PQCPROP_THREADS or 1)"))
    commands = arg_parser.add_subparsers(dest="command", required=True)

    build = commands.add_parser("build", help=_("deterministic surrogate"))
    _circuit_arguments(build)
    build.add_argument("--ell", type=non_negative_int,
                       help=_("split cutoff"))
    build.add_argument("--exact", action="store_true",
                       help=_("expand the untruncated tree"))
    build.add_argument("--out", required=True, help=_("surrogate file"))
    build.add_argument("--trace", help=_("write every path to this file"))
    build.set_defaults(run=cmd_build)

    sample = commands.add_parser("sample", help=_("Monte-Carlo surrogate"))
    _circuit_arguments(sample)
    sample.add_argument("--ell", type=non_negative_int, required=True,
                        help=_("cutoff on cos/sin splits"))
    sample.add_argument("--trees", type=positive_int, required=True,
                        help=_("number of sampled trees"))
    sample.add_argument("--seed", type=seed_int, default=0)
    sample.add_argument("--delta", type=open_probability, default=0.05,
                        help=_("failure probability of the reported bound"))
    sample.add_argument("--out", required=True, help=_("surrogate file"))
    sample.set_defaults(run=cmd_sample)

    evaluate = commands.add_parser("eval", help=_("evaluate a surrogate"))
    evaluate.add_argument("surrogate", help=_("surrogate file"))
    evaluate.add_argument("--theta", required=True,
                          help=_("angle rows, JSON or CSV"))
    evaluate.add_argument("--qaoa-graph",
                          help=_("read per-round angles for this graph, "
                                 "cost angles first"))
    evaluate.add_argument("--rounds", type=positive_int, default=1)
    evaluate.set_defaults(run=cmd_eval)

    oracle = commands.add_parser("oracle", help=_("dense simulation"))
    _circuit_arguments(oracle)
    oracle.add_argument("--theta", required=True,
                        help=_("angle rows, JSON or CSV"))
    oracle.add_argument("--method", choices=["ptm", "density"], default="ptm")
    oracle.set_defaults(run=cmd_oracle)

    validate = commands.add_parser(
        "validate", help=_("sampled distance to the dense oracle"))
    validate.add_argument("surrogate", help=_("surrogate file"))
    validate.add_argument("-c", "--circuit", required=True)
    validate.add_argument("-o", "--observable", action="append",
                          help=_("defaults to the surrogate's observable"))
    validate.add_argument("--samples", type=_at_least_two, default=100000)
    validate.add_argument("--seed", type=seed_int, default=0)
    validate.add_argument("--delta", type=open_probability, default=0.05)
    validate.add_argument("--sigma", type=float, default=4.0,
                          help=_("standard errors of slack"))
    validate.set_defaults(run=cmd_validate)

    gen = commands.add_parser("gen", help=_("generate instances"))
    families = gen.add_subparsers(dest="family", required=True)
    qaoa = families.add_parser("qaoa")
    qaoa.add_argument("--nodes", type=positive_int, default=8)
    qaoa.add_argument("--degree", type=positive_int, default=3)
    qaoa.add_argument("--rounds", type=positive_int, default=1)
    qaoa.add_argument("--graph", help=_("use this edge list"))
    qaoa.add_argument("--graph-out", help=_("also write the graph"))
    _noise_arguments(qaoa)
    generic = families.add_parser("random")
    generic.add_argument("--qubits", type=positive_int, required=True)
    generic.add_argument("--layers", type=positive_int, required=True)
    generic.add_argument("--random-cliffords", action="store_true")
    generic.add_argument("--two-qubit-density", type=unit_interval,
                        default=0.5)
    _noise_arguments(generic)
    graph = families.add_parser("graph")
    graph.add_argument("--nodes", type=positive_int, required=True)
    graph.add_argument("--degree", type=positive_int, default=3)
    graph.add_argument("--seed", type=seed_int, default=0)
    graph.add_argument("--out", required=True, help=_("edge list file"))
    gen.set_defaults(run=cmd_gen)

    experiment = commands.add_parser("experiment", help=_("run a sweep"))
    experiment.add_argument("name", nargs="?")
    experiment.add_argument("--config", help=_("experiment file (JSON)"))
    experiment.add_argument("--list", action="store_true")
    experiment.add_argument("--out", help=_("CSV file"))
    experiment.add_argument("-q", "--quiet", action="store_true",
                            help=_("no progress lines"))
    experiment.set_defaults(run=cmd_experiment)
    return arg_parser


def _at_least_two(text):
    return _integer(text, 2, _("need at least two samples"))


def command_line_interface(argv=None):
    bindtextdomain('pqc-backprop')
    textdomain('pqc-backprop')

    args = argument_parser().parse_args(argv)
    level = logging.DEBUG if args.debug else (
        logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(level=level, stream=stderr,
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        exit_code = args.run(args)
    except PqcBackpropError as e:
        exit_code = e.exit_code
        print(_("Error: {}").format(e), file=stderr)
    except FileNotFoundError as e:
        exit_code = 2
        print(e.strerror, e.filename, file=stderr)
    except Exception:
        exit_code = 2
        print(_("Error in pqc-backprop"), file=stderr)
        if args.debug:
            print_exc()

    exit(exit_code)


if __name__ == '__main__':
    command_line_interface()
