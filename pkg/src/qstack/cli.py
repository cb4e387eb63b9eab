"""Command-line entry point.

JSON results go to stdout, diagnostics to stderr. Exit codes: 0 success,
1 domain error (solver, oracle, simulator cap), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import qasm
from .compiler import CompileOptions, Topology, compile_circuit, compile_report
from .errors import BadPenaltyError, QStackError
from .kernels import AlignmentQuery, RbConfig, ReferenceIndex, grover_align, run_rb
from .optimizer import (
    AnnealSchedule,
    QuboModel,
    TspInstance,
    anneal,
    brute_force,
    brute_force_tour,
    encode_tsp,
    qaoa_optimize,
    qubo_to_ising,
)
from .optimizer.qubo import evaluate
from .simulator import NoiseModel, run

BRUTE_TSP_MAX_CITIES = 10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _read_text(path: str, what: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    try:
        return p.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc}")


def _load_circuit(path: str):
    return qasm.parse(_read_text(path, "circuit"))


def _load_topology(path: str) -> Topology:
    text = _read_text(path, "topology")
    try:
        return Topology.from_dict(json.loads(text))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad topology file {path}: {exc}")


def _noise(text: str) -> NoiseModel:
    try:
        return NoiseModel.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc))


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _lengths(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# ---------------------------------------------------------------- subcommands


def cmd_compile(args) -> int:
    circuit = _load_circuit(args.input)
    topo = _load_topology(args.topology)
    scheduled = compile_circuit(circuit, topo, CompileOptions(args.placement))
    report = compile_report(scheduled)
    text = qasm.print_circuit(scheduled.circuit, scheduled.start_cycles)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    _emit(report)
    return 0


def cmd_sim(args) -> int:
    circuit = _load_circuit(args.input)
    noise = _noise(args.noise)
    target = circuit
    if args.topology:
        target = compile_circuit(circuit, _load_topology(args.topology))
    _emit(run(target, noise, args.shots, args.seed).to_dict())
    return 0


def _load_tsp(args) -> TspInstance:
    try:
        if args.cities:
            _read_text(args.cities, "cities")
            return TspInstance.load_csv(args.cities)
        _read_text(args.weights, "weights")
        return TspInstance.load_json(args.weights)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad TSP input: {exc}")


def _qaoa_solve(model: QuboModel, args) -> tuple[tuple[int, ...], dict]:
    trace: list = []
    params, best = qaoa_optimize(
        qubo_to_ising(model), args.layers, args.shots, args.seed, args.budget, trace=trace
    )
    return best.bits, {"layers": args.layers, "shots_per_eval": args.shots, "evaluations": len(trace),
                       "params": params.to_dict(), "best_mean_energy": min(e.mean_energy for e in trace)}


def _anneal_solve(model: QuboModel, args) -> tuple[tuple[int, ...], dict]:
    best = anneal(model, AnnealSchedule(sweeps=args.sweeps), args.restarts, args.seed)
    return best.bits, {"restarts": args.restarts, "sweeps": args.sweeps, "seed": args.seed}


def cmd_tsp(args) -> int:
    instance = _load_tsp(args)
    n = instance.num_cities
    if args.method == "brute":
        if n > BRUTE_TSP_MAX_CITIES:
            raise UsageError(f"--method brute is capped at {BRUTE_TSP_MAX_CITIES} cities, got {n}")
        tour, cost = brute_force_tour(instance)
        _emit({
            "method": "brute",
            "cities": n,
            "tour": tour,
            "tour_names": [instance.names[c] for c in tour],
            "cost": cost,
            "telemetry": {"tours_enumerated": _factorial(n - 1)},
        })
        return 0
    if n < 3:
        raise UsageError("QUBO encoding needs at least 3 cities")
    try:
        model, decoder = encode_tsp(instance, args.penalty)
    except BadPenaltyError as exc:
        raise UsageError(f"--penalty: {exc}")
    solve = _anneal_solve if args.method == "anneal" else _qaoa_solve
    bits, telemetry = solve(model, args)
    tour = decoder.decode(bits)
    _emit({
        "method": args.method,
        "cities": n,
        "variables": model.n,
        "penalty": model.offset / (2 * n),
        "bits": "".join(map(str, bits)),
        "energy": evaluate(model, bits),
        "feasible": tour is not None,
        "tour": tour,
        "tour_names": [instance.names[c] for c in tour] if tour else None,
        "cost": instance.tour_cost(tour) if tour else None,
        "telemetry": telemetry,
    })
    return 0 if tour is not None else 1


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def cmd_solve(args) -> int:
    text = _read_text(args.input, "QUBO")
    try:
        model = QuboModel.from_dict(json.loads(text))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad QUBO file: {exc}")
    if args.method == "brute":
        best = brute_force(model)
        bits, telemetry = best.bits, {"assignments": 1 << model.n}
    elif args.method == "anneal":
        bits, telemetry = _anneal_solve(model, args)
    else:
        bits, telemetry = _qaoa_solve(model, args)
    _emit({"method": args.method, "n": model.n, "bits": "".join(map(str, bits)),
           "energy": evaluate(model, bits), "telemetry": telemetry})
    return 0


def cmd_align(args) -> int:
    reference = _read_text(args.ref, "reference")
    noise = _noise(args.noise)
    topo = _load_topology(args.topology) if args.topology else None
    try:
        query = AlignmentQuery(args.read, args.mismatch)
        index = ReferenceIndex.build(reference, len(query.read))
    except ValueError as exc:
        raise UsageError(str(exc))
    iterations = args.iterations
    if iterations not in ("exact", "unknown"):
        try:
            iterations = int(iterations)
        except ValueError:
            raise UsageError(f"--iterations must be exact, unknown or an integer, got {iterations!r}")
        if iterations < 0:
            raise UsageError("--iterations must be nonnegative")
    result = grover_align(index, query, noise, args.shots, args.seed, iterations, topo)
    payload = result.to_dict()
    payload["ranking"] = payload["ranking"][: args.top]
    payload["index_size"] = index.size
    _emit(payload)
    return 0


def cmd_rb(args) -> int:
    try:
        config = RbConfig(args.lengths, args.sequences, args.p, args.shots)
    except ValueError as exc:
        raise UsageError(str(exc))
    result = run_rb(config, args.seed)
    payload = result.to_dict()
    payload["config"] = {"p": args.p, "sequences": args.sequences, "shots": args.shots, "seed": args.seed}
    _emit(payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qstack", description="Quantum accelerator toolchain: compile, simulate, solve, align, benchmark.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compile", help="map, route and schedule a circuit for a topology")
    p.add_argument("input")
    p.add_argument("--topology", required=True)
    p.add_argument("--out")
    p.add_argument("--report")
    p.add_argument("--placement", choices=("identity", "interaction"), default="identity")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("sim", help="run a circuit on the simulator")
    p.add_argument("input")
    p.add_argument("--noise", default="perfect")
    p.add_argument("--shots", type=_positive, default=1024)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--topology", help="compile for this topology before running")
    p.set_defaults(func=cmd_sim)

    def solver_flags(p):
        p.add_argument("--method", choices=("brute", "anneal", "qaoa"), default="anneal")
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--restarts", type=_positive, default=25)
        p.add_argument("--sweeps", type=_positive, default=5000)
        p.add_argument("--layers", type=_positive, default=1)
        p.add_argument("--shots", type=_positive, default=512, help="QAOA shots per evaluation")
        p.add_argument("--budget", type=_positive, default=100, help="QAOA circuit evaluations")

    p = sub.add_parser("tsp", help="solve a travelling-salesman instance")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--cities", help="CSV of city_id,x,y")
    src.add_argument("--weights", help="JSON weight matrix")
    p.add_argument("--penalty", type=float)
    solver_flags(p)
    p.set_defaults(func=cmd_tsp)

    p = sub.add_parser("solve", help="minimise a QUBO given as JSON {n, terms}")
    p.add_argument("input")
    solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("align", help="Grover read alignment against a reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--read", required=True)
    p.add_argument("--mismatch", type=int, default=0)
    p.add_argument("--noise", default="perfect")
    p.add_argument("--shots", type=_positive, default=1024)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--iterations", default="exact")
    p.add_argument("--topology")
    p.add_argument("--top", type=_positive, default=10, help="ranked entries to print")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("rb", help="single-qubit randomized benchmarking")
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--lengths", type=_lengths, default=(2, 4, 8, 16, 32, 64, 128, 256))
    p.add_argument("--sequences", type=_positive, default=30)
    p.add_argument("--shots", type=_positive, default=500)
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_rb)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except qasm.SourceError as exc:
        print(f"parse error at line {exc.line}, column {exc.column}: {exc.kind}: {exc.message}", file=sys.stderr)
        return 2
    except QStackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
