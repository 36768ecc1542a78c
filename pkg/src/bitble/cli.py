"""Command-line front end: ``bitble encode | laplacian | stateprep | bench``.

Exit codes: 0 success, 1 bad arguments or unreadable input, 2 the requested
verification exceeds the simulator's qubit cap, 3 verification failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
import time

import numpy as np

from . import __version__
from .circuit import count_gates, export_text, size_metric
from .generators import (ParseError, laplacian_1d, laplacian_2d, load_csv, load_matrix,
                         random_matrix, save_csv)
from .protocols import PROTOCOLS, SIGN_MODES, synthesize
from .simulate import MAX_UNITARY_QUBITS, MAX_STATE_QUBITS, apply_to_state, verify_block
from .state_prep import normalize_state, state_prep_circuit

log = logging.getLogger("bitble")

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_VERIFY = 0, 1, 2, 3
VERIFY_TOL = 1e-8
SCHEMA = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("BITBLE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"BITBLE_THREADS must be an integer, got {env!r}") from None
    return 1


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_json(path: str, payload):
    _write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _cutoff(value: str) -> float:
    x = float(value)
    if not x >= 0:
        raise argparse.ArgumentTypeError("cutoff must be non-negative")
    return x


def cmd_encode(args) -> int:
    A = load_matrix(args.input, args.channel)
    n = A.shape[0].bit_length() - 1
    workers = _threads(args)
    t0 = time.perf_counter()
    result = synthesize(A, args.protocol, p=args.p, cutoff=args.cutoff,
                        sign_mode=args.sign_mode, workers=workers)
    synth_ms = 1e3 * (time.perf_counter() - t0)
    circuit = result.circuit
    epsilon = None
    status = EXIT_OK
    if args.verify:
        if circuit.num_qubits > MAX_UNITARY_QUBITS:
            print(f"cannot verify: {circuit.num_qubits} qubits exceed the simulator cap "
                  f"of {MAX_UNITARY_QUBITS}", file=sys.stderr)
            status = EXIT_RESOURCE
        else:
            epsilon = verify_block(circuit, A, result.alpha, result.ancilla)
            log.info("block error %.3e", epsilon)
            if args.cutoff == 0 and epsilon > VERIFY_TOL:
                print(f"verification failed: epsilon = {epsilon:.3e}", file=sys.stderr)
                status = EXIT_VERIFY
    _write(args.output, export_text(circuit))
    if args.metrics:
        _write_json(args.metrics, {
            "schema": SCHEMA,
            "protocol": args.protocol,
            "n": n,
            "alpha": result.alpha,
            "ancilla": result.ancilla,
            "cutoff": args.cutoff,
            "gate_counts": count_gates(circuit),
            "max_gate_counts": result.full_counts,
            "size_metric": size_metric(circuit),
            "retained_fraction": result.retained_fraction,
            "synth_time_ms": synth_ms,
            "epsilon": epsilon,
        })
    return status


def cmd_laplacian(args) -> int:
    try:
        qubits = [int(q) for q in args.qubits.split(",")]
    except ValueError:
        raise UsageError(f"--qubits expects integers, got {args.qubits!r}") from None
    if args.dim == 1:
        if len(qubits) != 1:
            raise UsageError("--dim 1 takes a single qubit count")
        L = laplacian_1d(qubits[0], args.periodic)
    else:
        if len(qubits) != 2:
            raise UsageError("--dim 2 takes two qubit counts, e.g. --qubits 3,3")
        L = laplacian_2d(qubits[0], qubits[1], args.periodic)
    save_csv(args.output, L)
    return EXIT_OK


def cmd_stateprep(args) -> int:
    psi = normalize_state(load_csv(args.input, pad=False).ravel())
    n = len(psi).bit_length() - 1
    t0 = time.perf_counter()
    circuit = state_prep_circuit(psi, cutoff=args.cutoff)
    synth_ms = 1e3 * (time.perf_counter() - t0)
    error = None
    status = EXIT_OK
    if args.verify:
        if n > MAX_STATE_QUBITS:
            print(f"cannot verify: {n} qubits exceed the simulator cap of {MAX_STATE_QUBITS}",
                  file=sys.stderr)
            status = EXIT_RESOURCE
        else:
            zero = np.zeros(1 << n, dtype=np.complex128)
            zero[0] = 1.0
            error = float(np.linalg.norm(apply_to_state(circuit, zero) - psi))
            if args.cutoff == 0 and error > VERIFY_TOL:
                print(f"verification failed: state error = {error:.3e}", file=sys.stderr)
                status = EXIT_VERIFY
    _write(args.output, export_text(circuit))
    if args.metrics:
        _write_json(args.metrics, {
            "schema": SCHEMA,
            "protocol": "stateprep",
            "n": n,
            "cutoff": args.cutoff,
            "gate_counts": count_gates(circuit),
            "global_phase": circuit.global_phase,
            "synth_time_ms": synth_ms,
            "epsilon": error,
        })
    return status


def bench_rows(protocols, min_qubits: int, max_qubits: int, trials: int, seed: int,
               *, complex_input: bool = False, cutoff: float = 0.0, workers: int = 1) -> list[dict]:
    """Median synthesis time, gate counts and alpha per (protocol, n)."""
    # compile the compression kernel outside the timed region
    synthesize(random_matrix(1, seed=0), "bitble1")
    rows = []
    for protocol in protocols:
        prev = None
        for n in range(min_qubits, max_qubits + 1):
            times, alphas, counts = [], [], None
            for trial in range(trials):
                A = random_matrix(n, complex_input, seed=np.random.SeedSequence([seed, n, trial]))
                t0 = time.perf_counter()
                result = synthesize(A, protocol, cutoff=cutoff, workers=workers)
                times.append(time.perf_counter() - t0)
                alphas.append(result.alpha)
                counts = count_gates(result.circuit)
            median_ms = 1e3 * statistics.median(times)
            rows.append({
                "protocol": protocol,
                "n": n,
                "trials": trials,
                "median_time_ms": median_ms,
                "time_ratio": None if prev is None else median_ms / prev,
                "gate_counts": counts,
                "alpha": statistics.fmean(alphas),
            })
            prev = median_ms
    return rows


def cmd_bench(args) -> int:
    if args.max_qubits < args.min_qubits:
        raise UsageError("--max-qubits must be at least --min-qubits")
    if args.min_qubits < 1 or args.trials < 1:
        raise UsageError("qubit counts and trials must be positive")
    protocols = [p for chunk in args.protocols for p in chunk.split(",") if p]
    unknown = sorted(set(protocols) - set(PROTOCOLS))
    if unknown:
        raise UsageError(f"unknown protocols: {', '.join(unknown)}")
    rows = bench_rows(protocols, args.min_qubits, args.max_qubits, args.trials, args.seed,
                      complex_input=args.complex, cutoff=args.cutoff, workers=_threads(args))
    if args.output.endswith(".csv"):
        kinds = ("ry", "rz", "cnot", "swap")
        lines = ["protocol,n,trials,median_time_ms,time_ratio,alpha," + ",".join(kinds)]
        for r in rows:
            ratio = "" if r["time_ratio"] is None else repr(r["time_ratio"])
            lines.append(",".join([r["protocol"], str(r["n"]), str(r["trials"]),
                                   repr(r["median_time_ms"]), ratio, repr(r["alpha"])]
                                  + [str(r["gate_counts"][k]) for k in kinds]))
        _write(args.output, "\n".join(lines) + "\n")
    else:
        _write_json(args.output, {"schema": SCHEMA, "rows": rows})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bitble", description="Binary-tree block-encoding synthesis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    enc = sub.add_parser("encode", help="synthesize a block-encoding circuit")
    enc.add_argument("--input", required=True, help="matrix as .csv, .pgm or .ppm")
    enc.add_argument("--channel", choices=("r", "g", "b"))
    enc.add_argument("--protocol", choices=PROTOCOLS, default="bitble1")
    enc.add_argument("--p", type=float, default=0.5)
    enc.add_argument("--cutoff", type=_cutoff, default=0.0)
    enc.add_argument("--sign-mode", choices=SIGN_MODES, default="phase")
    enc.add_argument("--output", required=True)
    enc.add_argument("--metrics")
    enc.add_argument("--verify", action="store_true")
    enc.add_argument("--threads", type=int)
    enc.set_defaults(func=cmd_encode)

    lap = sub.add_parser("laplacian", help="write a discretized Laplacian as CSV")
    lap.add_argument("--dim", type=int, choices=(1, 2), required=True)
    lap.add_argument("--qubits", required=True, help="n for 1D, nx,ny for 2D")
    lap.add_argument("--periodic", action="store_true")
    lap.add_argument("--output", required=True)
    lap.set_defaults(func=cmd_laplacian)

    sp = sub.add_parser("stateprep", help="synthesize a state-preparation circuit")
    sp.add_argument("--input", required=True, help="amplitudes as CSV")
    sp.add_argument("--cutoff", type=_cutoff, default=0.0)
    sp.add_argument("--output", required=True)
    sp.add_argument("--metrics")
    sp.add_argument("--verify", action="store_true")
    sp.set_defaults(func=cmd_stateprep)

    bench = sub.add_parser("bench", help="time synthesis on seeded random matrices")
    bench.add_argument("--min-qubits", type=int, required=True)
    bench.add_argument("--max-qubits", type=int, required=True)
    bench.add_argument("--protocols", nargs="+", default=["bitble1"])
    bench.add_argument("--trials", type=int, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--complex", action="store_true")
    bench.add_argument("--cutoff", type=_cutoff, default=0.0)
    bench.add_argument("--output", required=True, help=".json or .csv")
    bench.add_argument("--threads", type=int)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, UsageError, ValueError, OSError) as exc:
        print(f"bitble {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
