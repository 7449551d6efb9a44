"""Command-line front end.

``noisyeq check`` decides epsilon-equivalence of circuit files; ``noisyeq
bench`` runs both algorithms on generated benchmark circuits.

Exit codes of ``check``: 0 equivalent, 1 not equivalent, 2 usage or input
error, 3 internal check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from typing import List, Optional, Sequence

from .circuit import (
    Circuit,
    CircuitError,
    gen_bv,
    gen_qft,
    insert_noise,
    load_circuit,
    parse_noise_spec,
    random_noise_spec,
)
from .fidelity import (
    FidelityReport,
    WiringError,
    average_fidelity,
    check_equivalence,
    cj_metric,
    fidelity_collective,
    fidelity_individual,
)
from .noise import CHANNELS

EXIT_EQUIVALENT = 0
EXIT_NOT_EQUIVALENT = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL = 3

ORACLE_TOL = 1e-9

log = logging.getLogger("noisyeq")


def _load_inputs(args) -> tuple:
    ideal = load_circuit(args.ideal)
    noisy = load_circuit(args.noisy) if args.noisy else ideal
    if args.noise_spec:
        with open(args.noise_spec) as fh:
            noisy = insert_noise(noisy, parse_noise_spec(fh.read()))
    return ideal, noisy


def report_json(report: FidelityReport, dim: int, seed) -> dict:
    verdict = report.equivalent
    return {
        "verdict": verdict,
        "fj": report.fj,
        "is_lower_bound": report.is_lower_bound,
        "epsilon": report.epsilon,
        "algorithm": report.algorithm,
        "terms_evaluated": report.terms_evaluated,
        "total_terms": report.total_terms,
        "avg_fidelity": average_fidelity(report.fj, dim),
        "cj": cj_metric(report.fj),
        "peak_nodes": report.peak_nodes,
        "wall_time_s": report.wall_time,
        "seed": seed,
    }


def _print_report(report: FidelityReport, dim: int, out=None) -> int:
    fj_label = "fidelity lower bound" if report.is_lower_bound else "fidelity"
    rows = [
        ("verdict", report.equivalent),
        (fj_label, f"{report.fj:.12g}"),
        ("average fidelity", f"{average_fidelity(report.fj, dim):.12g}"),
        ("C_J distance", f"{cj_metric(report.fj):.6g}"),
        ("algorithm", report.algorithm),
        ("terms evaluated", f"{report.terms_evaluated}/{report.total_terms}"),
        ("peak TDD nodes", report.peak_nodes),
        ("wall time (s)", f"{report.wall_time:.4f}"),
    ]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}", file=out)
    return width


def cmd_check(args) -> int:
    if not 0.0 <= args.epsilon <= 1.0:
        print(f"error: --epsilon {args.epsilon} outside [0, 1]", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        ideal, noisy = _load_inputs(args)
    except (OSError, CircuitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    algorithm = args.algorithm
    if algorithm == "auto":
        algorithm = "individual" if noisy.total_terms() <= args.auto_threshold else "collective"
    extra = {"workers": args.workers} if algorithm == "individual" else {}
    try:
        report = check_equivalence(
            ideal, noisy, args.epsilon, algorithm,
            early_exit=not args.exact, optimize_network=args.optimize, **extra,
        )
    except (CircuitError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except WiringError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    dim = noisy.dim
    width = _print_report(report, dim)
    status = EXIT_EQUIVALENT if report.equivalent in ("yes", "yes-by-bound") else EXIT_NOT_EQUIVALENT

    if args.oracle:
        from .oracle import OracleError, jamiolkowski_fidelity_dense

        try:
            ref = jamiolkowski_fidelity_dense(ideal, noisy)
        except OracleError as exc:
            print(f"oracle check failed: {exc}", file=sys.stderr)
            return EXIT_INTERNAL
        ok = report.fj <= ref + ORACLE_TOL if report.is_lower_bound else abs(report.fj - ref) <= ORACLE_TOL
        print(f"{'oracle fidelity':<{width}}  {ref:.12g} ({'agrees' if ok else 'DISAGREES'})")
        if not ok:
            status = EXIT_INTERNAL

    if args.json:
        with open(args.json, "w") as fh:
            json.dump(report_json(report, dim, args.seed), fh, indent=2)
            fh.write("\n")
    return status


def _noise_counts(text: str) -> List[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if any(k < 0 for k in out):
        raise argparse.ArgumentTypeError("noise counts must be non-negative")
    return out


def bench_circuit(family: str, n: int) -> Circuit:
    if family == "qft":
        return gen_qft(n)
    if family == "bv":
        # n-2 ones plus the ancilla flip reproduce the usual bv gate counts (3n-1)
        secret = "1" * max(n - 2, 0) + ("0" if n >= 2 else "")
        return gen_bv(n, secret, flip_ancilla=True)
    raise CircuitError(f"unknown benchmark family {family!r}")


BENCH_FIELDS = [
    "circuit", "n", "gates", "noises", "fj",
    "collective_time_s", "collective_nodes",
    "individual_time_s", "individual_nodes", "log_ratio",
]


def run_bench(family: str, n: int, noise_counts: Sequence[int], channel: str = "depolarizing",
              p: float = 0.999, seed=0, algorithm: str = "both", max_terms: int = 1 << 16) -> List[dict]:
    base = bench_circuit(family, n)
    rows = []
    for k in noise_counts:
        noisy = insert_noise(base, random_noise_spec(base, k, channel, p, seed=seed)) if k else base
        row = {"circuit": f"{family}{n}", "n": n, "gates": base.gate_count, "noises": k}
        fj = None
        if algorithm in ("both", "collective"):
            r = fidelity_collective(base, noisy)
            row.update(collective_time_s=r.wall_time, collective_nodes=r.peak_nodes)
            fj = r.fj
        if algorithm in ("both", "individual"):
            if noisy.total_terms() <= max_terms:
                r = fidelity_individual(base, noisy, keep_traces=False)
                row.update(individual_time_s=r.wall_time, individual_nodes=r.peak_nodes)
                fj = r.fj
            else:
                row.update(individual_time_s=None, individual_nodes=None)
        t1, t2 = row.get("individual_time_s"), row.get("collective_time_s")
        row["log_ratio"] = math.log(t1 / t2) if t1 and t2 else None
        row["fj"] = fj
        rows.append(row)
    return rows


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cmd_bench(args) -> int:
    try:
        rows = run_bench(args.family, args.n, args.noises, args.channel, args.p,
                         args.seed, args.algorithm, args.max_terms)
    except CircuitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.csv:
        w = csv.DictWriter(sys.stdout, fieldnames=BENCH_FIELDS, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k) for k in BENCH_FIELDS})
        return 0
    cols = [f for f in BENCH_FIELDS if any(row.get(f) is not None for row in rows)]
    table = [[_fmt(row.get(c)) for c in cols] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in table)) for i, c in enumerate(cols)]
    print("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
    for r in table:
        print("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisyeq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check an ideal circuit against a noisy one")
    p.add_argument("--ideal", required=True, help="ideal circuit file")
    p.add_argument("--noisy", help="noisy circuit file (default: the ideal circuit)")
    p.add_argument("--noise-spec", help="JSON list of noises to insert into the noisy circuit")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--algorithm", choices=("auto", "individual", "collective"), default="auto")
    p.add_argument("--auto-threshold", type=int, default=16,
                   help="max Kraus terms for which auto picks the individual algorithm")
    p.add_argument("--exact", action="store_true", help="disable early exit of the individual algorithm")
    p.add_argument("--oracle", action="store_true", help="cross-check with the dense oracle")
    p.add_argument("--optimize", action="store_true", help="apply SWAP elimination and gate cancellation")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", metavar="PATH", help="write a JSON report")
    p.add_argument("--seed", type=int, default=0, help="recorded in the report")
    p.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="run both algorithms on generated benchmarks")
    b.add_argument("family", choices=("qft", "bv"))
    b.add_argument("n", type=int)
    b.add_argument("--noises", type=_noise_counts, default=[1], help="count, range 'a-b' or list")
    b.add_argument("--channel", choices=sorted(CHANNELS), default="depolarizing")
    b.add_argument("--p", type=float, default=0.999, help="no-error probability")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--algorithm", choices=("both", "individual", "collective"), default="both")
    b.add_argument("--max-terms", type=int, default=1 << 16,
                   help="skip the individual algorithm above this many Kraus terms")
    b.add_argument("--csv", action="store_true", help="emit CSV instead of a table")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
