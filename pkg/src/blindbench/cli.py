"""Command-line front end.

Exit codes: 0 success / check passed, 2 bad input or configuration,
3 a check did not hold (NOT_BLIND audit, view or leak mismatch, soundness
bound exceeded).
"""

from __future__ import annotations

import argparse
import math
from fractions import Fraction
import os
import sys
from statistics import mean

from . import __version__
from .audit import BLIND, Enumerate, Sample, audit_blindness, formula_hash, make_config
from .field import FieldError, check_prime, smallest_session_prime
from .harness import make_oracle, run_M_after, run_M_during, run_protocol_S, simulate_M_during_on_single
from .ip import ACCEPT, Arithmetization, build_schedule, exact_acceptance, run_ip_session, total_degree
from .qbf import DEFAULT_TRUTH_CAP, QbfError, brute_force_truth, load_qbf, random_qbf
from .report import FORMATS, render

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CHECK_FAILED = 3


class ConfigError(Exception):
    pass


def _parse_gen(text: str) -> tuple[int, int]:
    try:
        n, size = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--gen expects n,size, got {text!r}") from None
    return n, size


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--formula", action="append", metavar="PATH", help="QBF file (repeatable for audit)")
    src.add_argument("--gen", type=_parse_gen, metavar="n,size", help="generate an instance")
    common.add_argument("--runs", type=int, default=100, metavar="K")
    common.add_argument("--seed", type=int, default=None, metavar="S", help="default: $BLINDBENCH_SEED or 0")
    common.add_argument("--servers", type=int, default=2, metavar="N")
    common.add_argument("--p", type=int, default=None, metavar="P", help="field modulus (default: smallest prime >= max(n^4, 17))")
    common.add_argument("--allow-small-field", action="store_true")
    common.add_argument("--oracle", default="honest", metavar="honest|predicate:SPEC")
    common.add_argument("--format", choices=FORMATS, default="table")
    common.add_argument("--out", metavar="PATH")

    parser = argparse.ArgumentParser(prog="blindbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ip-run", parents=[common], help="acceptance statistics of the interactive proof")
    p.add_argument("--prover", choices=("honest", "cheating"), default="honest")
    sub.add_parser("sim-equiv", parents=[common], help="M_during vs. its single-server simulation")
    sub.add_parser("leak-replay", parents=[common], help="leak propagation from S to M_after collusion")
    p = sub.add_parser("audit", parents=[common], help="blindness audit over inputs sharing one leakage value")
    p.add_argument("--protocol", choices=("pad", "S", "M_during", "M_after"), default="S")
    p.add_argument("--server-id", type=int, default=1)
    p.add_argument("--samples", type=int, default=None, metavar="K", help="sample K sessions instead of enumerating")
    p.add_argument("--inputs", type=int, default=2, help="generated inputs when using --gen")
    p.add_argument("--tolerance", type=float, default=None)
    p = sub.add_parser("soundness-sweep", parents=[common], help="cheating-prover acceptance vs. the degree bound")
    p.add_argument("--n-values", type=_int_list, default=[1, 2])
    p.add_argument("--p-values", type=_int_list, default=None)
    p.add_argument("--instances", type=int, default=2)
    p.add_argument("--size", type=int, default=None, help="matrix size for generated instances (default 2n+1)")
    p.add_argument("--exact", action="store_true", help="also enumerate every challenge sequence when feasible")
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("BLINDBENCH_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"BLINDBENCH_SEED must be an integer, got {env!r}") from None


def _instances(args, seed: int, count: int = 1):
    if args.formula:
        out = []
        for path in args.formula:
            if not os.path.exists(path):
                raise ConfigError(f"formula file not found: {path}")
            out.append(load_qbf(path))
        return out
    if args.gen:
        n, size = args.gen
        return [random_qbf(n, size, seed + i) for i in range(count)]
    raise ConfigError("one of --formula or --gen is required")


def _field(args, q) -> int:
    if args.p is None:
        return smallest_session_prime(q.n)
    check_prime(args.p)
    if args.p < q.n**4 and not args.allow_small_field:
        raise ConfigError(
            f"warning: p={args.p} is below n^4={q.n ** 4} for n={q.n}; pass --allow-small-field to run anyway"
        )
    return args.p


def _truth(q):
    return brute_force_truth(q) if q.n <= DEFAULT_TRUTH_CAP else None


def cmd_ip_run(args, seed):
    (q,) = _instances(args, seed)[:1]
    p = _field(args, q)
    arith = Arithmetization.shared(q, p)
    results = [
        run_ip_session(q, p, seed + i, prover=args.prover, allow_small_field=True, arith=arith) for i in range(args.runs)
    ]
    accepted = sum(r.verdict == ACCEPT for r in results)
    row = {
        "formula": formula_hash(q),
        "n": q.n,
        "size": q.size,
        "p": p,
        "truth": _truth(q),
        "prover": args.prover,
        "runs": args.runs,
        "accepted": accepted,
        "rejected": args.runs - accepted,
        "acceptance_rate": accepted / args.runs if args.runs else 0.0,
        "mean_rounds": mean(r.rounds for r in results) if results else 0.0,
    }
    return [row], EXIT_OK


def cmd_sim_equiv(args, seed):
    rows = []
    ok = True
    for q in _instances(args, seed):
        p = _field(args, q)
        same_view = same_verdict = 0
        for s in range(seed, seed + args.runs):
            kw = {"p": p, "allow_small_field": True}
            multi = run_M_during(q, args.servers, s, **kw)
            single = simulate_M_during_on_single(q, args.servers, s, **kw)
            ref = run_protocol_S(q, s, **kw)
            same_view += multi.compute_view() == single.compute_view()
            same_verdict += multi.verdict == single.verdict == ref.verdict
        ok &= same_view == same_verdict == args.runs
        rows.append(
            {
                "formula": formula_hash(q),
                "servers": args.servers,
                "runs": args.runs,
                "identical_views": same_view,
                "verdict_agreements": same_verdict,
            }
        )
    return rows, EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_leak_replay(args, seed):
    rows = []
    ok = True
    for q in _instances(args, seed):
        p = _field(args, q)
        oracle = make_oracle(args.oracle, q, p)
        single = collusion = agree = 0
        for s in range(seed, seed + args.runs):
            kw = {"p": p, "allow_small_field": True}
            a = run_protocol_S(q, s, oracle, **kw).leak_label
            b = run_M_after(q, args.servers, s, oracle, **kw).leak_label
            single += a == "INF_CIRCUIT"
            collusion += b == "INF_CIRCUIT"
            agree += a == b
        ok &= agree == args.runs
        rows.append(
            {
                "formula": formula_hash(q),
                "oracle": args.oracle,
                "servers": args.servers,
                "runs": args.runs,
                "single_leak_rate": single / args.runs if args.runs else 0.0,
                "collusion_leak_rate": collusion / args.runs if args.runs else 0.0,
                "coincidence_rate": agree / args.runs if args.runs else 0.0,
            }
        )
    return rows, EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_audit(args, seed):
    inputs = _instances(args, seed, args.inputs)
    p = _field(args, inputs[0]) if args.p is not None else None
    config = make_config(args.protocol, args.servers, p, args.allow_small_field)
    mode = Sample(args.samples, seed) if args.samples else Enumerate()
    verdict = audit_blindness(config, inputs, args.server_id, mode, args.tolerance)
    if args.format == "jsonl":
        rows = verdict.records()
    else:
        rows = [
            {
                "config": verdict.config,
                "mode": verdict.mode,
                "a": verdict.hashes[i],
                "b": verdict.hashes[j],
                "distance": str(d),
                "max_distance": str(verdict.max_distance),
                "verdict": verdict.verdict,
            }
            for i, j, d in verdict.pairs
        ]
    return rows, EXIT_OK if verdict.verdict == BLIND else EXIT_CHECK_FAILED


def _false_instances(n: int, size: int, count: int, seed: int):
    found = []
    s = seed
    while len(found) < count:
        q = random_qbf(n, size, s)
        if q not in found and not brute_force_truth(q):
            found.append(q)
        s += 1
        if s - seed > 10_000:
            raise ConfigError(f"no false instances found for n={n}, size={size}")
    return found


def cmd_soundness_sweep(args, seed):
    rows = []
    ok = True
    for n in args.n_values:
        size = args.size or 2 * n + 1
        primes = args.p_values or [smallest_session_prime(n)]
        for q in _false_instances(n, size, args.instances, seed):
            for p in primes:
                check_prime(p)
                if p < n**4 and not args.allow_small_field:
                    raise ConfigError(f"warning: p={p} is below n^4={n ** 4}; pass --allow-small-field to run anyway")
                arith = Arithmetization.shared(q, p)
                schedule = build_schedule(q)
                bound = total_degree(schedule) / p
                accepted = sum(
                    run_ip_session(q, p, seed + i, prover="cheating", allow_small_field=True, arith=arith).verdict == ACCEPT
                    for i in range(args.runs)
                )
                rate = accepted / args.runs if args.runs else 0.0
                margin = 3 * math.sqrt(bound * (1 - bound) / args.runs) if args.runs else 0.0
                within = rate <= bound + margin
                row = {
                    "formula": formula_hash(q),
                    "n": n,
                    "p": p,
                    "rounds": len(schedule),
                    "degree_sum": total_degree(schedule),
                    "bound": bound,
                    "runs": args.runs,
                    "accepted": accepted,
                    "rate": rate,
                    "margin_3sigma": margin,
                    "within_bound": within,
                }
                if args.exact:
                    exact = exact_acceptance(q, p, arith=arith) if p ** len(schedule) <= 10**6 else None
                    row["exact"] = "" if exact is None else str(exact)
                    if exact is not None:
                        within &= exact <= total_degree(schedule) / Fraction(p)
                    row["within_bound"] = within
                ok &= within
                rows.append(row)
    return rows, EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {
    "ip-run": cmd_ip_run,
    "sim-equiv": cmd_sim_equiv,
    "leak-replay": cmd_leak_replay,
    "audit": cmd_audit,
    "soundness-sweep": cmd_soundness_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        seed = _seed(args)
        rows, status = COMMANDS[args.command](args, seed)
    except (ConfigError, QbfError, FieldError, ValueError) as exc:
        print(f"blindbench {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(rows, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
