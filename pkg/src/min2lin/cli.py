"""Command-line front end: solve, oracle, verify, gen, bench.

Exit codes: 0 yes / 1 no / 2 usage error / 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .equations import (Instance, NotSimpleError, OracleBudgetError,
                        ParseError, brute_force_opt, from_json_dict,
                        is_simple, is_special, parse, serialize, to_json_dict)
from .generators import (FIXTURE_NAMES, gen_fixture, gen_random,
                         gen_random_smc, gen_split_gadget)
from .ring import factorize
from .solver import (Solution, solve_exact_fallback, solve_general,
                     solve_prime_power, verify_solution)

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


def load_instance(path: str) -> Instance:
    text = Path(path).read_text()
    if path.endswith(".json"):
        return from_json_dict(json.loads(text))
    return parse(text)


def _write(instance: Instance, out, as_json: bool):
    payload = (json.dumps(to_json_dict(instance), indent=2) + "\n"
               if as_json else serialize(instance))
    if out:
        Path(out).write_text(payload)
    else:
        sys.stdout.write(payload)


def cmd_solve(args) -> int:
    inst = load_instance(args.file)
    k = inst.k if args.k is None else args.k
    mode = args.mode
    if mode in ("rand", "derand"):
        if not inst.ring.is_prime_power:
            print(f"error: mode {mode} needs a prime-power modulus "
                  f"(use --mode approx or fallback)", file=sys.stderr)
            return EXIT_USAGE
        if not (is_special(inst) or is_simple(inst)):
            print("error: mode %s needs a simple or special instance" % mode,
                  file=sys.stderr)
            return EXIT_USAGE
        sol = solve_prime_power(
            inst, k, mode="randomized" if mode == "rand" else "derandomized",
            trials=args.trials, seed=args.seed)
    elif mode == "fallback":
        sol = solve_exact_fallback(inst, k)
    elif mode == "approx":
        sol = solve_general(inst, k, trials=args.trials, seed=args.seed)
    else:
        raise AssertionError(mode)
    doc = sol.to_json_dict()
    doc["k"] = k
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        if sol.verdict == "yes":
            print(f"yes: delete {sorted(sol.deleted)} "
                  f"(|Z| = {len(sol.deleted)} <= bound {sol.bound}, mode {sol.mode})")
        else:
            print(f"no (k = {k}, mode {sol.mode})")
    return EXIT_YES if sol.verdict == "yes" else EXIT_NO


def cmd_oracle(args) -> int:
    inst = load_instance(args.file)
    opt, witness = brute_force_opt(inst, budget=args.budget)
    print("inf" if opt == float("inf") else int(opt))
    if args.witness:
        print(json.dumps(witness))
    return EXIT_YES


def cmd_verify(args) -> int:
    inst = load_instance(args.file)
    doc = json.loads(Path(args.solution).read_text())
    sol = Solution(verdict=doc["verdict"], deleted=frozenset(doc["deleted"]),
                   witness=doc.get("witness"), bound=doc["bound"],
                   mode=doc.get("mode", "?"), trace=doc.get("trace", {}))
    ok = verify_solution(inst, sol)
    print("valid" if ok else "INVALID")
    return EXIT_YES if ok else EXIT_NO


def cmd_gen(args) -> int:
    if args.what == "fixture":
        inst = gen_fixture(args.name)
    elif args.what == "random":
        inst = gen_random(args.profile, args.mod, args.vars, args.eqs,
                          args.opt, args.seed)
    elif args.what == "gadget":
        smc = gen_random_smc(args.parts, args.seed, max_edges=args.edges)
        inst = gen_split_gadget(smc, factorize(args.mod))
    else:
        raise AssertionError(args.what)
    _write(inst, args.out, args.json)
    return EXIT_YES


def cmd_bench(args) -> int:
    rows = ["instance,mode,verdict,cost,trials-used,wall-time-ms"]
    if args.suite != "fixtures":
        print(f"error: unknown suite {args.suite!r}", file=sys.stderr)
        return EXIT_USAGE
    for name in FIXTURE_NAMES:
        inst = gen_fixture(name)
        for mode in ("rand", "fallback"):
            t0 = time.perf_counter()
            if mode == "rand":
                sol = solve_prime_power(inst, inst.k, mode="randomized",
                                        trials=args.trials, seed=args.seed)
                trials_used = sol.trace.get("trials_used", args.trials)
            else:
                sol = solve_exact_fallback(inst, inst.k)
                trials_used = ""
            ms = (time.perf_counter() - t0) * 1000.0
            cost = len(sol.deleted) if sol.verdict == "yes" else ""
            rows.append(f"{name},{mode},{sol.verdict},{cost},{trials_used},{ms:.1f}")
    out = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)
    return EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="min2lin")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("solve", help="decide deletion distance at budget k")
    sp.add_argument("file")
    sp.add_argument("-k", type=int, default=None,
                    help="deletion budget (default: the file's param)")
    sp.add_argument("--mode", choices=("rand", "derand", "fallback", "approx"),
                    default="rand")
    sp.add_argument("--trials", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_solve)

    op = sub.add_parser("oracle", help="brute-force optimum")
    op.add_argument("file")
    op.add_argument("--budget", type=int, default=10**7)
    op.add_argument("--witness", action="store_true")
    op.set_defaults(fn=cmd_oracle)

    vp = sub.add_parser("verify", help="check a solution JSON against an instance")
    vp.add_argument("file")
    vp.add_argument("solution")
    vp.set_defaults(fn=cmd_verify)

    gp = sub.add_parser("gen", help="generate instances")
    gsub = gp.add_subparsers(dest="what", required=True)
    gf = gsub.add_parser("fixture")
    gf.add_argument("name", choices=FIXTURE_NAMES)
    gr = gsub.add_parser("random")
    gr.add_argument("--profile", choices=("special", "simple", "general"),
                    default="special")
    gr.add_argument("--mod", type=int, required=True)
    gr.add_argument("--vars", type=int, default=5)
    gr.add_argument("--eqs", type=int, default=10)
    gr.add_argument("--opt", type=int, default=1)
    gr.add_argument("--seed", type=int, default=0)
    gg = gsub.add_parser("gadget")
    gg.add_argument("--parts", type=int, default=2)
    gg.add_argument("--mod", type=int, default=6)
    gg.add_argument("--edges", type=int, default=8)
    gg.add_argument("--seed", type=int, default=0)
    for g in (gf, gr, gg):
        g.add_argument("-o", "--out", default=None)
        g.add_argument("--json", action="store_true")
    gp.set_defaults(fn=cmd_gen)

    bp = sub.add_parser("bench", help="run a benchmark suite, emit CSV")
    bp.add_argument("suite")
    bp.add_argument("--out", default=None)
    bp.add_argument("--trials", type=int, default=64)
    bp.add_argument("--seed", type=int, default=0)
    bp.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ParseError, NotSimpleError, OracleBudgetError, FileNotFoundError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
