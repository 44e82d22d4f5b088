"""Command-line surface: gen / solve / verify / oracle / gap / bench.

Reports are line-oriented ``key=value`` pairs (plus an optional JSON report
for verify) and are byte-identical across runs for fixed inputs.  All
numbers print exactly as "p/q"; the only decimal renderings are the
6-place approximations next to bench ratios, computed by integer
arithmetic.

Exit codes: 0 success (and, for verify, a passing report); 1 a verification
that ran but failed; 2 parse, size, or parameter errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import configlp, mechanisms, oracle
from .bits import items_of
from .equilibria import MODES, verify
from .errors import BadParams, MarketError
from .instances import (
    FAMILIES,
    built_in,
    generate,
    parse_allocation,
    parse_instance,
    parse_outcome,
    parse_rational,
    write_instance,
    write_outcome,
)
from .market import (
    Instance,
    induced_partition,
    revenue,
    singleton_partition,
    social_welfare,
)

_BUILTIN_CHOICES = (
    "fig1a",
    "fig1b",
    "revenue_example",
    "bundling_necessity",
    "nonuniform_identical_budget",
    "partition_reduction",
)

_MECHANISMS = (
    "superadditive",
    "singleminded",
    "uba",
    "logbundle",
    "cleanup",
    "fullsurplus",
)


def _decimal6(value: Fraction) -> str:
    """Six-place decimal rendering by integer arithmetic (display only)."""
    scaled = (value.numerator * 10**6 + value.denominator // 2) // value.denominator
    whole, frac = divmod(scaled, 10**6)
    return f"{whole}.{frac:06d}"


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _load_instance(path: str) -> Instance:
    return parse_instance(_read(path))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mccwe",
        description="market-clearing bundle equilibria: generate, solve, verify, bound",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write an instance file")
    gen.add_argument("family", choices=_BUILTIN_CHOICES + FAMILIES)
    gen.add_argument("--m", type=int)
    gen.add_argument("--n", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--eps", help="rational like 1/10")
    gen.add_argument("--bigR", help="rational like 100")
    gen.add_argument("--identical-budgets", action="store_true")
    gen.add_argument("--a", help="comma-separated weights for partition_reduction")
    gen.add_argument("-o", "--output", required=True)

    solve = sub.add_parser("solve", help="run a mechanism, write its outcome")
    solve.add_argument("mechanism", choices=_MECHANISMS)
    solve.add_argument("-i", "--instance", required=True)
    solve.add_argument("--alloc", help="input allocation (defaults to the brute-force optimum)")
    solve.add_argument("-o", "--output", required=True)
    solve.add_argument("--trace")

    ver = sub.add_parser("verify", help="check an outcome file in a given mode")
    ver.add_argument("-i", "--instance", required=True)
    ver.add_argument("-a", "--outcome", required=True)
    ver.add_argument("--mode", choices=MODES, required=True)
    ver.add_argument("--json", action="store_true")

    orc = sub.add_parser("oracle", help="brute-force bounds")
    orc.add_argument("-i", "--instance", required=True)
    orc.add_argument("--best-mccwe", action="store_true")
    orc.add_argument("--item-pricing", action="store_true")

    gap = sub.add_parser("gap", help="fractional vs integral vs best supportable welfare")
    gap.add_argument("-i", "--instance", required=True)

    bench = sub.add_parser("bench", help="sweep a random family, report ratios")
    bench.add_argument("--family", choices=FAMILIES, required=True)
    bench.add_argument("--trials", type=int, required=True)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--m", type=int, required=True)
    bench.add_argument("--n", type=int, required=True)
    return parser


def _cmd_gen(args, out) -> int:
    params = {}
    if args.family in ("fig1a", "nonuniform_identical_budget") and args.eps:
        params["eps"] = parse_rational(args.eps, "--eps")
    elif args.family == "revenue_example" and args.bigR:
        params["big"] = parse_rational(args.bigR, "--bigR")
    elif args.family == "bundling_necessity":
        params["m"] = args.m if args.m is not None else 16
    elif args.family == "partition_reduction":
        if not args.a:
            raise BadParams("partition_reduction needs --a w1,w2,...")
        params["weights"] = tuple(
            parse_rational(w, "--a") for w in args.a.split(",")
        )
    if args.family in _BUILTIN_CHOICES:
        inst = built_in(args.family, **params)
    else:
        if args.m is None or args.n is None:
            raise BadParams("random families need --m and --n")
        inst = generate(
            args.family, args.m, args.n, args.seed, identical_budgets=args.identical_budgets
        )
    _write(args.output, write_instance(inst))
    print(f"instance={inst.name}", file=out)
    print(f"m={inst.m}", file=out)
    print(f"n={inst.n}", file=out)
    print(f"file={args.output}", file=out)
    return 0


def _input_allocation(args, inst):
    if args.alloc:
        return parse_allocation(_read(args.alloc), inst.m)
    x, _welfare = oracle.optimal_integral(inst)
    return x


def _cmd_solve(args, out) -> int:
    inst = _load_instance(args.instance)
    trace = mechanisms.MechanismTrace()
    if args.mechanism == "superadditive":
        outcome = mechanisms.superadditive_mccwe(inst, trace)
    elif args.mechanism == "singleminded":
        outcome = mechanisms.single_minded_mccwe(inst, trace)
    elif args.mechanism == "uba":
        outcome = mechanisms.uniform_budget_additive_mccwe(
            inst, _input_allocation(args, inst), trace
        )
    elif args.mechanism == "cleanup":
        outcome = mechanisms.identical_budget_cleanup(
            inst, _input_allocation(args, inst), trace
        )
    elif args.mechanism == "logbundle":
        outcome = mechanisms.log_bundling_mechanism(inst, trace)
    else:
        partition, _owners = induced_partition(_input_allocation(args, inst))
        outcome = mechanisms.bundle_efficient_full_surplus(inst, partition, trace)
    _write(args.output, write_outcome(outcome))
    if args.trace:
        doc = {
            "mechanism": trace.mechanism,
            "steps": [
                {
                    "phase": step.phase,
                    "agent": step.agent,
                    "items": items_of(step.items),
                    "welfare_before": str(step.welfare_before),
                    "welfare_after": str(step.welfare_after),
                }
                for step in trace.steps
            ],
        }
        _write(args.trace, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"mechanism={args.mechanism}", file=out)
    print(f"welfare={social_welfare(inst, outcome.allocation)}", file=out)
    print(f"revenue={revenue(inst, outcome)}", file=out)
    print(f"outcome={args.output}", file=out)
    return 0


def _cmd_verify(args, out) -> int:
    inst = _load_instance(args.instance)
    outcome = parse_outcome(_read(args.outcome), inst.m)
    report = verify(inst, outcome, args.mode)
    welfare = social_welfare(inst, outcome.allocation)
    rev = revenue(inst, outcome)
    if args.json:
        doc = {
            "mode": report.mode,
            "ok": report.ok,
            "welfare": str(welfare),
            "revenue": str(rev),
            "violations": [
                {
                    "kind": viol.kind,
                    "agent": viol.agent,
                    "better_bundle": None
                    if viol.better_bundle is None
                    else items_of(viol.better_bundle),
                    "gap": None if viol.gap is None else str(viol.gap),
                    "block": None if viol.block is None else items_of(viol.block),
                    "price": None if viol.price is None else str(viol.price),
                }
                for viol in report.violations
            ],
        }
        print(json.dumps(doc, indent=2, sort_keys=True), file=out)
    else:
        print(f"mode={report.mode}", file=out)
        print(f"ok={'true' if report.ok else 'false'}", file=out)
        print(f"welfare={welfare}", file=out)
        print(f"revenue={rev}", file=out)
        for viol in report.violations:
            if viol.kind == "buyer":
                bundle = ",".join(str(j) for j in items_of(viol.better_bundle))
                print(
                    f"violation=buyer agent={viol.agent} gap={viol.gap} "
                    f"better_blocks={{{bundle}}}",
                    file=out,
                )
            else:
                block = ",".join(str(j) for j in items_of(viol.block))
                print(
                    f"violation=seller block={{{block}}} price={viol.price}", file=out
                )
    return 0 if report.ok else 1


def _cmd_oracle(args, out) -> int:
    inst = _load_instance(args.instance)
    _x, opt = oracle.optimal_integral(inst)
    print(f"opt={opt}", file=out)
    if args.best_mccwe:
        _outcome, best = oracle.best_mccwe(inst)
        print(f"best_mccwe={best}", file=out)
    if args.item_pricing:
        bound = oracle.best_single_minded_item_pricing(inst)
        print(f"item_pricing={bound}", file=out)
    return 0


def _cmd_gap(args, out) -> int:
    inst = _load_instance(args.instance)
    frac = configlp.fractional_opt(inst, singleton_partition(inst.m)).value
    _x, integral = oracle.optimal_integral(inst)
    _outcome, best = oracle.best_mccwe(inst)
    print(f"instance={inst.name}", file=out)
    print(f"fractional={frac}", file=out)
    print(f"integral={integral}", file=out)
    print(f"best_mccwe={best}", file=out)
    return 0


def _cmd_bench(args, out) -> int:
    ratios = []
    for trial in range(args.trials):
        inst = generate(args.family, args.m, args.n, args.seed + trial)
        _x, opt = oracle.optimal_integral(inst)
        if args.family == "random_superadditive":
            outcome = mechanisms.superadditive_mccwe(inst)
        elif args.family == "random_single_minded":
            outcome = mechanisms.single_minded_mccwe(inst)
        else:
            x, _w = oracle.optimal_integral(inst)
            outcome = mechanisms.uniform_budget_additive_mccwe(inst, x)
        welfare = social_welfare(inst, outcome.allocation)
        ratios.append(Fraction(1) if opt == 0 else opt / welfare)
    worst = max(ratios)
    mean = sum(ratios, Fraction(0)) / len(ratios)
    print(f"family={args.family}", file=out)
    print(f"trials={args.trials}", file=out)
    print(f"worst={worst} (~{_decimal6(worst)})", file=out)
    print(f"mean={mean} (~{_decimal6(mean)})", file=out)
    return 0


_HANDLERS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "oracle": _cmd_oracle,
    "gap": _cmd_gap,
    "bench": _cmd_bench,
}


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args, out)
    except MarketError as exc:
        print(f"error={type(exc).__name__} {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error=io {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
