"""Command line front end.

Every subcommand prints a single JSON object to stdout and signals its
verdict through the exit code:

    0  the queried property holds (or the command just succeeded)
    1  the decider and the brute-force oracle disagree (--oracle)
    2  bad input: malformed files, unknown names, invalid arguments
    3  the queried property fails
    4  the enumeration cap was exceeded

Probabilities in payloads are rational strings, never floats.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import jsonio
from .core import complete_instance, validate_instance
from .errors import CapExceededError, InputError
from .expost import find_consistent_stable, max_stable_decomposition
from .fractional import is_fractionally_stable, is_fractionally_strongly_stable
from .gen import (
    REDUCTION_VARIANTS,
    TIE_MODELS,
    gen_example1,
    gen_random_instance,
    gen_random_mixture,
    gen_x3c_reduction,
    probabilistic_serial,
)
from .matching import deferred_acceptance, is_strongly_stable, is_weakly_stable
from .oracle import (
    enumerate_consistent_matchings,
    expost_oracle,
    lp_membership,
    robust_oracle,
)
from .randmatch import birkhoff_decompose
from .rationals import format_rational
from .robust import is_robust_expost_stable
from .strong import expost_strong_decompose

EXIT_OK = 0
EXIT_DIVERGENCE = 1
EXIT_INPUT = 2
EXIT_FAILS = 3
EXIT_CAP = 4


@dataclass
class CommandOutcome:
    exit_code: int
    payload: dict


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _violations_payload(report):
    return [
        {"agent": v.agent, "item": v.item, "condition": v.condition,
         "lhs": format_rational(v.lhs)}
        for v in report.violations
    ]


def _blocking_payload(report):
    return [
        {"agent": bp.agent, "item": bp.item, "kind": bp.kind}
        for bp in report.blocking_pairs
    ]


def _emit_pair(args, inst, p, payload):
    """Inline or write out a generated instance/matrix pair."""
    files = {}
    out_inst = getattr(args, "out_instance", None)
    out_mat = getattr(args, "out_matrix", None)
    if inst is not None:
        if out_inst:
            jsonio.dump_instance(inst, out_inst)
            files["instance"] = out_inst
        else:
            payload["instance"] = jsonio.instance_to_dict(inst)
    if p is not None:
        if out_mat:
            jsonio.dump_matrix(p, out_mat)
            files["matrix"] = out_mat
        else:
            payload["matrix"] = jsonio.matrix_to_dict(p)
    if files:
        payload["files"] = files
    return payload


def _cmd_validate(args):
    inst = jsonio.load_instance(args.instance)
    report = validate_instance(inst)
    payload = {
        "valid": report.ok,
        "violations": [{"code": v.code, "message": v.message}
                       for v in report.violations],
    }
    return CommandOutcome(EXIT_OK if report.ok else EXIT_FAILS, payload)


def _cmd_complete(args):
    inst = jsonio.load_instance(args.instance)
    p = jsonio.load_matrix(args.matrix) if args.matrix else None
    cinst, cp = complete_instance(inst, p)
    payload = {"n": cinst.n, "was_complete": inst.complete}
    return CommandOutcome(EXIT_OK, _emit_pair(args, cinst, cp, payload))


def _cmd_check_stable(args):
    inst = jsonio.load_instance(args.instance)
    m = jsonio.load_matching(args.matching)
    check = is_strongly_stable if args.strong else is_weakly_stable
    report = check(inst, m)
    payload = {
        "stable": report.stable,
        "notion": "strong" if args.strong else "weak",
        "blocking_pairs": _blocking_payload(report),
    }
    return CommandOutcome(EXIT_OK if report.stable else EXIT_FAILS, payload)


def _cmd_da(args):
    inst = jsonio.load_instance(args.instance)
    m = deferred_acceptance(inst, seed=args.seed)
    payload = {"matching": {a: o for a, o in m.pairs}, "seed": args.seed}
    if args.out_matching:
        jsonio.dump_matching(m, args.out_matching)
        payload["files"] = {"matching": args.out_matching}
    return CommandOutcome(EXIT_OK, payload)


def _cmd_birkhoff(args):
    p = jsonio.load_matrix(args.matrix)
    inst = jsonio.load_instance(args.instance) if args.instance else None
    decomp = birkhoff_decompose(p, inst)
    payload = {
        "terms": jsonio.decomposition_to_list(decomp),
        "total_weight": format_rational(decomp.total_weight),
    }
    return CommandOutcome(EXIT_OK, payload)


def _cmd_fractional(args):
    inst = jsonio.load_instance(args.instance)
    p = jsonio.load_matrix(args.matrix)
    cinst, cp = complete_instance(inst, p)
    check = (is_fractionally_strongly_stable if args.strong
             else is_fractionally_stable)
    report = check(cinst, cp)
    payload = {
        "stable": report.stable,
        "notion": "strong" if args.strong else "weak",
        "violations": _violations_payload(report),
    }
    return CommandOutcome(EXIT_OK if report.stable else EXIT_FAILS, payload)


def _cmd_expost(args):
    inst = jsonio.load_instance(args.instance)
    p = jsonio.load_matrix(args.matrix)
    result = max_stable_decomposition(inst, p, cap=args.cap)
    payload = {
        "is_expost_stable": result.is_expost_stable,
        "stable_probability": format_rational(result.max_stable_probability),
        "considered": result.considered,
    }
    if args.emit_decomposition:
        payload["decomposition"] = jsonio.decomposition_to_list(
            result.decomposition)
    if args.oracle:
        verdict, _ = expost_oracle(inst, p)
        payload["oracle"] = verdict
        if verdict != result.is_expost_stable:
            payload["divergence"] = {
                "decider": result.is_expost_stable, "oracle": verdict,
            }
            return CommandOutcome(EXIT_DIVERGENCE, payload)
    code = EXIT_OK if result.is_expost_stable else EXIT_FAILS
    return CommandOutcome(code, payload)


def _cmd_expost_strong(args):
    inst = jsonio.load_instance(args.instance)
    p = jsonio.load_matrix(args.matrix)
    result = expost_strong_decompose(inst, p, cap=args.cap)
    payload = {
        "is_expost_strongly_stable": result.is_expost_strongly_stable,
        "method": result.method,
        "violations": _violations_payload(result.fractional),
    }
    if args.emit_decomposition:
        payload["decomposition"] = jsonio.decomposition_to_list(
            result.decomposition)
    if args.oracle:
        cinst, cp = complete_instance(inst, p)
        mats = enumerate_consistent_matchings(cinst, cp)
        strong = [m for m in mats if is_strongly_stable(cinst, m).stable]
        verdict, _ = lp_membership(cp, strong)
        payload["oracle"] = verdict
        if verdict != result.is_expost_strongly_stable:
            payload["divergence"] = {
                "decider": result.is_expost_strongly_stable, "oracle": verdict,
            }
            return CommandOutcome(EXIT_DIVERGENCE, payload)
    code = EXIT_OK if result.is_expost_strongly_stable else EXIT_FAILS
    return CommandOutcome(code, payload)


def _witness_payload(witness):
    agent, item, m = witness
    return {
        "agent": agent, "item": item,
        "matching": {a: o for a, o in m.pairs},
    }


def _cmd_robust(args):
    inst = jsonio.load_instance(args.instance)
    p = jsonio.load_matrix(args.matrix)
    result = is_robust_expost_stable(inst, p, all_witnesses=args.all_witnesses)
    payload = {"robust": result.robust}
    payload["witness"] = (
        _witness_payload(result.witness) if result.witness else None
    )
    if args.all_witnesses:
        payload["witnesses"] = [
            _witness_payload(w) for w in (result.witnesses or [])
        ]
    if args.oracle:
        verdict, _ = robust_oracle(inst, p)
        payload["oracle"] = verdict
        if verdict != result.robust:
            payload["divergence"] = {"decider": result.robust,
                                     "oracle": verdict}
            return CommandOutcome(EXIT_DIVERGENCE, payload)
    return CommandOutcome(EXIT_OK if result.robust else EXIT_FAILS, payload)


def _cmd_consistent_stable(args):
    inst = jsonio.load_instance(args.instance)
    p = jsonio.load_matrix(args.matrix)
    m = find_consistent_stable(inst, p, cap=args.cap)
    payload = {
        "found": m is not None,
        "matching": {a: o for a, o in m.pairs} if m is not None else None,
    }
    return CommandOutcome(EXIT_OK if m is not None else EXIT_FAILS, payload)


def _cmd_gen_example1(args):
    inst, p_uniform, p_improved, _, _ = gen_example1()
    p = p_uniform if args.which == "uniform" else p_improved
    payload = {"which": args.which}
    return CommandOutcome(EXIT_OK, _emit_pair(args, inst, p, payload))


def _cmd_gen_x3c(args):
    x3c = jsonio.load_x3c(args.x3c)
    inst, p = gen_x3c_reduction(x3c, args.variant)
    payload = {"variant": args.variant, "n": len(inst.agents)}
    return CommandOutcome(EXIT_OK, _emit_pair(args, inst, p, payload))


def _cmd_gen_random(args):
    inst = gen_random_instance(
        args.n, tie_model=args.tie_model, density=args.density,
        seed=args.seed, n_items=args.items,
    )
    payload = {"seed": args.seed, "tie_model": args.tie_model}
    return CommandOutcome(EXIT_OK, _emit_pair(args, inst, None, payload))


def _cmd_gen_mixture(args):
    inst = jsonio.load_instance(args.instance)
    p = gen_random_mixture(inst, k=args.k, seed=args.seed)
    payload = {"k": args.k, "seed": args.seed}
    return CommandOutcome(EXIT_OK, _emit_pair(args, None, p, payload))


def _cmd_gen_ps(args):
    inst = jsonio.load_instance(args.instance)
    p = probabilistic_serial(inst)
    return CommandOutcome(EXIT_OK, _emit_pair(args, None, p, {}))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="expostmatch",
        description="Exact deciders for lotteries over stable matchings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, handler, help_text):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.set_defaults(handler=handler)
        return sp

    sp = cmd("validate", _cmd_validate, "Check an instance file for defects.")
    sp.add_argument("--instance", required=True)

    sp = cmd("complete", _cmd_complete,
             "Pad an incomplete instance (and matrix) with dummy partners.")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--matrix")
    sp.add_argument("--out-instance")
    sp.add_argument("--out-matrix")

    sp = cmd("check-stable", _cmd_check_stable,
             "Test a deterministic matching for stability.")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--matching", required=True)
    sp.add_argument("--strong", action="store_true")

    sp = cmd("da", _cmd_da,
             "Proposal algorithm on a seeded tie-broken instance.")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-matching")

    sp = cmd("birkhoff", _cmd_birkhoff,
             "Decompose a bistochastic matrix into permutation matchings.")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--instance")

    sp = cmd("fractional", _cmd_fractional,
             "Check the fractional stability inequalities.")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--strong", action="store_true")

    sp = cmd("expost", _cmd_expost,
             "Maximum stable mass and ex-post stability of a matrix.")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--cap", type=int, default=100_000)
    sp.add_argument("--emit-decomposition", action="store_true")
    sp.add_argument("--oracle", action="store_true")

    sp = cmd("expost-strong", _cmd_expost_strong,
             "Decomposability into strongly stable matchings.")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--cap", type=int, default=100_000)
    sp.add_argument("--emit-decomposition", action="store_true")
    sp.add_argument("--oracle", action="store_true")

    sp = cmd("robust", _cmd_robust,
             "Whether every decomposition of the matrix is stable.")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--all-witnesses", action="store_true")
    sp.add_argument("--oracle", action="store_true")

    sp = cmd("consistent-stable", _cmd_consistent_stable,
             "Find one stable matching inside the support of a matrix.")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--cap", type=int, default=100_000)

    gen = sub.add_parser("gen", help="Instance and matrix generators.")
    gsub = gen.add_subparsers(dest="generator", required=True)

    def gcmd(name, handler, help_text):
        sp = gsub.add_parser(name, help=help_text, description=help_text)
        sp.set_defaults(handler=handler)
        sp.add_argument("--out-instance")
        sp.add_argument("--out-matrix")
        return sp

    sp = gcmd("example1", _cmd_gen_example1,
              "The 4x4 worked example with its two matrices.")
    sp.add_argument("--which", choices=("uniform", "improved"),
                    default="improved")

    sp = gcmd("x3c", _cmd_gen_x3c,
              "Reduce an exact-cover instance to a matching market.")
    sp.add_argument("--x3c", required=True)
    sp.add_argument("--variant", choices=REDUCTION_VARIANTS, required=True)

    sp = gcmd("random", _cmd_gen_random, "Seeded random instance.")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--items", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tie-model", choices=TIE_MODELS, default="weak")
    sp.add_argument("--density", type=float, default=1.0)

    sp = gcmd("mixture", _cmd_gen_mixture,
              "Convex mixture of seeded proposal outcomes.")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)

    sp = gcmd("ps", _cmd_gen_ps,
              "Simultaneous-eating matrix of a complete instance.")
    sp.add_argument("--instance", required=True)

    return parser


def run(argv) -> CommandOutcome:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except InputError as exc:
        return CommandOutcome(EXIT_INPUT, {"error": str(exc)})
    except CapExceededError as exc:
        return CommandOutcome(EXIT_CAP, {"error": str(exc), "cap": exc.cap})


def main(argv=None):
    outcome = run(sys.argv[1:] if argv is None else argv)
    print(json.dumps(outcome.payload, indent=2, sort_keys=True))
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
