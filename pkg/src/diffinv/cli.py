"""Command-line front end: ``diffinv check|prove|derive|falsify``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .arith import Verdict
from .derivation import derive_formula
from .formulas import ParseError, parse, parse_opclass
from .kernel import MalformedTree, check_leaves, check_proof
from .numsim import StepTooSmall, falsify
from .scripts import (
    ScriptError,
    format_script,
    parse_problem,
    parse_script,
    render_tree,
    replay,
    tree_hash,
    tree_to_json,
)
from .search import SearchConfig, search_script

EXIT_OK, EXIT_INVALID, EXIT_UNKNOWN, EXIT_USAGE, EXIT_NONE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get("DIFFINV_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DIFFINV_SEED must be an integer, got {raw!r}")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _coeffs(text: str) -> tuple[Fraction, ...]:
    """``-1,0,1`` or a range ``-2..2``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return tuple(Fraction(c) for c in range(int(lo), int(hi) + 1))
        return tuple(Fraction(c) for c in text.split(",") if c.strip())
    except ValueError:
        raise UsageError(f"bad coefficient pool {text!r}")


def _box(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"bad box {text!r}, expected lo,hi")
    if lo > hi:
        raise UsageError("box lower bound exceeds upper bound")
    return lo, hi


def _verdict_json(v: Verdict) -> dict:
    out: dict = {"status": v.status}
    if v.certificate:
        out["certificate"] = v.certificate
    if v.witness is not None:
        out["witness"] = {k: str(x) for k, x in v.witness.items()}
    if v.path is not None:
        out["path"] = list(v.path)
    return out


def _emit(data: dict):
    print(json.dumps(data, sort_keys=True, indent=2))


def _exit_for(v: Verdict) -> int:
    return EXIT_OK if v.is_valid else EXIT_INVALID if v.is_invalid else EXIT_UNKNOWN


def _report_tree(tree, seed: int, as_json: bool, extra: Optional[dict] = None) -> int:
    leaves = {leaf.path: leaf.verdict for leaf in check_leaves(tree, seed)}
    verdict = check_proof(tree, seed)
    if as_json:
        data = {
            "verdict": _verdict_json(verdict),
            "hash": tree_hash(tree),
            "tree": tree_to_json(tree, leaves),
        }
        data.update(extra or {})
        _emit(data)
    else:
        if extra and "script" in extra:
            print(extra["script"])
        print(render_tree(tree, leaves))
        print(f"result: {verdict}")
        if verdict.is_invalid:
            print(f"refuted leaf: {'/'.join(map(str, verdict.path or ())) or 'root'}")
    return _exit_for(verdict)


def cmd_check(args) -> int:
    pf = parse_problem(_read(args.problem))
    script = parse_script(_read(args.proof))
    tree = replay(script, pf.problem, strict=args.strict_derivatives)
    return _report_tree(tree, args.seed, args.json)


def cmd_prove(args) -> int:
    pf = parse_problem(_read(args.problem))
    try:
        cfg = SearchConfig(
            opclass=parse_opclass(args.cls),
            max_degree=args.max_degree,
            coefficient_pool=_coeffs(args.coeffs),
            max_atoms=args.max_atoms,
            max_cuts=args.cuts,
            allow_open_di=args.open,
            da_degree=args.da_degree,
            budget=args.budget,
            seed=args.seed,
            strict=args.strict_derivatives,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    found = search_script(pf.problem, cfg)
    if found is None:
        if args.json:
            _emit({"found": False})
        else:
            print("no proof within the search bounds")
        return EXIT_NONE
    script, tree = found
    return _report_tree(tree, args.seed, args.json, {"found": True, "script": format_script(script)})


def cmd_derive(args) -> int:
    pf = parse_problem(_read(args.problem))
    f = parse(args.formula)
    out = derive_formula(f, pf.problem.sys, strict=args.strict_derivatives)
    if args.json:
        _emit({"formula": str(f), "derived": str(out)})
    else:
        print(out)
    return EXIT_OK


def cmd_falsify(args) -> int:
    pf = parse_problem(_read(args.problem))
    p = pf.problem
    if args.samples <= 0 or args.step <= 0 or args.time < 0:
        raise UsageError("samples and step must be positive, time non-negative")
    try:
        cex = falsify(p.sys, p.pre, p.post, samples=args.samples, box=_box(args.box), h=args.step, T=args.time, seed=args.seed)
    except StepTooSmall as exc:
        raise UsageError(str(exc))
    if cex is None:
        if args.json:
            _emit({"found": False})
        else:
            print("no counterexample found")
        return EXIT_NONE
    if args.json:
        _emit(
            {
                "found": True,
                "initial": {k: str(v) for k, v in cex.initial.items()},
                "exit_time": cex.exit_time,
                "exit_state": cex.exit_state,
                "margin": cex.margin,
            }
        )
    else:
        print("counterexample")
        print("  initial:    " + ", ".join(f"{k}={v}" for k, v in cex.initial.items()))
        print(f"  exit time:  {cex.exit_time:.6g}")
        print("  exit state: " + ", ".join(f"{k}={v:.6g}" for k, v in cex.exit_state.items()))
        print(f"  margin:     {cex.margin:.3g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diffinv", description="Differential invariant checking and search.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, problem=True):
        if problem:
            p.add_argument("problem", help="problem file (.div)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--strict-derivatives", action="store_true", help="derive > to > instead of >=")

    p = sub.add_parser("check", help="replay a proof script through the kernel")
    common(p)
    p.add_argument("--proof", required=True, help="proof script (.prf)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("prove", help="search for a proof")
    common(p)
    p.add_argument("--class", dest="cls", default="geq,gt,eq,and,or")
    p.add_argument("--max-degree", type=int, default=2)
    p.add_argument("--coeffs", default="-1,0,1")
    p.add_argument("--max-atoms", type=int, default=1)
    p.add_argument("--cuts", type=int, default=0)
    p.add_argument("--open", action="store_true", help="allow open differential induction")
    p.add_argument("--da-degree", type=int, default=0, help="enable auxiliary-variable templates")
    p.add_argument("--budget", type=int, default=10_000)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("derive", help="print the differential formula of --formula")
    common(p)
    p.add_argument("--formula", required=True)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("falsify", help="look for a violating trajectory numerically")
    common(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--box", default="-5,5")
    p.add_argument("--time", type=float, default=10.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.set_defaults(func=cmd_falsify)
    return parser


_VALUE_FLAGS = ("--coeffs", "--box")


def _attach_values(argv: Sequence[str]) -> list[str]:
    # "--coeffs -1,0,1" would otherwise read -1,0,1 as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            out.append(f"{tok}={next(it, '')}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_attach_values(argv))
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except (UsageError, ScriptError, ParseError, MalformedTree) as exc:
        print(f"diffinv: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
