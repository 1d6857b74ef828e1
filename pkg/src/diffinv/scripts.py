"""Problem files, proof scripts, and replay of scripts into kernel proof trees."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from . import kernel
from .derivation import OdeSystem
from .formulas import TRUE, Formula, ParseError, parse, parse_term
from .formulas import variables as formula_variables
from .kernel import Box, ProofNode, Problem, Sequent, is_axiom
from .reduce import REDUCTIONS
from .terms import Polynomial


class ScriptError(ValueError):
    """A script is malformed or one of its steps does not apply."""


# -- problem files -------------------------------------------------------------


@dataclass(frozen=True)
class ProblemFile:
    variables: tuple[str, ...]
    constants: tuple[str, ...]
    problem: Problem


_ODE_PART = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*'\s*=\s*(.+?)\s*$")


def parse_problem(text: str) -> ProblemFile:
    decl_vars: list[str] = []
    decl_consts: list[str] = []
    fields: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if key in ("var", "const"):
                names = [n.strip() for n in rest.split(",") if n.strip()]
                if not names or not all(re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n) for n in names):
                    raise ParseError(f"bad {key} declaration", rest, 0)
                (decl_vars if key == "var" else decl_consts).extend(names)
            elif key == "ode":
                if "ode" in fields:
                    raise ParseError("more than one ode line", rest, 0)
                eqs = []
                for part in rest.split(","):
                    m = _ODE_PART.match(part)
                    if not m:
                        raise ParseError("expected x' = term", part, 0)
                    eqs.append((m.group(1), parse_term(m.group(2))))
                fields["ode"] = eqs
            elif key in ("domain", "pre", "post"):
                if key in fields:
                    raise ParseError(f"duplicate {key} line", rest, 0)
                fields[key] = parse(rest)
            else:
                raise ParseError(f"unknown keyword {key!r}", line, 0)
        except (ParseError, ValueError) as exc:
            raise ScriptError(f"line {lineno}: {exc}") from exc
    for key in ("ode", "pre", "post"):
        if key not in fields:
            raise ScriptError(f"missing {key} line")
    try:
        sys = OdeSystem(fields["ode"], fields.get("domain", TRUE))
    except ValueError as exc:
        raise ScriptError(str(exc)) from exc
    problem = Problem(sys, fields["pre"], fields["post"])
    declared = set(decl_vars) | set(decl_consts)
    if set(decl_vars) & set(decl_consts):
        raise ScriptError("a symbol is declared both var and const")
    used = set(sys.symbols) | formula_variables(problem.pre) | formula_variables(problem.post)
    if used - declared:
        raise ScriptError(f"undeclared symbols: {', '.join(sorted(used - declared))}")
    if set(sys.evolving) - set(decl_vars):
        raise ScriptError("only variables may have differential equations")
    return ProblemFile(tuple(decl_vars), tuple(decl_consts), problem)


def format_problem(pf: ProblemFile) -> str:
    sys = pf.problem.sys
    lines = []
    if pf.variables:
        lines.append("var " + ", ".join(pf.variables))
    if pf.constants:
        lines.append("const " + ", ".join(pf.constants))
    lines.append("ode " + ", ".join(f"{v}' = {t}" for v, t in sys.equations))
    if sys.domain != TRUE:
        lines.append(f"domain {sys.domain}")
    lines.append(f"pre {pf.problem.pre}")
    lines.append(f"post {pf.problem.post}")
    return "\n".join(lines) + "\n"


# -- proof scripts -------------------------------------------------------------


@dataclass(frozen=True)
class Invariant:
    formula: Formula
    open: bool = False


@dataclass(frozen=True)
class Cut:
    formula: Formula
    left: "Script"
    right: "Script"


@dataclass(frozen=True)
class Aux:
    var: str
    theta: Polynomial
    psi: Formula
    body: "Script"
    assume_global: bool = False
    witness: Optional[Polynomial] = None


@dataclass(frozen=True)
class Weaken:
    pass


@dataclass(frozen=True)
class Generalize:
    formula: Formula
    body: "Script"


@dataclass(frozen=True)
class UseReduction:
    name: str


Script = Union[Invariant, Cut, Aux, Weaken, Generalize, UseReduction]

_ARITY = {"invariant": 0, "open-invariant": 0, "weaken": 0, "use-reduction": 0, "cut": 2, "aux": 1, "generalize": 1}
_AUX = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*'\s*=\s*(.+?)\s+with\s+(.+)$", re.S)


def _script_tokens(text: str) -> list[str]:
    out, buf = [], []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        for ch in line + "\n":
            if ch in "{};\n":
                if "".join(buf).strip():
                    out.append("".join(buf).strip())
                buf = []
                if ch in "{}":
                    out.append(ch)
            else:
                buf.append(ch)
    return out


def _header(text: str, blocks: list[Script]) -> Script:
    key, _, rest = text.partition(" ")
    rest = rest.strip()
    if key not in _ARITY:
        raise ScriptError(f"unknown directive {key!r}")
    if len(blocks) != _ARITY[key]:
        raise ScriptError(f"{key} takes {_ARITY[key]} block(s), got {len(blocks)}")
    try:
        if key in ("invariant", "open-invariant"):
            return Invariant(parse(rest), open=key == "open-invariant")
        if key == "weaken":
            if rest:
                raise ScriptError("weaken takes no argument")
            return Weaken()
        if key == "use-reduction":
            if rest not in REDUCTIONS:
                raise ScriptError(f"unknown reduction {rest!r}")
            return UseReduction(rest)
        if key == "cut":
            return Cut(parse(rest), blocks[0], blocks[1])
        if key == "generalize":
            return Generalize(parse(rest), blocks[0])
        m = _AUX.match(rest)
        if not m:
            raise ScriptError("expected aux y' = term with formula")
        psi_text, witness, assume_global = m.group(3), None, False
        if " witness " in f" {psi_text} ":
            psi_text, _, w = psi_text.partition("witness")
            witness = parse_term(w)
        if psi_text.rstrip().endswith("assume-global"):
            psi_text = psi_text.rstrip()[: -len("assume-global")]
            assume_global = True
        return Aux(m.group(1), parse_term(m.group(2)), parse(psi_text), blocks[0], assume_global, witness)
    except ParseError as exc:
        raise ScriptError(f"{key}: {exc}") from exc


def parse_script(text: str) -> Script:
    toks = _script_tokens(text)
    pos = 0

    def directive() -> Script:
        nonlocal pos
        if pos >= len(toks) or toks[pos] in "{}":
            raise ScriptError("expected a directive")
        head = toks[pos]
        pos += 1
        blocks = []
        while pos < len(toks) and toks[pos] == "{":
            pos += 1
            blocks.append(directive())
            if pos >= len(toks) or toks[pos] != "}":
                raise ScriptError("expected '}'")
            pos += 1
        return _header(head, blocks)

    script = directive()
    if pos != len(toks):
        raise ScriptError(f"trailing input: {toks[pos]!r}")
    return script


def format_script(s: Script) -> str:
    if isinstance(s, Invariant):
        return f"{'open-invariant' if s.open else 'invariant'} {s.formula}"
    if isinstance(s, Weaken):
        return "weaken"
    if isinstance(s, UseReduction):
        return f"use-reduction {s.name}"
    if isinstance(s, Cut):
        return f"cut {s.formula} {{ {format_script(s.left)} }} {{ {format_script(s.right)} }}"
    if isinstance(s, Generalize):
        return f"generalize {s.formula} {{ {format_script(s.body)} }}"
    extra = (" assume-global" if s.assume_global else "") + (f" witness {s.witness}" if s.witness is not None else "")
    return f"aux {s.var}' = {s.theta} with {s.psi}{extra} {{ {format_script(s.body)} }}"


# -- replay --------------------------------------------------------------------


def _step(goal: Sequent, rule: str, premises: list[ProofNode], **args) -> ProofNode:
    try:
        return kernel.make_node(goal, rule, premises, **args)
    except kernel.KernelError as exc:
        raise ScriptError(f"{rule}: {exc}") from exc


def _premises(goal: Sequent, rule: str, **args) -> tuple[Sequent, ...]:
    try:
        return kernel.premises_of(goal, rule, args)
    except kernel.KernelError as exc:
        raise ScriptError(f"{rule} does not apply to {goal}: {exc}") from exc


def close(goal: Sequent) -> ProofNode:
    """Leaf for a first-order sequent: axiom when syntactic, else arithmetic."""
    return ProofNode(goal, "ax" if is_axiom(goal) else "arith")


def induction(goal: Sequent, strict: bool = False, open_: bool = False) -> ProofNode:
    rule = "di_open" if open_ else "di"
    (prem,) = _premises(goal, rule, strict=strict)
    return _step(goal, rule, [close(prem)], strict=strict)


def _invariant(goal: Sequent, f: Formula, strict: bool, open_: bool) -> ProofNode:
    box = goal.box
    if box is not None and box.post == f and f in goal.antecedent:
        return induction(goal, strict, open_)
    first, middle, last = _premises(goal, "variation", invariant=f)
    return _step(goal, "variation", [close(first), induction(middle, strict, open_), close(last)], invariant=f)


def replay(script: Script, goal: Union[Problem, Sequent], strict: bool = False) -> ProofNode:
    """Expand a script into a kernel proof tree rooted at ``goal``."""
    if isinstance(goal, Problem):
        goal = goal.sequent()
    if goal.box is None:
        raise ScriptError(f"no modal goal in {goal}")
    if isinstance(script, Invariant):
        return _invariant(goal, script.formula, strict, script.open)
    if isinstance(script, UseReduction):
        try:
            f = REDUCTIONS[script.name](goal.box.post)
        except ValueError as exc:
            raise ScriptError(f"use-reduction {script.name}: {exc}") from exc
        return _invariant(goal, f, strict, False)
    if isinstance(script, Weaken):
        (prem,) = _premises(goal, "dw")
        return _step(goal, "dw", [close(prem)])
    if isinstance(script, Cut):
        left, right = _premises(goal, "dc", cut=script.formula)
        return _step(goal, "dc", [replay(script.left, left, strict), replay(script.right, right, strict)], cut=script.formula)
    if isinstance(script, Aux):
        args = dict(y=script.var, theta=script.theta, psi=script.psi, witness=script.witness, assume_global=script.assume_global)
        prems = _premises(goal, "da", **args)
        nodes = [close(p) for p in prems[:-1]] + [replay(script.body, prems[-1], strict)]
        return _step(goal, "da", nodes, **args)
    if isinstance(script, Generalize):
        boxed = Box(goal.box.sys, script.formula)
        left, right = _premises(goal, "cut", phi=boxed)
        node_right = _hide_then_gen(right, boxed)
        return _step(goal, "cut", [replay(script.body, left, strict), node_right], phi=boxed)
    raise ScriptError(f"not a script: {script!r}")


def _hide_then_gen(goal: Sequent, keep: Box) -> ProofNode:
    others = [a for a in goal.antecedent if a != keep]
    if not others:
        (prem,) = _premises(goal, "gen")
        return _step(goal, "gen", [close(prem)])
    (prem,) = _premises(goal, "hide", formula=others[0])
    return _step(goal, "hide", [_hide_then_gen(prem, keep)], formula=others[0])


# -- serialization -------------------------------------------------------------


def _arg_text(v: Any) -> Any:
    if isinstance(v, bool) or v is None:
        return v
    return str(v)


def tree_to_json(node: ProofNode, leaves: Optional[dict] = None, path: tuple[int, ...] = ()) -> dict:
    """Plain-data view of a proof tree; leaf verdicts are included when given."""
    out: dict[str, Any] = {
        "rule": node.rule,
        "conclusion": str(node.conclusion),
        "args": {k: _arg_text(v) for k, v in sorted(node.args.items())},
        "premises": [tree_to_json(p, leaves, path + (i,)) for i, p in enumerate(node.premises)],
    }
    if leaves is not None and path in leaves:
        out["verdict"] = str(leaves[path])
    return out


def tree_hash(node: ProofNode) -> str:
    data = json.dumps(tree_to_json(node), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(data.encode("utf-8")).hexdigest()


def render_tree(node: ProofNode, leaves: Optional[dict] = None) -> str:
    lines: list[str] = []

    def walk(n: ProofNode, path: tuple[int, ...], depth: int):
        args = ", ".join(f"{k}={_arg_text(v)}" for k, v in sorted(n.args.items()) if v not in (None, False))
        tag = f"{n.rule}[{args}]" if args else n.rule
        verdict = f"  => {leaves[path]}" if leaves and path in leaves else ""
        lines.append(f"{'  ' * depth}{tag}: {n.conclusion}{verdict}")
        for i, p in enumerate(n.premises):
            walk(p, path + (i,), depth + 1)

    walk(node, (), 0)
    return "\n".join(lines)
