"""Command line front end.

Exit codes: 0 success / equivalent; 1 inequivalent verdicts or fuzz
failures; 2 usage and parse errors; 3 exceeded guard bounds.
"""

from __future__ import annotations

import argparse
import json
import random
import sys as _sys

from . import gen
from .bisim import brute_bisim, decide_equiv, minimize, refine
from .errors import (
    DocumentError, LayeringError, LimitExceededError, ParseError, StarexprError,
)
from .layering import (
    check_well_layered, labelling_doc, labelling_from_doc,
    search_labelling, syntactic_labelling,
)
from .semantics import (
    System, export_dot, export_system, load_system, reachable, step, step_doc,
)
from .solve import canonical_solution, roundtrip, simplify, sterm_to_expr
from .syntax import Seq, Star, compute_U, parse, print_expr
from .theory import (
    TheoryConfig, eta, eval_term, mval_map, parse_selector, reify, split, supp,
)

USAGE_EXIT, VERDICT_EXIT, BOUND_EXIT = 2, 1, 3


def _cfg(args) -> TheoryConfig:
    if not args.theory:
        raise _Usage("--theory is required for this command")
    try:
        return parse_selector(args.theory)
    except ValueError as exc:
        raise _Usage(str(exc)) from None


class _Usage(Exception):
    pass


def _read_doc(path: str):
    if path == "-":
        text = _sys.stdin.read()
    else:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not valid JSON: {exc}") from None


def _emit(doc):
    print(json.dumps(doc, indent=2, ensure_ascii=False))


def _load_system_arg(args) -> System:
    return load_system(_read_doc(args.document))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_parse(args):
    cfg = _cfg(args)
    print(repr(parse(args.expr, cfg)))
    return 0


def _cmd_sem(args):
    cfg = _cfg(args)
    e = parse(args.expr, cfg)
    _emit(step_doc(cfg, step(cfg, e)))
    return 0


def _cmd_reach(args):
    cfg = _cfg(args)
    e = parse(args.expr, cfg)
    sys_, _root = reachable(cfg, e)
    if args.dot:
        _sys.stdout.write(export_dot(sys_))
    else:
        _emit(export_system(sys_))
    return 0


def _cmd_equiv(args):
    cfg = _cfg(args)
    e1 = parse(args.expr1, cfg)
    e2 = parse(args.expr2, cfg)
    if decide_equiv(cfg, e1, e2):
        print("equivalent")
        return 0
    print("inequivalent")
    return VERDICT_EXIT


def _cmd_minimize(args):
    sys_ = _load_system_arg(args)
    msys, h = minimize(sys_)
    _emit({"system": export_system(msys), "h": {x: h[x] for x in sys_.states}})
    return 0


def _cmd_label(args):
    modes = [m for m in ("from_expr", "check", "search") if getattr(args, m)]
    if len(modes) != 1:
        raise _Usage("label needs exactly one of --from-expr, --check, --search")
    mode = modes[0]
    if mode == "from_expr":
        cfg = _cfg(args)
        e = parse(args.from_expr, cfg)
        sys_, _root = reachable(cfg, e)
        lab = syntactic_labelling(cfg, e, sys_)
        doc = export_system(sys_)
        doc["labelling"] = labelling_doc(lab)
        _emit(doc)
        return 0
    doc = _read_doc(args.check if mode == "check" else args.search)
    sys_ = load_system(doc)
    if mode == "check":
        if "labelling" not in doc:
            raise DocumentError("document has no 'labelling' to check")
        lab = labelling_from_doc(doc["labelling"], sys_)
        verdict = check_well_layered(sys_, lab)
        print(verdict.describe())
        return 0 if verdict.ok else VERDICT_EXIT
    lab = search_labelling(sys_)
    if lab is None:
        print("none")
        return VERDICT_EXIT
    out = export_system(sys_)
    out["labelling"] = labelling_doc(lab)
    _emit(out)
    return 0


def _cmd_solve(args):
    doc = _read_doc(args.document)
    sys_ = load_system(doc)
    if "labelling" not in doc:
        raise DocumentError("solve needs a system document with a 'labelling'")
    lab = labelling_from_doc(doc["labelling"], sys_)
    verdict = check_well_layered(sys_, lab)
    if not verdict.ok:
        raise LayeringError(f"labelling is not well-layered: {verdict.describe()}")
    phi = canonical_solution(sys_, lab)
    if args.simplify:
        phi = {x: simplify(e) for x, e in phi.items()}
    out = export_system(sys_)
    out["labelling"] = labelling_doc(lab)
    out["solution"] = {x: print_expr(phi[x]) for x in sys_.states}
    _emit(out)
    return 0


def _cmd_roundtrip(args):
    cfg = _cfg(args)
    e = parse(args.expr, cfg)
    out = roundtrip(cfg, e)
    if args.simplify:
        out = simplify(out)
    print(print_expr(out))
    if decide_equiv(cfg, out, e):
        print("verified: bisimilar")
        return 0
    print("verified: NOT bisimilar")
    return VERDICT_EXIT


# ---------------------------------------------------------------------------
# fuzzing


def _sizes(count: int, size: int):
    """Ascending budgets, so the first failure is a small case."""
    return [1 + (i * size) // max(count, 1) for i in range(count)]


class _FuzzFailure(Exception):
    def __init__(self, prop, case, detail):
        super().__init__(prop)
        self.prop = prop
        self.case = case
        self.detail = detail


def _elements(i):
    return [f"x{j}" for j in range(i)]


def _prop_print_parse(rng, cfg, count, size):
    for budget in _sizes(count, size):
        e = gen.rand_expr(rng, cfg, budget)
        text = print_expr(e)
        back = parse(text, cfg)
        if back != e:
            raise _FuzzFailure("print-parse", text, f"reparsed to {print_expr(back)}")


def _prop_values(rng, cfg, count, size):
    """reify round-trip, split identity, functoriality, support naturality."""
    for budget in _sizes(count, size):
        universe = _elements(2 + budget % 4)
        m = gen.rand_mval(rng, cfg, universe)
        ident = {e: eta(cfg, e) for e in supp(m)}
        case = repr(m)
        if eval_term(cfg, reify(m), ident) != m:
            raise _FuzzFailure("reify-eval", case, "reify does not evaluate back")
        chosen = frozenset(e for e in universe if rng.random() < 0.5)
        s, t1, t2 = split(m, lambda e: e in chosen)
        composed = eval_term(cfg, s, {
            "u": eval_term(cfg, t1, ident), "v": eval_term(cfg, t2, ident)})
        if composed != m:
            raise _FuzzFailure("split-identity", case, f"partition {sorted(chosen)}")
        swap = {e: (e[::-1] if rng.random() < 0.5 else e) for e in universe}
        mapped = mval_map(lambda e: swap[e], m)
        if supp(mapped) != frozenset(swap[e] for e in supp(m)):
            raise _FuzzFailure("support-naturality", case, "supp does not commute with map")
        if mval_map(lambda e: e, m) != m:
            raise _FuzzFailure("functoriality", case, "identity map changed the value")


def _prop_axiom_schemas(rng, cfg, count, size):
    for budget in _sizes(count, size):
        e = gen.rand_expr(rng, cfg, budget)
        f = gen.rand_expr(rng, cfg, max(1, budget - 1))
        g = gen.rand_expr(rng, cfg, max(1, budget // 2))
        s = gen.rand_loop_term(rng, cfg)
        pairs = [
            ("assoc", Seq(e, Seq(f, g)), Seq(Seq(e, f), g)),
            ("unroll", Star(e, s, f),
             sterm_to_expr(s, {"u": Seq(e, Star(e, s, f)), "v": f})),
            ("star-dist", Seq(Star(e, s, f), g), Star(e, s, Seq(f, g))),
        ]
        t = gen.rand_term(rng, cfg, ("m", "n"), 2)
        inst = {"m": e, "n": g}
        pairs.append(("dist-seq",
                      Seq(sterm_to_expr(t, inst), f),
                      sterm_to_expr(t, {k: Seq(v, f) for k, v in inst.items()})))
        teq = gen.rand_term(rng, cfg, ("m", "n"), 3)
        seq_term = reify(eval_term(cfg, teq, {"m": eta(cfg, "m"), "n": eta(cfg, "n")}))
        pairs.append(("theory-eq",
                      sterm_to_expr(teq, inst), sterm_to_expr(seq_term, inst)))
        for name, lhs, rhs in pairs:
            if not decide_equiv(cfg, lhs, rhs):
                raise _FuzzFailure(name, print_expr(lhs), f"vs {print_expr(rhs)}")


def _prop_oracle(rng, cfg, count, size):
    del size
    for _ in range(count):
        sys_ = gen.rand_system(rng, cfg, rng.randint(1, 5))
        if refine(sys_) != brute_bisim(sys_):
            raise _FuzzFailure("refine-vs-brute", json.dumps(export_system(sys_)),
                               "partitions differ")


def _prop_layering(rng, cfg, count, size):
    for budget in _sizes(count, size):
        e = gen.rand_expr(rng, cfg, budget)
        sys_, _ = reachable(cfg, e)
        lab = syntactic_labelling(cfg, e, sys_)
        verdict = check_well_layered(sys_, lab)
        if not verdict.ok:
            raise _FuzzFailure("syntactic-labelling", print_expr(e), verdict.describe())
        if len(sys_.states) > len(compute_U(e)):
            raise _FuzzFailure("reachable-bound", print_expr(e),
                               f"{len(sys_.states)} states")


def _prop_roundtrip(rng, cfg, count, size):
    for budget in _sizes(count, size):
        e = gen.rand_expr(rng, cfg, budget)
        out = roundtrip(cfg, e)
        if not decide_equiv(cfg, out, e):
            raise _FuzzFailure("roundtrip", print_expr(e), f"got {print_expr(out)}")


_SUITES = [
    ("print-parse", _prop_print_parse, 1),
    ("values", _prop_values, 1),
    ("axiom-schemas", _prop_axiom_schemas, 4),
    ("refine-vs-brute", _prop_oracle, 4),
    ("layering", _prop_layering, 2),
    ("roundtrip", _prop_roundtrip, 4),
]


def _cmd_fuzz(args):
    cfg = _cfg(args)
    failures = 0
    for name, prop, divisor in _SUITES:
        count = max(1, args.count // divisor)
        rng = random.Random(f"{args.seed}:{cfg.selector()}:{name}")
        try:
            prop(rng, cfg, count, args.size)
        except _FuzzFailure as failure:
            print(f"FAIL {name}: {failure.prop}")
            print(f"  case: {failure.case}")
            print(f"  detail: {failure.detail}")
            failures += 1
            continue
        print(f"ok {name} ({count} cases)")
    return VERDICT_EXIT if failures else 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="starexpr",
        description="Star expressions over branching theories: semantics, "
                    "equivalence, labellings, and system solving.")
    sub = top.add_subparsers(dest="command", required=True)

    def with_theory(p):
        p.add_argument("--theory", help="theory selector: sl, ga:tests=p,q, ca, "
                                        "gc:tests=p, smod:nat|bool|rat")
        return p

    p = with_theory(sub.add_parser("parse", help="echo the parsed tree"))
    p.add_argument("expr")
    p.set_defaults(fn=_cmd_parse)

    p = with_theory(sub.add_parser("sem", help="print the one-step behaviour"))
    p.add_argument("expr")
    p.set_defaults(fn=_cmd_sem)

    p = with_theory(sub.add_parser("reach", help="emit the reachable system document"))
    p.add_argument("expr")
    p.add_argument("--dot", action="store_true", help="GraphViz output")
    p.set_defaults(fn=_cmd_reach)

    for alias in ("equiv", "bisim"):
        p = with_theory(sub.add_parser(alias, help="decide equivalence of two expressions"))
        p.add_argument("expr1")
        p.add_argument("expr2")
        p.set_defaults(fn=_cmd_equiv)

    p = sub.add_parser("minimize", help="quotient a system document by bisimilarity")
    p.add_argument("document", help="system document path, or - for stdin")
    p.set_defaults(fn=_cmd_minimize)

    p = with_theory(sub.add_parser("label", help="derive, check, or search labellings"))
    p.add_argument("--from-expr", dest="from_expr", metavar="EXPR",
                   help="syntactic labelling of the expression's reachable system")
    p.add_argument("--check", metavar="DOC", help="verify a labelled system document")
    p.add_argument("--search", metavar="DOC", help="search a labelling for a system document")
    p.set_defaults(fn=_cmd_label)

    p = sub.add_parser("solve", help="canonical solution of a labelled system document")
    p.add_argument("document", help="system+labelling document path, or - for stdin")
    p.add_argument("--simplify", action="store_true", help="apply the unrolling clean-up")
    p.set_defaults(fn=_cmd_solve)

    p = with_theory(sub.add_parser("roundtrip", help="minimize, solve, and verify an expression"))
    p.add_argument("expr")
    p.add_argument("--simplify", action="store_true", help="apply the unrolling clean-up")
    p.set_defaults(fn=_cmd_roundtrip)

    p = with_theory(sub.add_parser("fuzz", help="run the property suites"))
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--size", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_fuzz)

    return top


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _Usage as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return USAGE_EXIT
    except (ParseError, DocumentError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return USAGE_EXIT
    except LimitExceededError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return BOUND_EXIT
    except (LayeringError, StarexprError, ValueError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return USAGE_EXIT


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
