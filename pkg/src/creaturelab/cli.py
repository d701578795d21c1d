"""Command-line front end: every public operation of the laboratory is
reachable through exactly one subcommand.

Exit codes: 0 all checks pass, 1 some check fails, 2 usage error,
3 every graded check came back UNKNOWN.  Output is human-readable text
by default and JSON with --json.  Randomized commands take --seed (the
CREATURELAB_SEED environment variable supplies the default), and equal
seeds give byte-identical reports.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction

from . import blocks as bl
from . import compounds as cm
from . import conditions as cd
from . import suites as su
from .params import (FAIL, FP_ONLY, PASS, TOY, UNKNOWN, VERIFY, Height,
                     ParameterTable, generate_table, verify_table)
from .subatoms import Subatom, SubatomError

# operation -> (group, subcommand); several operations may share a
# subcommand, but each appears exactly once
OPERATIONS = {
    "params.generate_table": ("params", "gen"),
    "params.verify_table": ("params", "verify"),
    "compounds.validate_compound": ("creature", "validate"),
    "compounds.compound_norm": ("creature", "norm"),
    "subatoms.bigness_thin": ("creature", "thin"),
    "compounds.halve": ("creature", "halve"),
    "compounds.unhalve_restore": ("creature", "halve"),
    "compounds.amalgamate": ("creature", "amalgamate"),
    "compounds.disjointify": ("creature", "disjointify"),
    "compounds.homogenize_pr": ("creature", "homog"),
    "compounds.homogenize_lc": ("creature", "homog"),
    "blocks.make_block": ("block", "build"),
    "blocks.derive_block": ("block", "build"),
    "blocks.check_block": ("block", "check"),
    "blocks.gad_check": ("block", "gad"),
    "blocks.diagram_emit": ("block", "diagram"),
    "conditions.validate_fragment": ("cond", "validate"),
    "conditions.cond_leq": ("cond", "leq"),
    "conditions.poss_enum": ("cond", "poss"),
    "conditions.wedge": ("cond", "wedge"),
    "conditions.restrict": ("cond", "restrict"),
    "conditions.modestify": ("cond", "modest"),
    "compounds.separate_pr": ("cond", "separate"),
    "conditions.separate_support": ("cond", "separate"),
    "conditions.homogenize_fragment": ("cond", "homog"),
    "conditions.read_generic": ("cond", "read"),
    "conditions.slalom_value": ("cond", "read"),
    "suites.suite_run": ("suite", "run"),
    "suites.SUITES": ("suite", "list"),
}

_REGIMES = {"verify": VERIFY, "toy": TOY, "fp": FP_ONLY}


class CliError(Exception):
    """A usage-level problem: bad file, bad reference, unknown name."""


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def _emit(args, obj, text_lines):
    if args.json:
        print(json.dumps(obj, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _write_out(args, obj):
    blob = json.dumps(obj, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(blob + "\n")
    else:
        print(blob)


def _report_exit(rep) -> int:
    counts = rep.counts()
    if counts.get(FAIL, 0):
        return 1
    if counts.get(UNKNOWN, 0):
        return 3
    return 0


def _show_report(args, rep) -> int:
    _emit(args, rep.to_json(), rep.lines())
    return _report_exit(rep)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("CREATURELAB_SEED", "0"))


def _colour(seed: int, colours: int, key) -> int:
    blob = repr((seed, key)).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") % colours


def _parse_height(text: str) -> Height:
    parts = text.split(",")
    if len(parts) not in (2, 3):
        raise CliError(f"height {text!r}: expected kind,n[,sub]")
    kind, n = parts[0], int(parts[1])
    sub = int(parts[2]) if len(parts) == 3 else 0
    return Height(kind, n, sub)


def _tuplify(v):
    return tuple(_tuplify(x) for x in v) if isinstance(v, list) else v


# ---------------------------------------------------------------------------
# params
# ---------------------------------------------------------------------------


def _cmd_params_gen(args) -> int:
    knobs = {}
    if args.toy_cap is not None:
        knobs["toy_cap"] = args.toy_cap
    if args.digit_budget is not None:
        knobs["digit_budget"] = args.digit_budget
    table = generate_table(args.depth, _REGIMES[args.regime], knobs or None)
    _write_out(args, table.to_json())
    return 0


def _cmd_params_verify(args) -> int:
    table = ParameterTable.from_json(_load(args.table))
    return _show_report(args, verify_table(table))


# ---------------------------------------------------------------------------
# creature
# ---------------------------------------------------------------------------


def _table(args):
    return ParameterTable.from_json(_load(args.table))


def _cmd_creature_validate(args) -> int:
    c = cm.compound_from_json(_load(args.compound))
    return _show_report(args, cm.validate_compound(c, _table(args)))


def _cmd_creature_norm(args) -> int:
    c = cm.compound_from_json(_load(args.compound))
    nv = cm.compound_norm(c, _table(args))
    obj = {"value": float(nv.value()), "scale": str(nv.scale),
           "base": nv.base, "argument": str(nv.argument), "exact": nv.exact}
    _emit(args, obj, [f"norm = {obj['value']} "
                      f"({obj['scale']} * log_{obj['base']} {obj['argument']})"])
    return 0


def _cmd_creature_thin(args) -> int:
    s = Subatom.from_json(_load(args.subatom))
    raw = _load(args.labels)
    labels = {_tuplify(mem): int(lab) for mem, lab in raw["labels"]}
    from .subatoms import bigness_thin
    thin = bigness_thin(s, labels)
    _write_out(args, thin.to_json())
    return 0


def _cmd_creature_halve(args) -> int:
    c = cm.compound_from_json(_load(args.compound))
    table = _table(args)
    if args.restore:
        cp = cm.compound_from_json(_load(args.restore))
        out = cm.unhalve_restore(cp, c, table)
    else:
        out = cm.halve(c, table)
    _write_out(args, out.to_json())
    return 0


def _cmd_creature_amalgamate(args) -> int:
    c0 = cm.compound_from_json(_load(args.left))
    c1 = cm.compound_from_json(_load(args.right))
    out = cm.amalgamate(c0, c1, _table(args))
    _write_out(args, out.to_json())
    return 0


def _cmd_creature_disjointify(args) -> int:
    sets = [_tuplify(a) for a in _load(args.sets)]
    out = cm.disjointify(sets, args.m)
    _write_out(args, [sorted(b) for b in out])
    return 0


def _cmd_creature_homog(args) -> int:
    c = cm.compound_from_json(_load(args.compound))
    table = _table(args)
    seed = _seed(args)

    def f(asg):
        key = tuple(sorted(asg.items(), key=repr))
        return _colour(seed, args.colours, key)

    if c.kind == "pr":
        out = cm.homogenize_pr(c, f, args.level, table)
    else:
        out = cm.homogenize_lc(c, None, f, (0, 0), table, const=args.const)
    _write_out(args, out.to_json())
    return 0


# ---------------------------------------------------------------------------
# block
# ---------------------------------------------------------------------------


def _cmd_block_build(args) -> int:
    spec = _load(args.spec)
    if "table" in spec:
        table = ParameterTable.from_json(_load(spec["table"]))
        blk = bl.derive_block(table, tuple(spec["y"]), spec["kind"],
                              spec.get("horizon"))
    else:
        blk = bl.make_block(spec["d"], spec["h"], spec["g"], spec["b"],
                            spec["a"])
    _write_out(args, blk.to_json())
    return 0


def _cmd_block_check(args) -> int:
    blk = bl.Block.from_json(_load(args.block))
    return _show_report(args, bl.check_block(blk, args.horizon))


def _cmd_block_gad(args) -> int:
    blk = bl.Block.from_json(_load(args.block))
    return _show_report(args, bl.gad_check(blk, args.m, args.horizon))


def _cmd_block_diagram(args) -> int:
    bl.Block.from_json(_load(args.block))  # the file must hold a block
    name = os.path.splitext(os.path.basename(args.block))[0]
    text = bl.diagram_emit(blk_id=name, fmt=args.format)
    if args.json:
        print(json.dumps({"format": args.format, "diagram": text}))
    else:
        print(text)
    return 0


# ---------------------------------------------------------------------------
# cond
# ---------------------------------------------------------------------------


def _frag(path):
    return cd.ConditionFragment.from_json(_load(path))


def _cmd_cond_validate(args) -> int:
    rep = cd.validate_fragment(_frag(args.fragment), _table(args),
                               modest=args.modest)
    return _show_report(args, rep)


def _cmd_cond_leq(args) -> int:
    ok = cd.cond_leq(_frag(args.lower), _frag(args.upper), _table(args))
    _emit(args, {"leq": ok}, ["LEQ" if ok else "NOT-LEQ"])
    return 0 if ok else 1


def _cmd_cond_poss(args) -> int:
    pl = cd.poss_enum(_frag(args.fragment), _parse_height(args.upto),
                      _table(args))
    obj = {"count": pl.count, "bound": None if pl.bound is None
           else str(pl.bound), "bound_ok": pl.bound_ok}
    _emit(args, obj, [f"possibilities: {obj['count']} "
                      f"(bound {obj['bound']}, ok={obj['bound_ok']})"])
    return 0


def _cmd_cond_wedge(args) -> int:
    frag = _frag(args.fragment)
    table = _table(args)
    pl = cd.poss_enum(frag, _parse_height(args.upto), table)
    if not 0 <= args.index < pl.count:
        raise CliError(f"--index {args.index} outside 0..{pl.count - 1}")
    q = cd.wedge(frag, pl.items[args.index], table)
    _write_out(args, q.to_json(table))
    return 0


def _cmd_cond_restrict(args) -> int:
    labels = tuple(x for x in args.labels.split(",") if x)
    table = _table(args)
    q = cd.restrict(_frag(args.fragment), labels, table)
    _write_out(args, q.to_json(table))
    return 0


def _cmd_cond_modest(args) -> int:
    table = _table(args)
    q = cd.modestify(_frag(args.fragment), table)
    _write_out(args, q.to_json(table))
    return 0


def _cmd_cond_separate(args) -> int:
    table = _table(args)
    q = cd.separate_support(_frag(args.fragment), table)
    _write_out(args, q.to_json(table))
    return 0


def _cmd_cond_homog(args) -> int:
    table = _table(args)
    frag = _frag(args.fragment)
    seed = _seed(args)

    def h0(eta):
        return _colour(seed, args.colours, eta.items)

    def proj(hi, lo, v):
        return v

    q, _ = cd.homogenize_fragment(frag, args.level, h0, proj, table)
    _write_out(args, q.to_json(table))
    return 0


def _cmd_cond_read(args) -> int:
    table = _table(args)
    frag = _frag(args.fragment)
    h = _parse_height(args.height)
    if args.slalom:
        v = cd.slalom_value(frag, args.alpha, h.n, table)
    else:
        v = cd.read_generic(frag, args.alpha, h, table)
    out = v if not isinstance(v, tuple) else [list(x) if isinstance(x, tuple)
                                              else x for x in v]
    _emit(args, {"value": out}, [f"value = {out}"])
    return 0


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------


def _suite_exit(reports) -> int:
    cases = sum(r.cases for r in reports)
    if any(r.failed for r in reports):
        return 1
    if cases and sum(r.unknown for r in reports) == cases:
        return 3
    return 0


def _cmd_suite_run(args) -> int:
    seed = _seed(args)
    if args.name == "all":
        reports = su.suite_run_all(seed, args.budget_cases,
                                   args.budget_seconds)
    else:
        reports = [su.suite_run(args.name, seed, args.budget_cases,
                                args.budget_seconds)]
    lines = [f"{r.suite}: {r.cases} cases, {r.passed} pass, "
             f"{r.failed} fail, {r.unknown} unknown, {r.vacuous} vacuous"
             for r in reports]
    for r in reports:
        if r.counterexample is not None:
            lines.append(f"  first counterexample: "
                         f"{json.dumps(r.counterexample, sort_keys=True)}")
    _emit(args, [r.to_json() for r in reports], lines)
    return _suite_exit(reports)


def _cmd_suite_list(args) -> int:
    obj = {name: su.SUITES[name][1] for name in sorted(su.SUITES)}
    _emit(args, obj, [f"{name} ({n} cases)" for name, n in obj.items()])
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _globals(sp):
    sp.add_argument("--json", action="store_true",
                    help="emit JSON instead of text")
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed (default: CREATURELAB_SEED or 0)")
    sp.add_argument("--digit-budget", type=int, default=None,
                    help="digit budget for exact tower arithmetic")
    sp.add_argument("--toy-cap", type=int, default=None,
                    help="magnitude cap for toy-regime quantities")
    sp.add_argument("--budget-cases", type=int, default=None,
                    help="case budget for suite runs")
    sp.add_argument("--budget-seconds", type=float, default=None,
                    help="time budget for suite runs")
    sp.add_argument("-o", "--out", default=None,
                    help="write the result to this file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="creaturelab",
        description="finite laboratory for norm-graded creature machinery")
    top = ap.add_subparsers(dest="group", required=True)

    g = top.add_parser("params", help="parameter tables").add_subparsers(
        dest="cmd", required=True)
    p = g.add_parser("gen", help="generate a parameter table")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--regime", choices=sorted(_REGIMES), default="verify")
    _globals(p)
    p.set_defaults(fn=_cmd_params_gen)
    p = g.add_parser("verify", help="check every clause of a table")
    p.add_argument("table")
    _globals(p)
    p.set_defaults(fn=_cmd_params_verify)

    g = top.add_parser("creature", help="compound creatures").add_subparsers(
        dest="cmd", required=True)
    p = g.add_parser("validate", help="structural checks on a compound")
    p.add_argument("compound")
    p.add_argument("table")
    _globals(p)
    p.set_defaults(fn=_cmd_creature_validate)
    p = g.add_parser("norm", help="the compound norm")
    p.add_argument("compound")
    p.add_argument("table")
    _globals(p)
    p.set_defaults(fn=_cmd_creature_norm)
    p = g.add_parser("thin", help="thin a subatom to a constant label")
    p.add_argument("subatom")
    p.add_argument("labels")
    _globals(p)
    p.set_defaults(fn=_cmd_creature_thin)
    p = g.add_parser("halve", help="halve, or restore a halved compound")
    p.add_argument("compound")
    p.add_argument("table")
    p.add_argument("--restore", default=None,
                   help="strengthening whose halving parameter to reset")
    _globals(p)
    p.set_defaults(fn=_cmd_creature_halve)
    p = g.add_parser("amalgamate", help="common lower bound of two compounds")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("table")
    _globals(p)
    p.set_defaults(fn=_cmd_creature_amalgamate)
    p = g.add_parser("disjointify", help="disjoint norm-preserving shrinks")
    p.add_argument("sets", help="JSON file holding a list of lists")
    p.add_argument("--m", type=int, required=True)
    _globals(p)
    p.set_defaults(fn=_cmd_creature_disjointify)
    p = g.add_parser("homog", help="homogenise a seeded colouring")
    p.add_argument("compound")
    p.add_argument("table")
    p.add_argument("--colours", type=int, default=2)
    p.add_argument("--level", type=int, default=0,
                   help="first column the colouring may depend on (pr)")
    p.add_argument("--const", action="store_true",
                   help="force a constant colouring (lc)")
    _globals(p)
    p.set_defaults(fn=_cmd_creature_homog)

    g = top.add_parser("block", help="limit blocks").add_subparsers(
        dest="cmd", required=True)
    p = g.add_parser("build", help="build a block from a spec or a table")
    p.add_argument("spec")
    _globals(p)
    p.set_defaults(fn=_cmd_block_build)
    p = g.add_parser("check", help="grade every block clause")
    p.add_argument("block")
    p.add_argument("--horizon", type=int, default=None)
    _globals(p)
    p.set_defaults(fn=_cmd_block_check)
    p = g.add_parser("gad", help="domination of f by the level-log of a")
    p.add_argument("block")
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--horizon", type=int, default=None)
    _globals(p)
    p.set_defaults(fn=_cmd_block_gad)
    p = g.add_parser("diagram", help="the invariant diagram")
    p.add_argument("block")
    p.add_argument("--format", choices=("dot", "text"), default="dot")
    _globals(p)
    p.set_defaults(fn=_cmd_block_diagram)

    g = top.add_parser("cond", help="condition fragments").add_subparsers(
        dest="cmd", required=True)
    p = g.add_parser("validate", help="grade every fragment clause")
    p.add_argument("fragment")
    p.add_argument("table")
    p.add_argument("--modest", action="store_true")
    _globals(p)
    p.set_defaults(fn=_cmd_cond_validate)
    p = g.add_parser("leq", help="is the first fragment below the second")
    p.add_argument("lower")
    p.add_argument("upper")
    p.add_argument("table")
    _globals(p)
    p.set_defaults(fn=_cmd_cond_leq)
    p = g.add_parser("poss", help="count possibilities below a height")
    p.add_argument("fragment")
    p.add_argument("table")
    p.add_argument("--upto", required=True, help="height as kind,n[,sub]")
    _globals(p)
    p.set_defaults(fn=_cmd_cond_poss)
    p = g.add_parser("wedge", help="force one possibility")
    p.add_argument("fragment")
    p.add_argument("table")
    p.add_argument("--upto", required=True, help="height as kind,n[,sub]")
    p.add_argument("--index", type=int, default=0,
                   help="which possibility, in enumeration order")
    _globals(p)
    p.set_defaults(fn=_cmd_cond_wedge)
    p = g.add_parser("restrict", help="restrict the support")
    p.add_argument("fragment")
    p.add_argument("table")
    p.add_argument("--labels", required=True,
                   help="comma-separated labels to keep")
    _globals(p)
    p.set_defaults(fn=_cmd_cond_restrict)
    p = g.add_parser("modest", help="one active index per level")
    p.add_argument("fragment")
    p.add_argument("table")
    _globals(p)
    p.set_defaults(fn=_cmd_cond_modest)
    p = g.add_parser("separate", help="separated supports past the trunk")
    p.add_argument("fragment")
    p.add_argument("table")
    _globals(p)
    p.set_defaults(fn=_cmd_cond_separate)
    p = g.add_parser("homog", help="homogenise a seeded colouring of "
                                   "possibilities")
    p.add_argument("fragment")
    p.add_argument("table")
    p.add_argument("--level", type=int, required=True,
                   help="the top level of the colouring")
    p.add_argument("--colours", type=int, default=2)
    _globals(p)
    p.set_defaults(fn=_cmd_cond_homog)
    p = g.add_parser("read", help="read a decided value or a slalom value")
    p.add_argument("fragment")
    p.add_argument("table")
    p.add_argument("--alpha", required=True)
    p.add_argument("--height", required=True, help="height as kind,n[,sub]")
    p.add_argument("--slalom", action="store_true")
    _globals(p)
    p.set_defaults(fn=_cmd_cond_read)

    g = top.add_parser("suite", help="randomized check suites").add_subparsers(
        dest="cmd", required=True)
    p = g.add_parser("run", help="run one suite, or all")
    p.add_argument("name")
    _globals(p)
    p.set_defaults(fn=_cmd_suite_run)
    p = g.add_parser("list", help="list the suites")
    _globals(p)
    p.set_defaults(fn=_cmd_suite_list)

    return ap


def subcommands() -> set:
    """The (group, command) pairs the parser actually offers, for checking
    the registry against the real grammar."""
    ap = build_parser()
    out = set()
    for act in ap._subparsers._group_actions:
        for gname, sub in act.choices.items():
            for act2 in sub._subparsers._group_actions:
                for cname in act2.choices:
                    out.add((gname, cname))
    return out


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.fn(args)
    except (su.UnknownSuite, CliError, FileNotFoundError,
            json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except cd.Undecided as exc:
        print(f"UNKNOWN: {exc}", file=sys.stderr)
        return 3
    except (cd.CondError, cm.CompoundError, bl.BlockError,
            SubatomError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
