"""Batch command-line front end.

Exit codes: 0 success/valid, 1 invalid or countermodel found, 2 usage or
input error, 3 budget exhausted (unknown).  Results go to stdout,
diagnostics to stderr; JSON output is byte-stable across runs and thread
counts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import budgets
from .budgets import SearchBudget
from .errors import (
    BudgetExceeded,
    MuchnikLabError,
    ValuationBudgetExceeded,
)
from .exprs import parse_lattice_expression
from .formulas import (
    find_countermodel,
    generate_corpus,
    is_positive,
    is_valid,
    load_corpus,
    named_formulas,
    parse,
    print_formula,
    variables,
)
from .lattices import DistLattice
from .muchnik import (
    MassProblem,
    DegreePoset,
    build_master_poset,
    construction_from_json,
    degree_interval,
    degree_of,
    muchnik_arrow,
    muchnik_leq,
    verify_construction,
)
from .posets import poset_from_json
from .prover import decide_logic
from .structure import analyze
from .tower import jaskowski_algebra, tower_size

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _emit(args, report: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        sys.stdout.write(
            json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        )
    else:
        for line in text_lines:
            sys.stdout.write(line + "\n")


def _budget_from(args) -> SearchBudget:
    return SearchBudget(
        tower_max_level=getattr(args, "tower_max", 4),
        max_poset_points=getattr(args, "max_poset_points", 5),
        max_posets=args.max_posets,
        max_valuations=args.max_valuations,
        max_elements=args.max_elements,
    )


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _degree_poset(path: str) -> DegreePoset:
    return DegreePoset(poset_from_json(_load_json(path)))


def _problem(amb: DegreePoset, text: str) -> MassProblem:
    labels = [] if text == "-" else [t for t in text.split(",") if t]
    return amb.problem(labels)


def _witness_labels(lat: DistLattice, witness: Optional[dict]) -> Optional[dict]:
    if witness is None:
        return None
    return {k: lat.element_label(v) for k, v in witness.items()}


# -- subcommand handlers -----------------------------------------------------


def cmd_parse(args) -> int:
    phi = parse(args.formula, paper_signature=args.paper_signature)
    report = {
        "kind": "parse",
        "formula": print_formula(phi),
        "variables": variables(phi),
        "positive": is_positive(phi),
    }
    _emit(args, report, [print_formula(phi)])
    return EXIT_OK


def cmd_eval(args) -> int:
    phi = parse(args.formula, paper_signature=args.paper_signature)
    lat = parse_lattice_expression(args.lattice)
    valuation = {}
    for item in args.set or []:
        name, _, raw = item.partition("=")
        valuation[name.strip()] = int(raw)
    from .formulas import evaluate

    value = evaluate(phi, lat, valuation, args.semantics)
    truth = lat.bot if args.semantics == "brouwer" else lat.top
    report = {
        "kind": "eval",
        "semantics": args.semantics,
        "value": value,
        "label": lat.element_label(value),
        "true_in_algebra": value == truth,
    }
    _emit(
        args,
        report,
        [f"value {value} ({lat.element_label(value)})"],
    )
    return EXIT_OK


def cmd_valid(args) -> int:
    phi = parse(args.formula, paper_signature=args.paper_signature)
    lat = parse_lattice_expression(args.lattice)
    res = is_valid(
        phi,
        lat,
        args.semantics,
        max_valuations=args.max_valuations,
        threads=args.threads,
    )
    report = {
        "kind": "valid",
        "semantics": args.semantics,
        "status": res.status,
        "witness": res.witness,
        "checked": res.checked,
    }
    lines = [res.status]
    if res.witness is not None:
        lines.append(f"witness {_witness_labels(lat, res.witness)}")
    _emit(args, report, lines)
    return EXIT_OK if res.status == "valid" else EXIT_INVALID


def cmd_countermodel(args) -> int:
    phi = parse(args.formula, paper_signature=args.paper_signature)
    cm = find_countermodel(phi, args.semantics, _budget_from(args), args.threads)
    report = {
        "kind": "countermodel",
        "found": cm is not None,
        "countermodel": cm.describe() if cm else None,
    }
    if cm is None:
        _emit(args, report, ["no countermodel within budget"])
        return EXIT_BUDGET
    where = f"tower level {cm.level}" if cm.kind == "tower" else "poset algebra"
    _emit(
        args,
        report,
        [f"countermodel in {where} (size {cm.algebra.n}), witness {cm.witness}"],
    )
    return EXIT_INVALID


def cmd_decide(args) -> int:
    phi = parse(args.formula, paper_signature=args.paper_signature)
    decision = decide_logic(
        phi,
        args.logic,
        kc_points=args.kc_points,
        budget=_budget_from(args),
        threads=args.threads,
    )
    report = {
        "kind": "decide",
        "logic": args.logic.upper(),
        "verdict": decision.verdict,
    }
    if "method" in decision.detail:
        report["method"] = decision.detail["method"]
    if args.emit_proof and decision.trace is not None:
        report["proof"] = decision.trace.flatten()
    if args.emit_countermodel and decision.countermodel is not None:
        report["countermodel"] = decision.countermodel.describe()
    _emit(args, report, [decision.verdict])
    if decision.verdict == "valid":
        return EXIT_OK
    if decision.verdict == "invalid":
        return EXIT_INVALID
    return EXIT_BUDGET


def cmd_tower(args) -> int:
    if args.tower_cmd == "sizes":
        sizes = [tower_size(n) for n in range(1, args.levels + 1)]
        report = {"kind": "tower-sizes", "sizes": sizes}
        lines = [" ".join(str(s) for s in sizes)]
        if args.plot:
            from .viz import render_tower_sizes

            render_tower_sizes(sizes, args.plot)
            report["figure"] = args.plot
            lines.append(f"figure written to {args.plot}")
        _emit(args, report, lines)
        return EXIT_OK
    level = jaskowski_algebra(args.level)
    if args.tower_cmd == "build":
        report = {
            "kind": "tower-build",
            "level": args.level,
            "size": level.algebra.n,
        }
        _emit(args, report, [f"level {args.level}: {level.algebra.n} elements"])
        return EXIT_OK
    # check-wp
    from .structure import is_dd_like, is_weakly_projective

    wp, _ = is_weakly_projective(level.algebra)
    dwp, _ = is_weakly_projective(level.dual_algebra)
    dd, _ = is_dd_like(level.algebra)
    report = {
        "kind": "tower-check",
        "level": args.level,
        "size": level.algebra.n,
        "weakly_projective": wp,
        "dual_weakly_projective": dwp,
        "dd_like": dd,
    }
    ok = wp and dwp and not dd
    _emit(
        args,
        report,
        [f"level {args.level}: wp={wp} dual-wp={dwp} dd-like={dd}"],
    )
    return EXIT_OK if ok else EXIT_INVALID


def cmd_analyze(args) -> int:
    lat = parse_lattice_expression(args.lattice)
    report = {"kind": "analyze", **analyze(lat).to_json()}
    lines = [
        f"elements {report['elements']}, join-irreducibles {report['join_irreducibles']}",
        f"dd-like: {report['dd_like']}",
        f"weakly projective: {report['weakly_projective']}",
        f"interval-embeddable: {report['interval_embeddable']}",
        f"initial-segment: {report['initial_segment']}",
    ]
    _emit(args, report, lines)
    return EXIT_OK


def cmd_muchnik(args) -> int:
    if args.muchnik_cmd == "construct":
        levels = [
            parse_lattice_expression(part.strip())
            for part in args.levels.split(";")
            if part.strip()
        ]
        construction = build_master_poset(levels, k=args.k)
        doc = construction.to_json()
        report = {"kind": "muchnik-construct", "construction": doc}
        lines = [
            f"degree poset with {construction.degrees.n} points, "
            f"{len(construction.levels)} level(s)"
        ]
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, sort_keys=True, indent=2)
                fh.write("\n")
            report["output"] = args.output
            lines.append(f"written to {args.output}")
        if args.figures_dir:
            os.makedirs(args.figures_dir, exist_ok=True)
            from .muchnik import component_colors
            from .viz import render_poset

            path = os.path.join(args.figures_dir, "master_poset.png")
            render_poset(
                construction.degrees.poset,
                path,
                colors=component_colors(construction),
            )
            lines.append(f"figure written to {path}")
        _emit(args, report, lines)
        return EXIT_OK
    if args.muchnik_cmd == "verify":
        construction = construction_from_json(_load_json(args.construction))
        if args.corpus:
            corpus = load_corpus(args.corpus)
        else:
            corpus = generate_corpus(2) + list(named_formulas().values())
        result = verify_construction(construction, corpus, threads=args.threads)
        report = {
            "kind": "muchnik-verify",
            "passed": result.passed,
            "corpus_size": len(corpus),
            "checks": [c.to_json() for c in result.checks],
        }
        lines = [
            f"{c.name}" + (f" (level {c.level})" if c.level else "") + f": "
            + ("pass" if c.passed else f"FAIL {c.witness}")
            for c in result.checks
        ]
        lines.append("passed" if result.passed else "FAILED")
        if args.report_dir:
            os.makedirs(args.report_dir, exist_ok=True)
            with open(
                os.path.join(args.report_dir, "report.json"), "w", encoding="utf-8"
            ) as fh:
                json.dump(report, fh, sort_keys=True, indent=2)
                fh.write("\n")
            from .viz import render_poset, write_checks_csv

            write_checks_csv(
                report["checks"], os.path.join(args.report_dir, "checks.csv")
            )
            render_poset(
                construction.degrees.poset,
                os.path.join(args.report_dir, "master_poset.png"),
            )
            lines.append(f"report written to {args.report_dir}")
        _emit(args, report, lines)
        return EXIT_OK if result.passed else EXIT_INVALID
    # binary relations over an explicit degree poset
    amb = _degree_poset(args.poset)
    a = _problem(amb, args.a)
    if args.muchnik_cmd == "leq":
        b = _problem(amb, args.b)
        fwd = muchnik_leq(a, b)
        bwd = muchnik_leq(b, a)
        report = {
            "kind": "muchnik-leq",
            "leq": fwd,
            "geq": bwd,
            "equivalent": fwd and bwd,
        }
        _emit(args, report, [f"leq: {fwd}  geq: {bwd}"])
        return EXIT_OK
    if args.muchnik_cmd == "arrow":
        b = _problem(amb, args.b)
        result = muchnik_arrow(a, b, mode=args.mode)
        mode = args.mode
        if mode == "auto":
            mode = "formula" if amb.join_table is not None else "lattice"
        report = {
            "kind": "muchnik-arrow",
            "mode": mode,
            "members": result.labels(),
            "degree": degree_of(result).labels(),
        }
        _emit(args, report, ["{" + ",".join(result.labels()) + "}"])
        return EXIT_OK
    if args.muchnik_cmd == "interval":
        b = _problem(amb, args.b)
        iv = degree_interval(a, b)
        report = {
            "kind": "muchnik-interval",
            "size": iv.lattice.n,
            "upsets": [
                amb.poset.labels_from_mask(u) for u in iv.upsets
            ],
        }
        _emit(args, report, [f"{iv.lattice.n} degrees in the interval"])
        return EXIT_OK
    raise MuchnikLabError(f"unknown muchnik subcommand {args.muchnik_cmd!r}")


def cmd_export_dot(args) -> int:
    colors = None
    if args.what == "poset":
        p = poset_from_json(_load_json(args.source))
    elif args.what == "lattice":
        p = parse_lattice_expression(args.source).order_poset()
    else:
        from .muchnik import component_colors

        construction = construction_from_json(_load_json(args.source))
        p = construction.degrees.poset
        colors = component_colors(construction)
    dot = p.to_dot(colors=colors)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(dot)
    else:
        sys.stdout.write(dot)
    if args.png:
        from .viz import render_poset

        render_poset(p, args.png, colors=colors)
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="muchniklab",
        description="workbench for finite Brouwer/Heyting algebras, intermediate "
        "logics, and a finite simulation of the Muchnik lattice",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for validity search (results identical)")
    common.add_argument("--max-elements", type=int, default=budgets.MAX_ELEMENTS)
    common.add_argument("--max-valuations", type=int, default=budgets.MAX_VALUATIONS)
    common.add_argument("--max-posets", type=int, default=budgets.MAX_POSETS)
    sub = ap.add_subparsers(dest="command", required=True)

    def formula_arg(p):
        p.add_argument("formula")
        p.add_argument("--paper-signature", action="store_true",
                       help="reject the bot/top constants")

    p = sub.add_parser("parse", parents=[common], help="parse and normalise a formula")
    formula_arg(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", parents=[common], help="evaluate a formula at one valuation")
    formula_arg(p)
    p.add_argument("--lattice", required=True, help="lattice expression")
    p.add_argument("--semantics", choices=["brouwer", "heyting"], default="heyting")
    p.add_argument("--set", action="append", metavar="VAR=INDEX")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("valid", parents=[common], help="exhaustive validity over one algebra")
    formula_arg(p)
    p.add_argument("--lattice", required=True)
    p.add_argument("--semantics", choices=["brouwer", "heyting"], default="heyting")
    p.set_defaults(func=cmd_valid)

    p = sub.add_parser("countermodel", parents=[common], help="search the tower-then-posets family")
    formula_arg(p)
    p.add_argument("--semantics", choices=["brouwer", "heyting"], default="heyting")
    p.add_argument("--tower-max", type=int, default=4)
    p.add_argument("--max-poset-points", type=int, default=5)
    p.set_defaults(func=cmd_countermodel)

    p = sub.add_parser("decide", parents=[common], help="decide membership in IPC, KC or CPC")
    formula_arg(p)
    p.add_argument("--logic", choices=["ipc", "kc", "cpc"], required=True)
    p.add_argument("--kc-points", type=int, default=8)
    p.add_argument("--tower-max", type=int, default=4)
    p.add_argument("--max-poset-points", type=int, default=5)
    p.add_argument("--emit-proof", action="store_true")
    p.add_argument("--emit-countermodel", action="store_true")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("tower", parents=[common], help="the finite algebra tower")
    tsub = p.add_subparsers(dest="tower_cmd", required=True)
    tb = tsub.add_parser("build", parents=[common])
    tb.add_argument("level", type=int)
    ts = tsub.add_parser("sizes", parents=[common])
    ts.add_argument("--levels", type=int, default=4)
    ts.add_argument("--plot", help="write a growth figure to this path")
    tc = tsub.add_parser("check-wp", parents=[common])
    tc.add_argument("level", type=int)
    p.set_defaults(func=cmd_tower)

    p = sub.add_parser("analyze", parents=[common], help="structural report for a lattice expression")
    p.add_argument("lattice")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("muchnik", parents=[common], help="simulated Muchnik lattice operations")
    msub = p.add_subparsers(dest="muchnik_cmd", required=True)
    for name in ("leq", "arrow", "interval"):
        mp = msub.add_parser(name, parents=[common])
        mp.add_argument("a", help="comma-separated point labels, '-' for empty")
        mp.add_argument("b", help="comma-separated point labels, '-' for empty")
        mp.add_argument("--poset", required=True, help="degree poset JSON file")
        if name == "arrow":
            mp.add_argument(
                "--mode", choices=["auto", "formula", "lattice"], default="auto"
            )
    mc = msub.add_parser("construct", parents=[common])
    mc.add_argument("--levels", required=True,
                    help="semicolon-separated lattice expressions")
    mc.add_argument("--k", type=int, default=1, help="generics per component point")
    mc.add_argument("-o", "--output", help="write the construction JSON here")
    mc.add_argument("--figures-dir", help="render the master poset here")
    mv = msub.add_parser("verify", parents=[common])
    mv.add_argument("construction", help="construction JSON file")
    mv.add_argument("--corpus",
                    help="formula corpus file, one per line; default is every "
                    "two-variable formula with at most two connectives plus "
                    "the named schemata")
    mv.add_argument("--report-dir",
                    help="write report.json, checks.csv and figures here")
    p.set_defaults(func=cmd_muchnik)

    p = sub.add_parser("export-dot", parents=[common], help="Hasse diagram as DOT (and optional PNG)")
    p.add_argument("what", choices=["poset", "lattice", "construction"])
    p.add_argument("source", help="JSON file (poset/construction) or expression")
    p.add_argument("-o", "--output", help="write DOT here instead of stdout")
    p.add_argument("--png", help="also render a PNG via matplotlib")
    p.set_defaults(func=cmd_export_dot)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValuationBudgetExceeded, BudgetExceeded) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except MuchnikLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
