"""Command-line surface: parse, eval, entail, prove, check, cutfree, corpus.

Exit codes: 0 success/proved/valid, 1 refuted/invalid, 2 unknown,
3 usage or I/O error. JSON output is canonical (sorted keys, sorted sequent
members), so identical inputs produce byte-identical results.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import pathlib
import sys

from . import jsonio, syntax as sx
from .cutelim import CutEliminationError, cut_positions, eliminate_cuts
from .hylo import FragmentError, is_hylo, prove_hylo
from .kernel import check_derivation, sequent
from .model import (DataGraph, check_sequent_validity, eval_node,
                    ingest_datagraph, model_from_json, model_to_json)
from .search import Proved, Refuted, SearchConfig, Unknown, prove

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class CliError(Exception):
    pass


def _read_json(path):
    try:
        return json.loads(pathlib.Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(f"cannot read {path}: {e}") from None


def _load_model(args):
    if getattr(args, "graph", None):
        return ingest_datagraph(DataGraph.from_json(_read_json(args.graph)))
    if getattr(args, "model", None):
        return model_from_json(_read_json(args.model))
    raise CliError("one of --model/--graph is required")


def _parse_sequent(text):
    ante, cons = sx.parse_sequent_parts(text)
    return sequent(ante, cons)


def _emit(args, payload_json, payload_text):
    if args.emit == "json":
        sys.stdout.write(jsonio.dumps_canonical(payload_json))
    else:
        print(payload_text)


def cmd_parse(args):
    expr = sx.parse_node(args.expr)
    _emit(args, jsonio.node_to_json(expr), sx.print_node(expr))
    return EXIT_OK


def cmd_eval(args):
    model = _load_model(args)
    expr = sx.parse_node(args.expr)
    at = args.at if args.at is not None else model.default_node
    value = eval_node(model, at, expr)
    _emit(args, {"value": value, "at": at}, str(value).lower())
    if model.defaulted_nominals:
        print(f"note: defaulted nominals {sorted(model.defaulted_nominals)}",
              file=sys.stderr)
    return EXIT_OK if value else EXIT_FAIL


def cmd_entail(args):
    model = _load_model(args)
    seq = _parse_sequent(args.sequent)
    valid = check_sequent_validity(model, seq)
    _emit(args, {"valid_in_model": valid}, str(valid).lower())
    return EXIT_OK if valid else EXIT_FAIL


def cmd_prove(args):
    seq = _parse_sequent(args.sequent)
    cfg = SearchConfig(max_depth=args.max_depth,
                       max_fresh_nominals=args.fresh_budget,
                       enable_countermodel=args.countermodel_nodes > 0,
                       countermodel_nodes=max(args.countermodel_nodes, 1))
    if args.fragment == "hylo":
        result = prove_hylo(seq, cfg)
    else:
        result = prove(seq, cfg)
    match result:
        case Proved(derivation=d):
            _emit(args, {"status": "proved",
                         "derivation": jsonio.derivation_to_json(d)},
                  f"proved (height {d.height})")
            return EXIT_OK
        case Refuted(model=m):
            _emit(args, {"status": "refuted", "countermodel": model_to_json(m)},
                  f"refuted by a {len(m.nodes)}-node model")
            return EXIT_FAIL
        case Unknown(report=rep):
            _emit(args, {"status": "unknown", "report": rep}, "unknown")
            return EXIT_UNKNOWN
    raise CliError("unreachable")


def _check_file(path, allow_open=False, fragment=None):
    d = jsonio.derivation_from_json(_read_json(path))
    violations = [str(v) for v in check_derivation(d, allow_open=allow_open)]
    if fragment == "hylo" and not violations:
        bad = [str(node.conclusion) for _, node in d.walk()
               if not is_hylo(node.conclusion)]
        violations += [f"outside the basic hybrid fragment: {s}" for s in bad]
    return d, violations


def cmd_check(args):
    d, violations = _check_file(args.file, args.allow_open, args.fragment)
    payload = {"ok": not violations, "violations": violations,
               "end_sequent": jsonio.sequent_to_json(d.conclusion)}
    _emit(args, payload,
          "ok" if not violations else "\n".join(violations))
    return EXIT_OK if not violations else EXIT_FAIL


def cmd_cutfree(args):
    d = jsonio.derivation_from_json(_read_json(args.file))
    if check_derivation(d):
        print("input derivation does not check", file=sys.stderr)
        return EXIT_FAIL
    trace = [] if args.trace else None
    try:
        out = eliminate_cuts(d, trace=trace)
    except CutEliminationError as e:
        print(f"cut elimination failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    payload = jsonio.derivation_to_json(out)
    text = jsonio.dumps_canonical(payload)
    if args.out:
        pathlib.Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        for ev in trace:
            print(json.dumps(ev.as_json()), file=sys.stderr)
    remaining = len(cut_positions(out))
    return EXIT_OK if remaining == 0 else EXIT_FAIL


def cmd_corpus(args):
    root = pathlib.Path(args.dir)
    if not root.is_dir():
        raise CliError(f"not a directory: {root}")
    files = sorted(p for p in root.glob("*.json") if "model" not in p.stem
                   and "graph" not in p.stem)
    if not files:
        print("warning: no derivation files found", file=sys.stderr)
        return EXIT_OK
    failures = 0
    with concurrent.futures.ThreadPoolExecutor() as pool:
        results = list(pool.map(
            lambda p: (p, _check_file(p)[1]), files))
    for path, violations in results:
        status = "ok" if not violations else f"FAIL ({violations[0]})"
        print(f"{path.name}: {status}")
        failures += bool(violations)
    return EXIT_OK if failures == 0 else EXIT_FAIL


def build_parser():
    ap = argparse.ArgumentParser(
        prog="hxproof",
        description="Proof toolkit for data-aware hybrid path logic")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_emit(p):
        p.add_argument("--emit", choices=("text", "json"), default="text")

    p = sub.add_parser("parse", help="parse an expression and reprint it")
    p.add_argument("expr")
    add_emit(p)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("eval", help="evaluate an expression in a model")
    p.add_argument("expr")
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--graph", help="data-graph JSON file (ingested)")
    p.add_argument("--at", help="node of evaluation (default: first node)")
    add_emit(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("entail", help="check a sequent against one model")
    p.add_argument("sequent")
    p.add_argument("--model")
    p.add_argument("--graph")
    add_emit(p)
    p.set_defaults(fn=cmd_entail)

    p = sub.add_parser("prove", help="bounded backward proof search")
    p.add_argument("sequent")
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--fresh-budget", type=int, default=4)
    p.add_argument("--countermodel-nodes", type=int, default=3,
                   help="0 disables countermodel search")
    p.add_argument("--fragment", choices=("full", "hylo"), default="full")
    add_emit(p)
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("check", help="verify a derivation JSON file")
    p.add_argument("file")
    p.add_argument("--allow-open", action="store_true")
    p.add_argument("--fragment", choices=("full", "hylo"), default="full")
    add_emit(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("cutfree", help="eliminate cuts from a derivation")
    p.add_argument("file")
    p.add_argument("--out")
    p.add_argument("--trace", action="store_true",
                   help="emit one reduction event per line on stderr")
    p.set_defaults(fn=cmd_cutfree)

    p = sub.add_parser("corpus", help="check every derivation in a directory")
    p.add_argument("dir")
    p.set_defaults(fn=cmd_corpus)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, FragmentError, sx.SyntaxError_, sx.SymbolSpaceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
