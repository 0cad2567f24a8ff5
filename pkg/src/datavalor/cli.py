"""Command line gateway.

Machine-readable JSON goes to stdout; questions and diagnostics go to
stderr. Exit codes: 0 success, 1 validation failure, 2 math failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .anp import consistency_ratio, derive_metric_weights, load_judgements
from .catalog import default_catalog, find_metrics, load_catalog
from .errors import DataValorError, MathError
from .normalization import MetricObservation, normalize, rule_from_dict
from .scenario import compare, load_scenario, run_valuation, what_if
from .screening import (Stage, answer, classify_purpose, default_step1_tree,
                        default_step2_tree, load_tree, recommendations,
                        replay, start_session)

DEFAULT_ADDR = "127.0.0.1:8080"


def _resolve(flag, env_name: str, default):
    if flag is not None:
        return flag
    return os.environ.get(env_name, default)


def _load_doc(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit(doc: dict, output: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _tree_for(name: str):
    if name == "step1":
        return default_step1_tree()
    if name == "step2":
        return default_step2_tree()
    return load_tree(name)


def _cmd_screen(args) -> int:
    tree = _tree_for(args.tree)
    if args.answers is not None:
        labels = [part.strip() for part in args.answers.split(",") if part.strip()]
        session = replay(tree, labels)
    else:
        session = start_session(tree)
        while not session.complete:
            question = tree.question(session.current_question_id)
            options = " / ".join(a.label for a in question.answers)
            print(f"{question.text} [{options}]", file=sys.stderr)
            line = sys.stdin.readline()
            if not line:
                print("error: input ended before the questionnaire completed",
                      file=sys.stderr)
                return 1
            session = answer(session, question.id, line.strip(), tree)
    if not session.complete:
        print("error: answers ran out before the questionnaire completed",
              file=sys.stderr)
        return 1
    if tree.stage is Stage.STEP_II:
        outcome = classify_purpose(session, tree).to_dict()
    else:
        outcome = recommendations(session, tree).to_dict()
    doc = {"session": session.to_dict()}
    doc.update(outcome)
    _emit(doc, args.output)
    return 0


def _cmd_normalize(args) -> int:
    doc = _load_doc(args.input)
    if isinstance(doc, dict):
        doc = doc.get("observations", doc)
    if not isinstance(doc, list):
        print("error: expected a list of observations", file=sys.stderr)
        return 1
    results = []
    for i, entry in enumerate(doc):
        rule = rule_from_dict(entry.get("rule", {}), f"/{i}/rule")
        normalized = normalize(
            MetricObservation(metric_id=entry.get("metric_id", f"metric-{i}"),
                              raw=entry.get("raw")), rule)
        results.append({"metric_id": normalized.metric_id,
                        "m_norm": normalized.value,
                        "rule": rule.to_dict()})
    _emit({"normalized": results}, args.output)
    return 0


def _cmd_weigh(args) -> int:
    parsed = load_judgements(_load_doc(args.judgements))
    derivation = derive_metric_weights(
        cluster_judgements=parsed["clusters"],
        cluster_matrix=parsed["cluster_matrix"],
        network=parsed["network"],
        cr_threshold=args.cr_threshold,
        allow_inconsistent=args.allow_inconsistent,
        method=args.method)
    for warning in derivation.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    _emit(derivation.to_dict(), args.output)
    return 0


def _cmd_value(args) -> int:
    scenario = load_scenario(args.scenario)
    result = run_valuation(scenario, args.candidate, paper_compat=args.paper_compat)
    for note in result.audit.get("discrepancy_notes", []):
        print(f"note: {note}", file=sys.stderr)
    for warning in result.audit.get("warnings", []):
        print(f"warning: {warning}", file=sys.stderr)
    _emit(result.to_dict(), args.output)
    return 0


def _cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    report = compare(scenario, paper_compat=args.paper_compat)
    for note in report.discrepancy_notes:
        print(f"note: {note}", file=sys.stderr)
    _emit(report.to_dict(), args.output)
    return 0


def _cmd_what_if(args) -> int:
    scenario = load_scenario(args.scenario)
    overrides = _load_doc(args.overrides)
    report = what_if(scenario, args.candidate, overrides,
                     paper_compat=args.paper_compat)
    _emit(report.to_dict(), args.output)
    return 0


def _cmd_catalog(args) -> int:
    catalog = load_catalog(args.catalog) if args.catalog else default_catalog()
    metrics = find_metrics(catalog, perspective=args.perspective,
                           cluster=args.cluster, keyword=args.keyword)
    _emit({"version": catalog.version,
           "metrics": [m.to_dict() for m in metrics]}, args.output)
    return 0


def _cmd_consistency(args) -> int:
    parsed = load_judgements(_load_doc(args.judgements))
    reports = {}
    for cid, matrix in parsed["clusters"].items():
        reports[cid] = consistency_ratio(matrix, threshold=args.cr_threshold).to_dict()
    if parsed["cluster_matrix"] is not None:
        reports["__clusters__"] = consistency_ratio(
            parsed["cluster_matrix"], threshold=args.cr_threshold).to_dict()
    _emit({"reports": reports}, args.output)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    addr = _resolve(args.addr, "DATAVALOR_ADDR", DEFAULT_ADDR)
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        print(f"error: malformed address {addr!r}, expected host:port",
              file=sys.stderr)
        return 1
    app = create_app(store_dir=args.store_dir, catalog_path=args.catalog)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datavalor",
        description="Decision support for buying, selling, and keeping datasets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("screen", help="walk a screening questionnaire")
    p.add_argument("--tree", default="step1",
                   help="step1, step2, or a path to a tree document")
    p.add_argument("--answers",
                   help="comma-separated answer labels; omit for a prompt loop")
    p.add_argument("--output", help="write the outcome JSON to a file")
    p.set_defaults(func=_cmd_screen)

    p = sub.add_parser("normalize", help="apply normalization rules to observations")
    p.add_argument("--input", required=True,
                   help="JSON file of observations ('-' for stdin)")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("weigh", help="derive metric weights from judgements")
    p.add_argument("--judgements", required=True,
                   help="JSON judgement document ('-' for stdin)")
    p.add_argument("--method", default="eigenvector",
                   choices=["eigenvector", "geometric_mean"])
    p.add_argument("--cr-threshold", type=float, default=0.10)
    p.add_argument("--allow-inconsistent", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_weigh)

    p = sub.add_parser("consistency", help="consistency reports for judgements")
    p.add_argument("--judgements", required=True)
    p.add_argument("--cr-threshold", type=float, default=0.10)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_consistency)

    p = sub.add_parser("value", help="value one candidate in a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--paper-compat", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="replay carried values from the source assessment "
                        "(default: the scenario's own setting)")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_value)

    p = sub.add_parser("compare", help="rank every candidate in a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--paper-compat", action=argparse.BooleanOptionalAction,
                   default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("what-if", help="before/after valuation under overrides")
    p.add_argument("--scenario", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--overrides", required=True,
                   help="JSON override document ('-' for stdin)")
    p.add_argument("--paper-compat", action=argparse.BooleanOptionalAction,
                   default=None)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_what_if)

    p = sub.add_parser("catalog", help="list metric definitions")
    p.add_argument("--catalog", help="path to a catalog document")
    p.add_argument("--perspective")
    p.add_argument("--cluster")
    p.add_argument("--keyword")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_catalog)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--addr", help=f"host:port (default {DEFAULT_ADDR})")
    p.add_argument("--store-dir", help="scenario store directory")
    p.add_argument("--catalog", help="path to a catalog document")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataValorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
