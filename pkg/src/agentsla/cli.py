"""``agentsla`` command line.

Exit status: 0 success or compliant, 1 validation errors or a VIOLATED
verdict, 2 an UNCERTAIN verdict, 3 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from agentsla.catalog import CATALOG
from agentsla.evaluation import MeasurementStream, StreamError, TermVerdict, evaluate
from agentsla.model import (
    DerivedQoSMetric,
    SlaDocument,
    format_expression,
    format_number,
)
from agentsla.parser import decode, encode, validate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNCERTAIN = 2
EXIT_USAGE = 3

_VERDICT_EXIT = {
    TermVerdict.SATISFIED: EXIT_OK,
    TermVerdict.NOT_APPLICABLE: EXIT_OK,
    TermVerdict.VIOLATED: EXIT_INVALID,
    TermVerdict.UNCERTAIN: EXIT_UNCERTAIN,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is our UNCERTAIN code.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _UsageError(Exception):
    pass


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load(path: str) -> SlaDocument | None:
    """Decode ``path``, printing diagnostics to stderr on failure."""
    text = _read(path)
    diagnostics = validate(text)
    if diagnostics:
        for d in diagnostics:
            print(d, file=sys.stderr)
        return None
    return decode(text)


def cmd_validate(args) -> int:
    return EXIT_OK if _load(args.file) is not None else EXIT_INVALID


def _metric_summary(metric) -> dict:
    out = {
        "name": metric.name,
        "kind": {"QoSMetric": "plain", "DerivedQoSMetric": "derived",
                 "QoSDriftMetric": "drift"}[metric.kind],
        "metric_type": metric.metric_type.value,
        "unit": metric.unit,
        "uncertainty": metric.uncertainty,
        "provider": None if metric.provider is None else metric.provider.name,
    }
    if isinstance(metric, DerivedQoSMetric):
        out.update(aggregation=metric.aggregation.value, window=metric.window,
                   window_unit=metric.window_unit.value)
    return out


def inspect_summary(doc: SlaDocument) -> dict:
    terms = doc.guarantee_terms
    return {
        "counts": {
            "terms": len(terms),
            "scopes": sum(len(t.scopes) for t in terms),
            "qualifying_conditions": sum(len(t.qualifying_conditions) for t in terms),
            "slos": sum(len(t.slos) for t in terms),
            "metrics": len(doc.metrics),
            "agents": len(doc.agents),
            "model_cards": len(doc.model_cards),
            "providers": len(doc.providers),
        },
        "terms": [
            {
                "scopes": [{"name": s.name, "agent": s.agent.name} for s in t.scopes],
                "qualifying_conditions": [
                    {"name": q.name, "expression": format_expression(q.expression)}
                    for q in t.qualifying_conditions
                ],
                "slos": [{"name": s.name, "expression": format_expression(s.expression)}
                         for s in t.slos],
            }
            for t in terms
        ],
        "metrics": [_metric_summary(m) for m in doc.metrics],
        "agents": [
            {"name": a.name, "url": a.url,
             "model_card": None if a.model_card is None else a.model_card.name}
            for a in doc.agents
        ],
        "model_cards": [c.name for c in doc.model_cards],
        "providers": [
            {"name": p.name, "confidence": p.confidence, "reputation": p.reputation}
            for p in doc.providers
        ],
    }


def _render_summary(summary: dict) -> str:
    c = summary["counts"]
    lines = [
        f"{c['terms']} term(s), {c['scopes']} scope(s), {c['qualifying_conditions']} "
        f"qualifying condition(s), {c['slos']} SLO(s), {c['metrics']} metric(s), "
        f"{c['agents']} agent(s), {c['model_cards']} model card(s), "
        f"{c['providers']} provider(s)"
    ]
    for i, term in enumerate(summary["terms"]):
        lines.append(f"Term {i}")
        for s in term["scopes"]:
            lines.append(f"  scope {s['name']} -> agent {s['agent']}")
        for q in term["qualifying_conditions"]:
            lines.append(f"  condition {q['name'] or '-'}: {q['expression']}")
        for s in term["slos"]:
            lines.append(f"  SLO {s['name']}: {s['expression']}")
    if summary["metrics"]:
        lines.append("Metrics")
    for m in summary["metrics"]:
        parts = [m["kind"], m["metric_type"], m["unit"] or "-"]
        if "window" in m:
            parts.append(f"{m['aggregation']} over {m['window']} {m['window_unit']}")
        parts.append(f"uncertainty {format_number(m['uncertainty'])}")
        if m["provider"]:
            parts.append(f"provider {m['provider']}")
        lines.append(f"  {m['name']}: " + ", ".join(parts))
    if summary["agents"]:
        lines.append("Agents")
    for a in summary["agents"]:
        card = f", model card {a['model_card']}" if a["model_card"] else ""
        lines.append(f"  {a['name']}: url {a['url'] or '-'}{card}")
    if summary["model_cards"]:
        lines.append("Model cards")
    for name in summary["model_cards"]:
        lines.append(f"  {name}")
    if summary["providers"]:
        lines.append("Providers")
    for p in summary["providers"]:
        lines.append(f"  {p['name']}: confidence {format_number(p['confidence'])}, "
                     f"reputation {p['reputation']}")
    return "\n".join(lines) + "\n"


def cmd_inspect(args) -> int:
    doc = _load(args.file)
    if doc is None:
        return EXIT_INVALID
    summary = inspect_summary(doc)
    if args.json:
        sys.stdout.write(json.dumps(summary, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(_render_summary(summary))
    return EXIT_OK


def cmd_normalize(args) -> int:
    doc = _load(args.file)
    if doc is None:
        return EXIT_INVALID
    sys.stdout.write(encode(doc))
    return EXIT_OK


def catalog_rows() -> list[dict]:
    return [
        {
            "metric_type": entry.metric_type.value,
            "name": entry.label,
            "parents": list(entry.parent_characteristics),
            "definition": entry.definition,
            "dimension": entry.unit_dimension.value,
            "units": sorted(entry.allowed_units),
            "unit_required": entry.unit_required,
        }
        for entry in CATALOG.values()
    ]


def cmd_catalog(args) -> int:
    rows = catalog_rows()
    if args.json:
        sys.stdout.write(json.dumps(rows, indent=2, ensure_ascii=False) + "\n")
        return EXIT_OK
    table = [("METRIC", "PARENTS", "DIMENSION", "UNITS", "DEFINITION")]
    for r in rows:
        units = ",".join(r["units"]) or "-"
        if r["units"] and not r["unit_required"]:
            units += " (optional)"
        table.append((r["metric_type"], "; ".join(r["parents"]), r["dimension"], units,
                      r["definition"]))
    widths = [max(len(row[i]) for row in table) for i in range(4)]
    for row in table:
        cells = [cell.ljust(w) for cell, w in zip(row, widths)]
        sys.stdout.write("  ".join(cells + [row[4]]) + "\n")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    doc = _load(args.file)
    if doc is None:
        return EXIT_INVALID
    raw = _read(args.measurements)
    try:
        stream = MeasurementStream.from_jsonl(raw.decode("utf-8").splitlines())
    except (StreamError, UnicodeDecodeError) as exc:
        raise _UsageError(f"{args.measurements}: {exc}") from None
    at = args.at
    if at is None:
        at = stream.latest_timestamp()
        at = 0.0 if at is None else at
    report = evaluate(doc, stream, at)
    sys.stdout.write(report.to_json() if args.json else report.render_text())
    return _VERDICT_EXIT[report.verdict]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="agentsla", description="Validate and evaluate AgentSLA agreements.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check an agreement and list its diagnostics")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("inspect", help="summarize an agreement")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("normalize", help="print the canonical JSON form")
    p.add_argument("file")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("catalog", help="list the known metric types")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("evaluate", help="evaluate SLOs against a measurement file")
    p.add_argument("file")
    p.add_argument("--measurements", required=True, metavar="FILE",
                   help="JSON-Lines measurement stream")
    p.add_argument("--at", type=float, metavar="SECONDS",
                   help="evaluation time (default: latest measurement)")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"agentsla: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
