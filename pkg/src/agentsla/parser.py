"""Validating decoder and canonical encoder for the AgentSLA JSON syntax.

The decoder walks the whole document and collects every problem it can
find before giving up, so a single run reports all of them. Only JSON
syntax errors stop it early.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Any

from agentsla.catalog import catalog_lookup
from agentsla.model import (
    Agent,
    AggregationFn,
    And,
    BoolExpr,
    CompareOp,
    Comparison,
    DerivedQoSMetric,
    GuaranteeTerm,
    MetricType,
    ModelCard,
    Or,
    Provider,
    QoSDriftMetric,
    QoSMetric,
    QualifyingCondition,
    Ref,
    ResolutionError,
    Scope,
    SlaDocument,
    Slo,
    WindowUnit,
    resolve_references,
)


class DiagnosticCode(enum.Enum):
    V1_UNIT_MISSING = "V1_UNIT_MISSING"
    V2_UNIT_UNKNOWN = "V2_UNIT_UNKNOWN"
    V3_ENUM_UNKNOWN = "V3_ENUM_UNKNOWN"
    V4_CONFIDENCE_OUT_OF_BOUNDS = "V4_CONFIDENCE_OUT_OF_BOUNDS"
    V5_UNRESOLVED_REFERENCE = "V5_UNRESOLVED_REFERENCE"
    V6_DUPLICATE_NAME = "V6_DUPLICATE_NAME"
    V7_MALFORMED_EXPRESSION = "V7_MALFORMED_EXPRESSION"
    V8_NONPOSITIVE_WINDOW = "V8_NONPOSITIVE_WINDOW"
    V9_NEGATIVE_UNCERTAINTY = "V9_NEGATIVE_UNCERTAINTY"
    V10_SCHEMA_SHAPE = "V10_SCHEMA_SHAPE"


@dataclass(frozen=True)
class Diagnostic:
    code: DiagnosticCode
    path: str
    message: str
    severity: str = "ERROR"

    def __str__(self) -> str:
        return f"{self.code.value} {self.path or '/'} {self.message}"


class SlaSyntaxError(ValueError):
    """The input is not well-formed UTF-8 JSON."""

    def __init__(self, msg: str, lineno: int = 0, colno: int = 0):
        self.lineno = lineno
        self.colno = colno
        where = f" (line {lineno}, column {colno})" if lineno else ""
        super().__init__(f"invalid JSON{where}: {msg}")


class SlaValidationError(ValueError):
    """The input is JSON but not a valid agreement."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__(f"{len(diagnostics)} validation error(s); first: {diagnostics[0]}")


METRIC_KEYS = ("QoSMetric", "DerivedQoSMetric", "QoSDriftMetric")
TOP_LEVEL_KEYS = ("GuaranteeTerm", "Agent", "ModelCard", "Provider") + METRIC_KEYS

_METRIC_CLASSES = {
    "QoSMetric": QoSMetric,
    "DerivedQoSMetric": DerivedQoSMetric,
    "QoSDriftMetric": QoSDriftMetric,
}
_PLAIN_METRIC_KEYS = ("name", "description", "metric_type", "unit", "uncertainty", "Provider")
_WINDOW_KEYS = ("window", "window_unit", "aggregation")

_MISSING = object()


def _reject_constant(token: str):
    raise ValueError(f"{token} is not a JSON number")


def _load_json(text: str | bytes) -> Any:
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SlaSyntaxError(f"not UTF-8 ({exc.reason} at byte {exc.start})") from None
    if text.startswith("﻿"):
        text = text[1:]
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SlaSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise SlaSyntaxError(str(exc)) from None


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class _Decoder:
    def __init__(self):
        self.diagnostics: list[Diagnostic] = []
        self.refs: list[Ref] = []
        self.declared: dict[str, set[str]] = {
            "Agent": set(), "ModelCard": set(), "Provider": set(), "QoSMetric": set(),
        }

    def error(self, code: DiagnosticCode, path: str, message: str) -> None:
        self.diagnostics.append(Diagnostic(code, path, message))

    # -- shape helpers -------------------------------------------------

    def obj(self, value, path, allowed, required=()) -> dict | None:
        if not isinstance(value, dict):
            self.error(DiagnosticCode.V10_SCHEMA_SHAPE, path,
                       f"expected an object, got {_json_type(value)}")
            return None
        for key in value:
            if key not in allowed:
                self.error(DiagnosticCode.V10_SCHEMA_SHAPE, f"{path}/{key}",
                           f"unknown key {key!r}")
        for key in required:
            if key not in value:
                self.error(DiagnosticCode.V10_SCHEMA_SHAPE, path, f"missing required key {key!r}")
        return value

    def array(self, obj, key, path) -> list:
        value = obj.get(key, _MISSING)
        if value is _MISSING:
            return []
        if not isinstance(value, list):
            self.error(DiagnosticCode.V10_SCHEMA_SHAPE, f"{path}/{key}",
                       f"expected an array, got {_json_type(value)}")
            return []
        return value

    def string(self, obj, key, path, default=_MISSING, nonempty=False):
        value = obj.get(key, _MISSING)
        if value is _MISSING:
            return None if default is _MISSING else default
        if not isinstance(value, str):
            self.error(DiagnosticCode.V10_SCHEMA_SHAPE, f"{path}/{key}",
                       f"expected a string, got {_json_type(value)}")
            return None
        if nonempty and not value:
            self.error(DiagnosticCode.V10_SCHEMA_SHAPE, f"{path}/{key}", "must not be empty")
            return None
        return value

    def number(self, obj, key, path, default=_MISSING):
        value = obj.get(key, _MISSING)
        if value is _MISSING:
            return None if default is _MISSING else default
        if not _is_number(value):
            self.error(DiagnosticCode.V10_SCHEMA_SHAPE, f"{path}/{key}",
                       f"expected a number, got {_json_type(value)}")
            return None
        value = float(value)
        if not math.isfinite(value):
            self.error(DiagnosticCode.V10_SCHEMA_SHAPE, f"{path}/{key}", "number out of range")
            return None
        return value

    def integer(self, obj, key, path, default=_MISSING):
        value = obj.get(key, _MISSING)
        if value is _MISSING:
            return None if default is _MISSING else default
        if not isinstance(value, int) or isinstance(value, bool):
            self.error(DiagnosticCode.V10_SCHEMA_SHAPE, f"{path}/{key}",
                       f"expected an integer, got {_json_type(value)}")
            return None
        return value

    def enum(self, enum_cls, obj, key, path):
        token = self.string(obj, key, path)
        if token is None:
            return None
        try:
            return enum_cls(token)
        except ValueError:
            choices = ", ".join(m.value for m in enum_cls)
            self.error(DiagnosticCode.V3_ENUM_UNKNOWN, f"{path}/{key}",
                       f"unknown {key} {token!r}; expected one of {choices}")
            return None

    def ref(self, kind, obj, key, path) -> Ref | None:
        name = self.string(obj, key, path, nonempty=True)
        if name is None:
            return None
        ref = Ref(kind, name, f"{path}/{key}")
        self.refs.append(ref)
        return ref

    def declare(self, kind, label, name, path) -> None:
        names = self.declared[kind]
        if name in names:
            self.error(DiagnosticCode.V6_DUPLICATE_NAME, f"{path}/name",
                       f"duplicate {label} name {name!r}")
        names.add(name)

    # -- declarations --------------------------------------------------

    def model_card(self, value, path):
        obj = self.obj(value, path, ("name", "model_card"), ("name",))
        if obj is None:
            return None
        name = self.string(obj, "name", path, nonempty=True)
        body = self.string(obj, "model_card", path, default="")
        if name is not None:
            self.declare("ModelCard", "ModelCard", name, path)
        if name is None or body is None:
            return None
        return ModelCard(name, body, path=path)

    def provider(self, value, path):
        obj = self.obj(value, path, ("name", "confidence", "reputation"), ("name", "confidence"))
        if obj is None:
            return None
        name = self.string(obj, "name", path, nonempty=True)
        confidence = self.number(obj, "confidence", path)
        reputation = self.integer(obj, "reputation", path, default=0)
        if name is not None:
            self.declare("Provider", "Provider", name, path)
        if confidence is not None and not 0.0 <= confidence <= 1.0:
            self.error(DiagnosticCode.V4_CONFIDENCE_OUT_OF_BOUNDS, f"{path}/confidence",
                       f"confidence {confidence!r} is outside [0, 1]")
            confidence = None
        if reputation is not None and reputation < 0:
            self.error(DiagnosticCode.V10_SCHEMA_SHAPE, f"{path}/reputation",
                       f"reputation must be non-negative, got {reputation}")
            reputation = None
        if None in (name, confidence, reputation):
            return None
        return Provider(name, confidence, reputation, path=path)

    def agent(self, value, path):
        obj = self.obj(value, path, ("name", "description", "url", "ModelCard"), ("name",))
        if obj is None:
            return None
        name = self.string(obj, "name", path, nonempty=True)
        description = self.string(obj, "description", path, default="")
        url = self.string(obj, "url", path, default="")
        card = self.ref("ModelCard", obj, "ModelCard", path) if "ModelCard" in obj else False
        if name is not None:
            self.declare("Agent", "Agent", name, path)
        if None in (name, description, url, card):
            return None
        return Agent(name, description, url, card or None, path=path)

    def metric(self, kind, value, path):
        windowed = kind != "QoSMetric"
        allowed = _PLAIN_METRIC_KEYS + (_WINDOW_KEYS if windowed else ())
        required = ("name", "metric_type") + (_WINDOW_KEYS if windowed else ())
        obj = self.obj(value, path, allowed, required)
        if obj is None:
            return None
        name = self.string(obj, "name", path, nonempty=True)
        if name is not None:
            self.declare("QoSMetric", "metric", name, path)
        description = self.string(obj, "description", path, default="")
        metric_type = self.enum(MetricType, obj, "metric_type", path)
        unit = self.string(obj, "unit", path) if "unit" in obj else False
        uncertainty = self.number(obj, "uncertainty", path, default=0.0)
        provider = self.ref("Provider", obj, "Provider", path) if "Provider" in obj else False

        if metric_type is not None and unit is not None:
            entry = catalog_lookup(metric_type)
            if unit is False:
                if entry.unit_required:
                    units = ", ".join(sorted(entry.allowed_units))
                    self.error(DiagnosticCode.V1_UNIT_MISSING, path,
                               f"metric type {metric_type.value} requires a unit ({units})")
            elif unit not in entry.allowed_units:
                if entry.allowed_units:
                    expected = "expected one of " + ", ".join(sorted(entry.allowed_units))
                else:
                    expected = f"{entry.unit_dimension.value} metrics take no unit"
                self.error(DiagnosticCode.V2_UNIT_UNKNOWN, f"{path}/unit",
                           f"unit {unit!r} does not fit metric type {metric_type.value}; {expected}")
                unit = None
        if uncertainty is not None and uncertainty < 0:
            self.error(DiagnosticCode.V9_NEGATIVE_UNCERTAINTY, f"{path}/uncertainty",
                       f"uncertainty must be non-negative, got {uncertainty!r}")
            uncertainty = None

        fields = dict(name=name, description=description, metric_type=metric_type,
                      unit=unit or None if unit is not False else None,
                      uncertainty=uncertainty, provider=provider or None)
        ok = None not in (name, description, metric_type, unit, uncertainty, provider)
        if windowed:
            window = self.integer(obj, "window", path)
            if window is not None and window <= 0:
                self.error(DiagnosticCode.V8_NONPOSITIVE_WINDOW, f"{path}/window",
                           f"window must be a positive integer, got {window}")
                window = None
            fields.update(window=window,
                          window_unit=self.enum(WindowUnit, obj, "window_unit", path),
                          aggregation=self.enum(AggregationFn, obj, "aggregation", path))
            ok = ok and None not in (fields["window"], fields["window_unit"], fields["aggregation"])
        if not ok:
            return None
        return _METRIC_CLASSES[kind](path=path, **fields)

    # -- terms and expressions -----------------------------------------

    def expression(self, value, path) -> BoolExpr | None:
        if not isinstance(value, dict):
            self.error(DiagnosticCode.V7_MALFORMED_EXPRESSION, path,
                       f"expected an expression object, got {_json_type(value)}")
            return None
        kind = value.get("type", _MISSING)
        if kind is _MISSING:
            self.error(DiagnosticCode.V7_MALFORMED_EXPRESSION, path, "expression has no 'type'")
            return None
        if kind == "Comparison":
            obj = self.obj(value, path, ("type", "QoSMetric", "operator", "value"),
                           ("QoSMetric", "operator", "value"))
            metric = self.ref("QoSMetric", obj, "QoSMetric", path)
            operator = self.enum(CompareOp, obj, "operator", path)
            threshold = self.number(obj, "value", path)
            if None in (metric, operator, threshold):
                return None
            return Comparison(metric, operator, threshold)
        if kind in ("And", "Or"):
            obj = self.obj(value, path, ("type", "operands"), ())
            operands = obj.get("operands", _MISSING)
            if not isinstance(operands, list) or len(operands) < 2:
                where = path if operands is _MISSING else f"{path}/operands"
                self.error(DiagnosticCode.V7_MALFORMED_EXPRESSION, where,
                           f"{kind} needs an 'operands' array with at least two expressions")
                return None
            decoded = [self.expression(op, f"{path}/operands/{i}") for i, op in enumerate(operands)]
            if None in decoded:
                return None
            return (And if kind == "And" else Or)(tuple(decoded))
        self.error(DiagnosticCode.V7_MALFORMED_EXPRESSION, f"{path}/type",
                   f"unknown expression type {kind!r}; expected Comparison, And or Or")
        return None

    def scope(self, value, path):
        obj = self.obj(value, path, ("name", "Agent"), ("name", "Agent"))
        if obj is None:
            return None
        name = self.string(obj, "name", path, nonempty=True)
        agent = self.ref("Agent", obj, "Agent", path)
        if None in (name, agent):
            return None
        return Scope(name, agent)

    def slo(self, value, path):
        obj = self.obj(value, path, ("name", "BoolExpression"), ("name", "BoolExpression"))
        if obj is None:
            return None
        name = self.string(obj, "name", path, nonempty=True)
        expr = self.expression(obj["BoolExpression"], f"{path}/BoolExpression") \
            if "BoolExpression" in obj else None
        if None in (name, expr):
            return None
        return Slo(name, expr)

    def qualifying_condition(self, value, path):
        obj = self.obj(value, path, ("name", "BoolExpression"), ("BoolExpression",))
        if obj is None:
            return None
        name = self.string(obj, "name", path, nonempty=True) if "name" in obj else False
        expr = self.expression(obj["BoolExpression"], f"{path}/BoolExpression") \
            if "BoolExpression" in obj else None
        if None in (name, expr):
            return None
        return QualifyingCondition(expr, name or None)

    def term(self, value, path):
        obj = self.obj(value, path, ("Scope", "QualifyingCondition", "SLO"))
        if obj is None:
            return None
        parts = {}
        for key, decode in (("Scope", self.scope), ("QualifyingCondition", self.qualifying_condition),
                            ("SLO", self.slo)):
            items = self.array(obj, key, path)
            parts[key] = [decode(item, f"{path}/{key}/{i}") for i, item in enumerate(items)]
        for key in ("Scope", "SLO"):
            if key in obj and isinstance(obj[key], list) and not obj[key]:
                self.error(DiagnosticCode.V10_SCHEMA_SHAPE, f"{path}/{key}",
                           f"a guarantee term needs at least one {key}")
            elif key not in obj:
                self.error(DiagnosticCode.V10_SCHEMA_SHAPE, path,
                           f"a guarantee term needs at least one {key}")
        if any(None in items for items in parts.values()):
            return None
        if not parts["Scope"] or not parts["SLO"]:
            return None
        return GuaranteeTerm(tuple(parts["Scope"]), tuple(parts["SLO"]),
                             tuple(parts["QualifyingCondition"]))

    def document(self, data) -> SlaDocument | None:
        root = self.obj(data, "", TOP_LEVEL_KEYS)
        if root is None:
            return None

        def each(key, decode):
            return [decode(item, f"/{key}/{i}") for i, item in enumerate(self.array(root, key, ""))]

        model_cards = each("ModelCard", self.model_card)
        providers = each("Provider", self.provider)
        agents = each("Agent", self.agent)
        metrics = []
        for key in METRIC_KEYS:
            metrics += each(key, lambda v, p, key=key: self.metric(key, v, p))
        terms = each("GuaranteeTerm", self.term)

        for ref in self.refs:
            if ref.name not in self.declared[ref.kind]:
                self.error(DiagnosticCode.V5_UNRESOLVED_REFERENCE, ref.path,
                           f"no {ref.kind} named {ref.name!r}")
        if self.diagnostics:
            return None
        return SlaDocument(tuple(terms), tuple(agents), tuple(model_cards),
                           tuple(providers), tuple(metrics))


_RESOLUTION_CODES = {
    "UNRESOLVED_REFERENCE": DiagnosticCode.V5_UNRESOLVED_REFERENCE,
    "DUPLICATE_NAME": DiagnosticCode.V6_DUPLICATE_NAME,
}


def _path_key(path: str):
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in path.split("/"))


def _decode(text) -> tuple[SlaDocument | None, list[Diagnostic]]:
    data = _load_json(text)
    decoder = _Decoder()
    draft = decoder.document(data)
    diagnostics = decoder.diagnostics
    doc = None
    if draft is not None:
        try:
            doc = resolve_references(draft)
        except ResolutionError as exc:
            diagnostics = [Diagnostic(_RESOLUTION_CODES[c], p, m) for c, p, m in exc.problems]
    diagnostics = sorted(diagnostics, key=lambda d: _path_key(d.path))
    return doc, diagnostics


def decode(text: str | bytes) -> SlaDocument:
    """Parse and validate an AgentSLA document.

    Raises :class:`SlaSyntaxError` for malformed JSON, otherwise
    :class:`SlaValidationError` carrying every diagnostic, sorted by path.
    """
    doc, diagnostics = _decode(text)
    if diagnostics:
        raise SlaValidationError(diagnostics)
    return doc


def validate(text: str | bytes) -> list[Diagnostic]:
    """Diagnostics for ``text``; empty iff :func:`decode` would succeed.

    A JSON syntax error is reported as a single V10 diagnostic at the root.
    """
    try:
        return _decode(text)[1]
    except SlaSyntaxError as exc:
        return [Diagnostic(DiagnosticCode.V10_SCHEMA_SHAPE, "", str(exc))]


# -- encoding -------------------------------------------------------------

def _num(value: float):
    if value.is_integer() and abs(value) < 2**53:
        return int(value)
    return value


def _expression_json(expr: BoolExpr) -> dict:
    if isinstance(expr, Comparison):
        return {"type": "Comparison", "QoSMetric": expr.metric.name,
                "operator": expr.operator.value, "value": _num(expr.value)}
    return {"type": type(expr).__name__,
            "operands": [_expression_json(op) for op in expr.operands]}


def _term_json(term: GuaranteeTerm) -> dict:
    out: dict = {"Scope": [{"name": s.name, "Agent": s.agent.name} for s in term.scopes]}
    if term.qualifying_conditions:
        conditions = []
        for qc in term.qualifying_conditions:
            item = {} if qc.name is None else {"name": qc.name}
            item["BoolExpression"] = _expression_json(qc.expression)
            conditions.append(item)
        out["QualifyingCondition"] = conditions
    out["SLO"] = [{"name": s.name, "BoolExpression": _expression_json(s.expression)}
                  for s in term.slos]
    return out


def _metric_json(metric) -> dict:
    out = {"name": metric.name, "description": metric.description,
           "metric_type": metric.metric_type.value}
    if metric.unit is not None:
        out["unit"] = metric.unit
    out["uncertainty"] = _num(metric.uncertainty)
    if metric.provider is not None:
        out["Provider"] = metric.provider.name
    if isinstance(metric, DerivedQoSMetric):
        out.update(window=metric.window, window_unit=metric.window_unit.value,
                   aggregation=metric.aggregation.value)
    return out


def to_json_object(doc: SlaDocument) -> dict:
    """Canonical JSON-ready dict; empty registries are omitted."""
    out: dict = {}
    sections = {
        "GuaranteeTerm": [_term_json(t) for t in doc.guarantee_terms],
        "Agent": [_agent_json(a) for a in doc.agents],
        "ModelCard": [{"name": c.name, "model_card": c.model_card} for c in doc.model_cards],
        "Provider": [{"name": p.name, "confidence": _num(p.confidence),
                      "reputation": p.reputation} for p in doc.providers],
    }
    for key in METRIC_KEYS:
        sections[key] = [_metric_json(m) for m in doc.metrics if m.kind == key]
    for key in TOP_LEVEL_KEYS:
        if sections[key]:
            out[key] = sections[key]
    return out


def _agent_json(agent: Agent) -> dict:
    out = {"name": agent.name, "description": agent.description, "url": agent.url}
    if agent.model_card is not None:
        out["ModelCard"] = agent.model_card.name
    return out


def encode(doc: SlaDocument) -> str:
    """Canonical JSON text for a resolved document (2-space indent, trailing newline)."""
    return json.dumps(to_json_object(doc), indent=2, ensure_ascii=False) + "\n"


def _json_type(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, list):
        return "array"
    return "object"
