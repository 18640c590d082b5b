"""Evaluate an agreement against timestamped measurements.

Verdicts are three-valued. A comparison whose measured value falls
within the metric's uncertainty of the threshold, or that lacks enough
data, is UNCERTAIN; And/Or combine verdicts with Kleene's strong
connectives.
"""

from __future__ import annotations

import enum
import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from agentsla.model import (
    AggregationFn,
    And,
    BoolExpr,
    CompareOp,
    Comparison,
    DerivedQoSMetric,
    MetricSpec,
    Provider,
    QoSDriftMetric,
    SlaDocument,
    format_number,
)


class Verdict(enum.Enum):
    SATISFIED = "SATISFIED"
    VIOLATED = "VIOLATED"
    UNCERTAIN = "UNCERTAIN"


class TermVerdict(enum.Enum):
    SATISFIED = "SATISFIED"
    VIOLATED = "VIOLATED"
    UNCERTAIN = "UNCERTAIN"
    NOT_APPLICABLE = "NOT_APPLICABLE"


def kleene_and(verdicts: Iterable[Verdict]) -> Verdict:
    result = Verdict.SATISFIED
    for v in verdicts:
        if v is Verdict.VIOLATED:
            return Verdict.VIOLATED
        if v is Verdict.UNCERTAIN:
            result = Verdict.UNCERTAIN
    return result


def kleene_or(verdicts: Iterable[Verdict]) -> Verdict:
    result = Verdict.VIOLATED
    for v in verdicts:
        if v is Verdict.SATISFIED:
            return Verdict.SATISFIED
        if v is Verdict.UNCERTAIN:
            result = Verdict.UNCERTAIN
    return result


# -- measurements ----------------------------------------------------------

@dataclass(frozen=True)
class Measurement:
    metric: str
    timestamp: float
    value: float
    agent: str | None = None


class StreamError(ValueError):
    pass


class _Series:
    __slots__ = ("timestamps", "values")

    def __init__(self, items: Sequence[Measurement]):
        self.timestamps = [m.timestamp for m in items]
        self.values = [m.value for m in items]


class MeasurementStream:
    """Per-metric, time-ordered measurement sequences.

    Appending a measurement older than the last one recorded for the same
    metric raises :class:`StreamError`. Equal timestamps keep insertion
    order.
    """

    def __init__(self, measurements: Iterable[Measurement] = ()):
        self._items: dict[str, list[Measurement]] = {}
        self._cache: dict[tuple[str, str | None], _Series] = {}
        for m in measurements:
            self.append(m)

    def append(self, m: Measurement) -> None:
        if not (math.isfinite(m.timestamp) and math.isfinite(m.value)):
            raise StreamError(f"non-finite measurement for {m.metric!r}")
        items = self._items.setdefault(m.metric, [])
        if items and m.timestamp < items[-1].timestamp:
            raise StreamError(
                f"measurement for {m.metric!r} at {m.timestamp!r} is older than "
                f"the previous one at {items[-1].timestamp!r}")
        items.append(m)
        for key in [k for k in self._cache if k[0] == m.metric]:
            del self._cache[key]

    def measurements(self, metric: str) -> tuple[Measurement, ...]:
        return tuple(self._items.get(metric, ()))

    def series(self, metric: str, agent: str | None = None) -> _Series:
        # Untagged measurements count for every agent; tagged ones only for theirs.
        key = (metric, agent)
        series = self._cache.get(key)
        if series is None:
            items = self._items.get(metric, [])
            if agent is not None:
                items = [m for m in items if m.agent is None or m.agent == agent]
            series = self._cache[key] = _Series(items)
        return series

    @property
    def metrics(self) -> list[str]:
        return sorted(self._items)

    def latest_timestamp(self) -> float | None:
        stamps = [items[-1].timestamp for items in self._items.values() if items]
        return max(stamps) if stamps else None

    def __len__(self) -> int:
        return sum(len(items) for items in self._items.values())

    @classmethod
    def from_jsonl(cls, source: IO[str] | Iterable[str]) -> MeasurementStream:
        """Read ``{"metric", "timestamp", "value", "agent"?}`` objects, one per line."""
        stream = cls()
        for lineno, line in enumerate(source, 1):
            if not line.strip():
                continue
            try:
                stream.append(_parse_line(line))
            except StreamError as exc:
                raise StreamError(f"line {lineno}: {exc}") from None
        return stream


def _parse_line(line: str) -> Measurement:
    try:
        obj = json.loads(line)
    except ValueError as exc:
        raise StreamError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise StreamError("expected a JSON object")
    unknown = set(obj) - {"metric", "timestamp", "value", "agent"}
    if unknown:
        raise StreamError(f"unknown key(s) {', '.join(sorted(unknown))}")
    metric, agent = obj.get("metric"), obj.get("agent")
    if not isinstance(metric, str) or not metric:
        raise StreamError("'metric' must be a non-empty string")
    if agent is not None and not isinstance(agent, str):
        raise StreamError("'agent' must be a string")
    numbers = []
    for key in ("timestamp", "value"):
        value = obj.get(key)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise StreamError(f"{key!r} must be a number")
        numbers.append(float(value))
    return Measurement(metric, numbers[0], numbers[1], agent)


# -- metric values ---------------------------------------------------------

@dataclass(frozen=True)
class InsufficientData:
    """Not enough measurements to compute a metric value."""

    reason: str

    def __str__(self) -> str:
        return f"insufficient data ({self.reason})"


_PERCENTILES = {AggregationFn.P90: 90, AggregationFn.P95: 95, AggregationFn.P99: 99}


def aggregate(fn: AggregationFn, values: Sequence[float]) -> float:
    """Aggregate a non-empty window of values."""
    n = len(values)
    if fn is AggregationFn.AVG:
        # fsum is order-independent; clamping keeps a constant window's mean exact.
        try:
            mean = math.fsum(values) / n
        except OverflowError:
            mean = math.fsum(v / n for v in values)
        return min(max(mean, min(values)), max(values))
    if fn is AggregationFn.SUM:
        return math.fsum(values)
    if fn is AggregationFn.COUNT:
        return float(n)
    if fn is AggregationFn.MIN:
        return min(values)
    if fn is AggregationFn.MAX:
        return max(values)
    ordered = sorted(values)
    if fn is AggregationFn.MEDIAN:
        mid = n // 2
        if n % 2:
            return ordered[mid]
        return (ordered[mid - 1] + ordered[mid]) / 2
    pct = _PERCENTILES[fn]
    rank = -(-pct * n // 100)  # nearest rank, ceil(p * n / 100)
    return ordered[max(rank, 1) - 1]


def _window(spec: DerivedQoSMetric, series: _Series, at: float):
    hi = bisect_right(series.timestamps, at)
    if spec.window_seconds is None:
        if hi < spec.window:
            return InsufficientData(f"{hi}/{spec.window} messages")
        return series.values[hi - spec.window:hi]
    start = at - spec.window_seconds
    lo = bisect_right(series.timestamps, start)
    if lo == hi:
        return InsufficientData(f"no measurements in ({format_number(start)}, {format_number(at)}]")
    return series.values[lo:hi]


def metric_value(spec: MetricSpec, stream: MeasurementStream, at: float,
                 agent: str | None = None) -> float | InsufficientData:
    """Value of ``spec`` at time ``at`` or an :class:`InsufficientData` marker.

    Plain metrics take the latest measurement at or before ``at``. Derived
    metrics aggregate the last ``window`` messages, or the measurements in
    ``(at - W, at]`` for a time window of length ``W``. Drift metrics
    subtract the aggregate of the preceding window from the current one.
    If ``agent`` is given, measurements tagged with another agent are ignored.
    """
    series = stream.series(spec.name, agent)
    if isinstance(spec, QoSDriftMetric):
        if spec.window_seconds is None:
            w = spec.window
            hi = bisect_right(series.timestamps, at)
            if hi < 2 * w:
                return InsufficientData(f"{hi}/{2 * w} messages")
            recent = series.values[hi - w:hi]
            baseline = series.values[hi - 2 * w:hi - w]
        else:
            recent = _window(spec, series, at)
            baseline = _window(spec, series, at - spec.window_seconds)
            for part in (recent, baseline):
                if isinstance(part, InsufficientData):
                    return part
        return aggregate(spec.aggregation, recent) - aggregate(spec.aggregation, baseline)
    if isinstance(spec, DerivedQoSMetric):
        values = _window(spec, series, at)
        if isinstance(values, InsufficientData):
            return values
        return aggregate(spec.aggregation, values)
    hi = bisect_right(series.timestamps, at)
    if hi == 0:
        return InsufficientData(f"no measurement at or before {format_number(at)}")
    return series.values[hi - 1]


# -- comparisons and expressions ---------------------------------------------

_ORDERING = {
    CompareOp.LESS: lambda m, t: m < t,
    CompareOp.LESS_EQ: lambda m, t: m <= t,
    CompareOp.GREATER: lambda m, t: m > t,
    CompareOp.GREATER_EQ: lambda m, t: m >= t,
}


def compare(measured: float, op: CompareOp, threshold: float, uncertainty: float) -> Verdict:
    """Compare a measured value with a threshold under a tolerance band.

    Ordering operators are UNCERTAIN when ``|measured - threshold| <=
    uncertainty``. EQ holds within the band and NEQ outside it.
    """
    near = abs(measured - threshold) <= uncertainty
    if op is CompareOp.EQ:
        return Verdict.SATISFIED if near else Verdict.VIOLATED
    if op is CompareOp.NEQ:
        return Verdict.VIOLATED if near else Verdict.SATISFIED
    if near:
        return Verdict.UNCERTAIN
    return Verdict.SATISFIED if _ORDERING[op](measured, threshold) else Verdict.VIOLATED


@dataclass(frozen=True)
class ComparisonResult:
    metric: str
    operator: CompareOp
    threshold: float
    uncertainty: float
    measured: float | None
    verdict: Verdict
    explanation: str
    provider: Provider | None = None


def _compare_node(node: Comparison, stream, at, agent) -> ComparisonResult:
    spec = node.metric
    value = metric_value(spec, stream, at, agent)
    if isinstance(value, InsufficientData):
        return ComparisonResult(spec.name, node.operator, node.value, spec.uncertainty, None,
                                Verdict.UNCERTAIN, f"{spec.name}: {value}", spec.provider)
    verdict = compare(value, node.operator, node.value, spec.uncertainty)
    unit = f" {spec.unit}" if spec.unit else ""
    text = f"{spec.name} = {_fmt(value)}{unit}, required {node.operator.symbol} {_fmt(node.value)}"
    if spec.uncertainty:
        text += f" (uncertainty {_fmt(spec.uncertainty)})"
    if verdict is Verdict.UNCERTAIN:
        text += ": within uncertainty band"
    return ComparisonResult(spec.name, node.operator, node.value, spec.uncertainty, value,
                            verdict, text, spec.provider)


def _eval(expr: BoolExpr, stream, at, agent, out: list[ComparisonResult]) -> Verdict:
    if isinstance(expr, Comparison):
        result = _compare_node(expr, stream, at, agent)
        out.append(result)
        return result.verdict
    verdicts = [_eval(op, stream, at, agent, out) for op in expr.operands]
    return kleene_and(verdicts) if isinstance(expr, And) else kleene_or(verdicts)


def eval_expr(expr: BoolExpr, stream: MeasurementStream, at: float,
              agent: str | None = None) -> Verdict:
    return _eval(expr, stream, at, agent, [])


# -- reports ---------------------------------------------------------------

@dataclass(frozen=True)
class ExpressionResult:
    name: str | None
    verdict: Verdict
    comparisons: tuple[ComparisonResult, ...]

    @property
    def measured_value(self) -> float | None:
        if len(self.comparisons) == 1:
            return self.comparisons[0].measured
        return None

    @property
    def explanation(self) -> str:
        return "; ".join(c.explanation for c in self.comparisons)


@dataclass(frozen=True)
class ScopeResult:
    name: str
    agent: str
    applicable: bool
    conditions: tuple[ExpressionResult, ...]
    slos: tuple[ExpressionResult, ...]

    @property
    def verdict(self) -> TermVerdict:
        if not self.applicable:
            return TermVerdict.NOT_APPLICABLE
        return TermVerdict(kleene_and(s.verdict for s in self.slos).value)


@dataclass(frozen=True)
class TermResult:
    index: int
    scopes: tuple[ScopeResult, ...]

    @property
    def verdict(self) -> TermVerdict:
        return _fold_terms(s.verdict for s in self.scopes)


@dataclass(frozen=True)
class ComplianceReport:
    evaluated_at: float
    terms: tuple[TermResult, ...] = field(default=())

    @property
    def verdict(self) -> TermVerdict:
        """Kleene conjunction over applicable terms; NOT_APPLICABLE if there are none."""
        return _fold_terms(t.verdict for t in self.terms)

    def to_json_object(self) -> dict:
        return {
            "evaluated_at": self.evaluated_at,
            "verdict": self.verdict.value,
            "terms": [
                {"index": t.index, "verdict": t.verdict.value,
                 "scopes": [_scope_json(s) for s in t.scopes]}
                for t in self.terms
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_object(), indent=2, ensure_ascii=False) + "\n"

    def render_text(self) -> str:
        lines = [f"Compliance report at t={format_number(self.evaluated_at)}: {self.verdict.value}"]
        for term in self.terms:
            lines.append(f"Term {term.index}: {term.verdict.value}")
            for scope in term.scopes:
                state = "" if scope.applicable else " (qualifying conditions not met)"
                lines.append(f"  Scope {scope.name!r} -> agent {scope.agent!r}: "
                             f"{scope.verdict.value}{state}")
                for qc in scope.conditions:
                    label = qc.name or "condition"
                    lines.append(f"    condition {label}: {qc.verdict.value} - {qc.explanation}")
                for slo in scope.slos:
                    measured = "" if slo.measured_value is None else \
                        f" measured {_fmt(slo.measured_value)}"
                    lines.append(f"    SLO {slo.name}: {slo.verdict.value}{measured} - "
                                 f"{slo.explanation}")
        return "\n".join(lines) + "\n"


def _fold_terms(verdicts: Iterable[TermVerdict]) -> TermVerdict:
    applicable = [Verdict(v.value) for v in verdicts if v is not TermVerdict.NOT_APPLICABLE]
    if not applicable:
        return TermVerdict.NOT_APPLICABLE
    return TermVerdict(kleene_and(applicable).value)


def _expression_json(result: ExpressionResult) -> dict:
    return {
        "name": result.name,
        "verdict": result.verdict.value,
        "measured_value": result.measured_value,
        "explanation": result.explanation,
        "comparisons": [
            {
                "metric": c.metric,
                "operator": c.operator.value,
                "threshold": c.threshold,
                "uncertainty": c.uncertainty,
                "measured_value": c.measured,
                "verdict": c.verdict.value,
                "explanation": c.explanation,
                "provider": None if c.provider is None else {
                    "name": c.provider.name,
                    "confidence": c.provider.confidence,
                    "reputation": c.provider.reputation,
                },
            }
            for c in result.comparisons
        ],
    }


def _scope_json(scope: ScopeResult) -> dict:
    return {
        "name": scope.name,
        "agent": scope.agent,
        "applicable": scope.applicable,
        "verdict": scope.verdict.value,
        "qualifying_conditions": [_expression_json(q) for q in scope.conditions],
        "slos": [_expression_json(s) for s in scope.slos],
    }


def _expression_result(name, expr, stream, at, agent) -> ExpressionResult:
    comparisons: list[ComparisonResult] = []
    verdict = _eval(expr, stream, at, agent, comparisons)
    return ExpressionResult(name, verdict, tuple(comparisons))


def evaluate(doc: SlaDocument, stream: MeasurementStream, at: float) -> ComplianceReport:
    """Evaluate every guarantee term of ``doc`` at time ``at``.

    A scope is applicable only when all of the term's qualifying conditions
    are SATISFIED for its agent; SLOs of inapplicable scopes are not
    evaluated.
    """
    terms = []
    for index, term in enumerate(doc.guarantee_terms):
        scopes = []
        for scope in term.scopes:
            agent = scope.agent.name
            conditions = tuple(_expression_result(qc.name, qc.expression, stream, at, agent)
                               for qc in term.qualifying_conditions)
            applicable = all(c.verdict is Verdict.SATISFIED for c in conditions)
            slos = tuple(_expression_result(s.name, s.expression, stream, at, agent)
                         for s in term.slos) if applicable else ()
            scopes.append(ScopeResult(scope.name, agent, applicable, conditions, slos))
        terms.append(TermResult(index, tuple(scopes)))
    return ComplianceReport(at, tuple(terms))


def _fmt(x: float) -> str:
    return f"{x:.6g}"
