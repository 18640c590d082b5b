"""In-memory AgentSLA agreement model.

All classes are frozen dataclasses. Associations between declarations
(scope -> agent, agent -> model card, metric -> provider, comparison ->
metric) hold the referenced object itself once a document is resolved.
A *draft* document is the same structure with :class:`Ref` placeholders
in those positions; :func:`resolve_references` turns a draft into a
resolved document.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Iterator, Union


class CompareOp(enum.Enum):
    LESS = "LESS"
    LESS_EQ = "LESS_EQ"
    GREATER = "GREATER"
    GREATER_EQ = "GREATER_EQ"
    EQ = "EQ"
    NEQ = "NEQ"

    @property
    def symbol(self) -> str:
        return _OP_SYMBOLS[self]


_OP_SYMBOLS = {
    CompareOp.LESS: "<",
    CompareOp.LESS_EQ: "<=",
    CompareOp.GREATER: ">",
    CompareOp.GREATER_EQ: ">=",
    CompareOp.EQ: "==",
    CompareOp.NEQ: "!=",
}


class WindowUnit(enum.Enum):
    MESSAGE = "MESSAGE"
    SECOND = "SECOND"
    MINUTE = "MINUTE"
    HOUR = "HOUR"
    DAY = "DAY"

    @property
    def seconds(self) -> float | None:
        """Length of one unit in seconds, ``None`` for MESSAGE."""
        return _UNIT_SECONDS[self]


_UNIT_SECONDS = {
    WindowUnit.MESSAGE: None,
    WindowUnit.SECOND: 1.0,
    WindowUnit.MINUTE: 60.0,
    WindowUnit.HOUR: 3600.0,
    WindowUnit.DAY: 86400.0,
}


class AggregationFn(enum.Enum):
    AVG = "AVG"
    MEDIAN = "MEDIAN"
    MIN = "MIN"
    MAX = "MAX"
    SUM = "SUM"
    COUNT = "COUNT"
    P90 = "P90"
    P95 = "P95"
    P99 = "P99"


class MetricType(enum.Enum):
    PRECISION = "PRECISION"
    RECALL = "RECALL"
    ACCURACY = "ACCURACY"
    AUC = "AUC"
    F1 = "F1"
    XACCUDIFF = "XACCUDIFF"
    PMV = "PMV"
    TRAINING_TIME = "TRAINING_TIME"
    POINTWISE_ROBUSTNESS = "POINTWISE_ROBUSTNESS"
    ADVERSARIAL_FREQUENCY = "ADVERSARIAL_FREQUENCY"
    ADVERSARIAL_SEVERITY = "ADVERSARIAL_SEVERITY"
    ADVERSARIAL_DISTANCE = "ADVERSARIAL_DISTANCE"
    TTFT = "TTFT"
    E2E = "E2E"
    BIAS = "BIAS"
    RACISM = "RACISM"
    SEXISM = "SEXISM"
    AGEISM = "AGEISM"
    RELIGIOUS = "RELIGIOUS"
    POLITICAL = "POLITICAL"
    XENOPHOBIA = "XENOPHOBIA"
    SHAP = "SHAP"
    LIME = "LIME"
    ENERGY_CONSUMPTION = "ENERGY_CONSUMPTION"
    WATER_CONSUMPTION = "WATER_CONSUMPTION"
    CARBON_EMISSIONS = "CARBON_EMISSIONS"
    CARBON_OFFSET = "CARBON_OFFSET"
    OUTPUT_SIZE = "OUTPUT_SIZE"
    A2A = "A2A"
    MCP = "MCP"
    OVERSIGHT_LEVEL = "OVERSIGHT_LEVEL"


@dataclass(frozen=True)
class Ref:
    """Unresolved by-name reference found in a draft document.

    ``kind`` is the JSON class key of the target (``"Agent"``,
    ``"QoSMetric"``...) and ``path`` locates the reference in the source.
    """

    kind: str
    name: str
    path: str = ""


@dataclass(frozen=True)
class ModelCard:
    name: str
    model_card: str = ""
    path: str | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Agent:
    name: str
    description: str = ""
    url: str = ""
    model_card: ModelCard | Ref | None = None
    path: str | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Provider:
    name: str
    confidence: float
    reputation: int = 0
    path: str | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, kw_only=True)
class QoSMetric:
    name: str
    description: str = ""
    metric_type: MetricType
    unit: str | None = None
    uncertainty: float = 0.0
    provider: Provider | Ref | None = None
    path: str | None = field(default=None, compare=False, repr=False)

    kind = "QoSMetric"


@dataclass(frozen=True, kw_only=True)
class DerivedQoSMetric(QoSMetric):
    window: int
    window_unit: WindowUnit
    aggregation: AggregationFn

    kind = "DerivedQoSMetric"

    @property
    def window_seconds(self) -> float | None:
        unit = self.window_unit.seconds
        return None if unit is None else self.window * unit


@dataclass(frozen=True, kw_only=True)
class QoSDriftMetric(DerivedQoSMetric):
    kind = "QoSDriftMetric"


MetricSpec = Union[QoSMetric, DerivedQoSMetric, QoSDriftMetric]


@dataclass(frozen=True)
class Comparison:
    metric: MetricSpec | Ref
    operator: CompareOp
    value: float


@dataclass(frozen=True)
class And:
    operands: tuple[BoolExpr, ...]

    def __post_init__(self):
        if len(self.operands) < 2:
            raise ValueError("And needs at least two operands")


@dataclass(frozen=True)
class Or:
    operands: tuple[BoolExpr, ...]

    def __post_init__(self):
        if len(self.operands) < 2:
            raise ValueError("Or needs at least two operands")


BoolExpr = Union[And, Or, Comparison]


@dataclass(frozen=True)
class Scope:
    name: str
    agent: Agent | Ref


@dataclass(frozen=True)
class QualifyingCondition:
    expression: BoolExpr
    name: str | None = None


@dataclass(frozen=True)
class Slo:
    name: str
    expression: BoolExpr


@dataclass(frozen=True)
class GuaranteeTerm:
    scopes: tuple[Scope, ...]
    slos: tuple[Slo, ...]
    qualifying_conditions: tuple[QualifyingCondition, ...] = ()

    def __post_init__(self):
        if not self.scopes:
            raise ValueError("a guarantee term needs at least one scope")
        if not self.slos:
            raise ValueError("a guarantee term needs at least one SLO")


@dataclass(frozen=True)
class SlaDocument:
    guarantee_terms: tuple[GuaranteeTerm, ...] = ()
    agents: tuple[Agent, ...] = ()
    model_cards: tuple[ModelCard, ...] = ()
    providers: tuple[Provider, ...] = ()
    metrics: tuple[MetricSpec, ...] = ()

    def __post_init__(self):
        # Metrics are kept grouped by kind (plain, derived, drift), matching
        # the order of the JSON arrays they are declared in.
        grouped = tuple(sorted(self.metrics, key=lambda m: _KIND_ORDER[m.kind]))
        object.__setattr__(self, "metrics", grouped)

    def metric(self, name: str) -> MetricSpec:
        return _by_name(self.metrics, name)

    def agent(self, name: str) -> Agent:
        return _by_name(self.agents, name)

    def provider(self, name: str) -> Provider:
        return _by_name(self.providers, name)

    def model_card(self, name: str) -> ModelCard:
        return _by_name(self.model_cards, name)


_KIND_ORDER = {"QoSMetric": 0, "DerivedQoSMetric": 1, "QoSDriftMetric": 2}


def _by_name(items, name):
    for item in items:
        if item.name == name:
            return item
    raise KeyError(name)


def iter_expression(expr: BoolExpr) -> Iterator[Comparison]:
    """Yield the comparisons of an expression tree, left to right."""
    if isinstance(expr, Comparison):
        yield expr
    else:
        for operand in expr.operands:
            yield from iter_expression(operand)


class ResolutionError(ValueError):
    """Raised by :func:`resolve_references` with every problem found.

    ``problems`` holds ``(code, path, message)`` triples where code is
    ``"UNRESOLVED_REFERENCE"`` or ``"DUPLICATE_NAME"``.
    """

    def __init__(self, problems: list[tuple[str, str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{c} at {p}: {m}" for c, p, m in problems))


# JSON class key -> SlaDocument registry attribute
_REGISTRIES = {
    "Agent": "agents",
    "ModelCard": "model_cards",
    "Provider": "providers",
    "QoSMetric": "metrics",
}


def resolve_references(draft: SlaDocument) -> SlaDocument:
    """Replace every :class:`Ref` in ``draft`` with its declaration.

    Declarations are resolved in dependency order (model cards, then
    agents and providers, then metrics, then guarantee terms) so that the
    result shares one object per declaration. Raises
    :class:`ResolutionError` listing all dangling and duplicate names.
    """
    problems: list[tuple[str, str, str]] = []
    tables: dict[str, dict[str, object]] = {}
    for kind, attr in _REGISTRIES.items():
        table: dict[str, object] = {}
        for index, decl in enumerate(getattr(draft, attr)):
            if decl.name in table:
                where = decl.path or f"/{getattr(decl, 'kind', kind)}/{index}"
                problems.append(("DUPLICATE_NAME", f"{where}/name",
                                 f"duplicate {kind} name {decl.name!r}"))
            else:
                table[decl.name] = decl
        tables[kind] = table

    def lookup(ref):
        if not isinstance(ref, Ref):
            return ref
        target = tables[ref.kind].get(ref.name)
        if target is None:
            problems.append(("UNRESOLVED_REFERENCE", ref.path,
                             f"no {ref.kind} named {ref.name!r}"))
        return target

    def relink(kind, attr, link):
        # Tables must point at the relinked objects so later lookups share them.
        relinked = []
        for decl in getattr(draft, attr):
            new = replace(decl, **{link: lookup(getattr(decl, link))})
            if tables[kind].get(decl.name) is decl:
                tables[kind][decl.name] = new
            relinked.append(new)
        return tuple(relinked)

    model_cards = draft.model_cards
    agents = relink("Agent", "agents", "model_card")
    providers = draft.providers
    metrics = relink("QoSMetric", "metrics", "provider")

    def resolve_expr(expr):
        if isinstance(expr, Comparison):
            return replace(expr, metric=lookup(expr.metric))
        return type(expr)(tuple(resolve_expr(op) for op in expr.operands))

    terms = tuple(
        GuaranteeTerm(
            scopes=tuple(replace(s, agent=lookup(s.agent)) for s in term.scopes),
            slos=tuple(replace(s, expression=resolve_expr(s.expression)) for s in term.slos),
            qualifying_conditions=tuple(
                replace(q, expression=resolve_expr(q.expression))
                for q in term.qualifying_conditions
            ),
        )
        for term in draft.guarantee_terms
    )
    if problems:
        raise ResolutionError(problems)
    return SlaDocument(terms, agents, model_cards, providers, metrics)


def unresolved(obj) -> list[Ref]:
    """Every :class:`Ref` reachable from ``obj`` (empty once resolved)."""
    found: list[Ref] = []

    def walk(node):
        if isinstance(node, Ref):
            found.append(node)
        elif isinstance(node, tuple):
            for item in node:
                walk(item)
        elif is_dataclass(node) and not isinstance(node, type):
            for f in fields(node):
                walk(getattr(node, f.name))

    walk(obj)
    return found


def format_number(value: float) -> str:
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(float(value))


def format_expression(expr: BoolExpr) -> str:
    """Infix rendering, e.g. ``(AVG TTFT < 1 AND Accuracy >= 0.9)``."""
    if isinstance(expr, Comparison):
        return f"{expr.metric.name} {expr.operator.symbol} {format_number(expr.value)}"
    joiner = " AND " if isinstance(expr, And) else " OR "
    return "(" + joiner.join(format_expression(op) for op in expr.operands) + ")"
