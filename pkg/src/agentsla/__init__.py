"""AgentSLA: service level agreements for AI agents.

Parse and validate JSON agreements, browse the metric catalog, and
evaluate SLOs against measurement streams::

    import agentsla

    doc = agentsla.decode(open("sla.json", "rb").read())
    with open("measurements.jsonl") as fh:
        stream = agentsla.MeasurementStream.from_jsonl(fh)
    report = agentsla.evaluate(doc, stream, at=stream.latest_timestamp())
    print(report.render_text())
"""

from agentsla.catalog import CATALOG, MetricCatalogEntry, UnitDimension, catalog_lookup
from agentsla.evaluation import (
    ComplianceReport,
    InsufficientData,
    Measurement,
    MeasurementStream,
    StreamError,
    TermVerdict,
    Verdict,
    aggregate,
    compare,
    eval_expr,
    evaluate,
    kleene_and,
    kleene_or,
    metric_value,
)
from agentsla.model import (
    Agent,
    AggregationFn,
    And,
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
    format_expression,
    resolve_references,
)
from agentsla.parser import (
    Diagnostic,
    DiagnosticCode,
    SlaSyntaxError,
    SlaValidationError,
    decode,
    encode,
    validate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
