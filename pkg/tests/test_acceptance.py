"""Exit criteria. Each ``test_criterion_N`` maps to one acceptance item;
the terminal summary prints one PASS/FAIL line per criterion."""

import itertools
import json
import random
import time

import pytest

from agentsla import (
    CATALOG,
    AggregationFn,
    CompareOp,
    DerivedQoSMetric,
    DiagnosticCode as C,
    InsufficientData,
    Measurement,
    MeasurementStream,
    MetricType,
    QoSDriftMetric,
    Verdict,
    WindowUnit,
    compare,
    decode,
    encode,
    kleene_and,
    kleene_or,
    metric_value,
    validate,
)
from agentsla.cli import main

from conftest import LISTING1_PATH, mutate
from generators import random_document
from oracles import close, kleene_and_oracle, kleene_or_oracle, naive_aggregate, naive_window
from table2 import deduplicated


def test_criterion_1_listing_golden(listing1_text):
    start = time.perf_counter()
    assert validate(listing1_text) == []
    doc = decode(listing1_text)
    elapsed = time.perf_counter() - start
    metric = doc.metric("AVG TTFT")
    comparison = doc.guarantee_terms[0].slos[0].expression
    provider = doc.provider("Provider 1")
    assert metric.window == 10
    assert metric.unit == "sec"
    assert metric.uncertainty == 0
    assert metric.window_unit is WindowUnit.MESSAGE
    assert metric.aggregation is AggregationFn.AVG
    assert comparison.operator is CompareOp.LESS
    assert comparison.value == 1
    assert provider.confidence == 0.95
    assert provider.reputation == 50
    assert doc.guarantee_terms[0].scopes[0].agent.name == "Agent 1"
    assert doc.agent("Agent 1").model_card.name == "GPT 4o"
    assert elapsed < 1.0


_SLO_EXPR = ("GuaranteeTerm", 0, "SLO", 0, "BoolExpression")


def _at(d, keys):
    for k in keys:
        d = d[k]
    return d


def _unitless_ratio_metric(d):
    metric = d["DerivedQoSMetric"][0]
    metric["metric_type"] = "ACCURACY"
    del metric["unit"]


CHECKS = [
    # code, passing edit, failing edit, failing path
    (C.V1_UNIT_MISSING,
     _unitless_ratio_metric,
     lambda d: d["DerivedQoSMetric"][0].pop("unit"),
     "/DerivedQoSMetric/0"),
    (C.V2_UNIT_UNKNOWN,
     lambda d: d["DerivedQoSMetric"][0].update(unit="ms"),
     lambda d: d["DerivedQoSMetric"][0].update(unit="seconds"),
     "/DerivedQoSMetric/0/unit"),
    (C.V3_ENUM_UNKNOWN,
     lambda d: _at(d, _SLO_EXPR).update(operator="GREATER_EQ"),
     lambda d: _at(d, _SLO_EXPR).update(operator="LESSER"),
     "/GuaranteeTerm/0/SLO/0/BoolExpression/operator"),
    (C.V4_CONFIDENCE_OUT_OF_BOUNDS,
     lambda d: d["Provider"][0].update(confidence=1.0),
     lambda d: d["Provider"][0].update(confidence=1.5),
     "/Provider/0/confidence"),
]


@pytest.mark.parametrize("code, passing, failing, path", CHECKS, ids=[c[0].value for c in CHECKS])
def test_criterion_2_validation_check_fidelity(listing1_obj, code, passing, failing, path):
    assert validate(mutate(listing1_obj, passing)) == []
    diagnostics = validate(mutate(listing1_obj, failing))
    assert [(d.code, d.path) for d in diagnostics] == [(code, path)]


def test_criterion_3_round_trip():
    rng = random.Random(20261014)
    start = time.perf_counter()
    for _ in range(100):
        doc = random_document(rng, max_terms=5, max_metrics=10)
        assert len(doc.guarantee_terms) <= 5 and len(doc.metrics) <= 10
        text = encode(doc)
        again = decode(text)
        assert again == doc
        assert encode(again) == text
        assert encode(decode(encode(again))) == text
    assert time.perf_counter() - start < 5.0


def _random_stream(rng, n):
    t, points = 0.0, []
    for _ in range(n):
        t += rng.choice([0.0, 0.25, 0.5, 1.0, 1.0, 2.0, 3.5])
        points.append((t, rng.uniform(-1e3, 1e3) if rng.random() < 0.8 else float(rng.randint(-5, 5))))
    return points


def test_criterion_4_window_oracle():
    rng = random.Random(4)
    functions = list(AggregationFn)
    units = [WindowUnit.MESSAGE, WindowUnit.SECOND]
    combos = set()
    underfull = 0
    start = time.perf_counter()
    for i in range(1000):
        fn, unit = functions[i % 9], units[(i // 9) % 2]
        combos.add((fn, unit))
        n = rng.randint(0, 1000)
        points = _random_stream(rng, n)
        window = rng.randint(1, max(1, int(n * 1.2)) if unit is WindowUnit.MESSAGE else 60)
        spec = DerivedQoSMetric(name="m", metric_type=MetricType.E2E, unit="ms", window=window,
                                window_unit=unit, aggregation=fn)
        stream = MeasurementStream(Measurement("m", t, v) for t, v in points)
        last = points[-1][0] if points else 0.0
        at = rng.choice([last, rng.uniform(-5, last + 5)])
        got = metric_value(spec, stream, at)
        values = naive_window(points, at, window, unit.value)
        if values is None:
            assert isinstance(got, InsufficientData)
            underfull += 1
        else:
            want = naive_aggregate(fn, values)
            assert close(got, want, rel=1e-9), (fn, unit, got, want)
    assert len(combos) == 18
    assert underfull > 0
    assert time.perf_counter() - start < 10.0


@pytest.mark.parametrize("fn", [AggregationFn.AVG, AggregationFn.MEDIAN,
                                AggregationFn.MIN, AggregationFn.MAX])
def test_criterion_5_drift_semantics(fn):
    for unit in (WindowUnit.MESSAGE, WindowUnit.SECOND):
        for value in (5.0, 0.1, -123.456, 1e-7):
            spec = QoSDriftMetric(name="m", metric_type=MetricType.TTFT, unit="sec", window=10,
                                  window_unit=unit, aggregation=fn)
            stream = MeasurementStream(Measurement("m", float(t), value) for t in range(1, 31))
            assert metric_value(spec, stream, 30.0) == 0.0

    # Ten seconds, AVG: mean over (10, 20] minus mean over (0, 10] at t = 20.
    values = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0,
              5.0, 8.0, 9.0, 7.0, 9.0, 3.0, 2.0, 3.0, 8.0, 4.0]
    stream = MeasurementStream(Measurement("m", float(t), v) for t, v in zip(range(1, 21), values))
    spec = QoSDriftMetric(name="m", metric_type=MetricType.TTFT, unit="sec", window=10,
                          window_unit=WindowUnit.SECOND, aggregation=AggregationFn.AVG)
    # (5+8+9+7+9+3+2+3+8+4)/10 - (3+1+4+1+5+9+2+6+5+3)/10 = 5.8 - 3.9
    assert metric_value(spec, stream, 20.0) == pytest.approx(5.8 - 3.9, rel=1e-12)


def test_criterion_6_kleene_logic():
    V = list(Verdict)
    for a, b in itertools.product(V, repeat=2):
        assert kleene_and([a, b]) is kleene_and_oracle(a, b)
        assert kleene_or([a, b]) is kleene_or_oracle(a, b)
        assert kleene_and([a, b]) is kleene_and([b, a])
        assert kleene_or([a, b]) is kleene_or([b, a])
    for a in V:
        assert kleene_and([a, a]) is a and kleene_or([a, a]) is a
    triples = list(itertools.product(V, repeat=3))
    assert len(triples) == 27
    for a, b, c in triples:
        assert kleene_and([kleene_and([a, b]), c]) is kleene_and([a, kleene_and([b, c])])
        assert kleene_or([kleene_or([a, b]), c]) is kleene_or([a, kleene_or([b, c])])
        assert kleene_and([a, b, c]) is kleene_and_oracle(a, b, c)
        assert kleene_or([a, b, c]) is kleene_or_oracle(a, b, c)


def test_criterion_7_uncertainty_band():
    rng = random.Random(7)
    ops = [CompareOp.LESS, CompareOp.LESS_EQ, CompareOp.GREATER, CompareOp.GREATER_EQ]
    for _ in range(10_000):
        m, v = rng.uniform(-100, 100), rng.uniform(-100, 100)
        if rng.random() < 0.1:
            v = m
        u = rng.choice([0.0, rng.uniform(0, 50), abs(m - v)])
        op = rng.choice(ops)
        verdict = compare(m, op, v, u)
        assert (verdict is Verdict.UNCERTAIN) == (abs(m - v) <= u)
        if verdict is Verdict.UNCERTAIN:
            assert compare(m, op, v, u + rng.uniform(0, 50)) is Verdict.UNCERTAIN


@pytest.mark.parametrize("values, expected", [([0.5] * 10, 0), ([2.0] * 10, 1), ([0.5] * 5, 2)],
                         ids=["satisfied", "violated", "uncertain"])
def test_criterion_8_cli_exit_codes(tmp_path, capsys, values, expected):
    stream = tmp_path / "ttft.jsonl"
    stream.write_text("".join(json.dumps({"metric": "AVG TTFT", "timestamp": t, "value": v}) + "\n"
                              for t, v in enumerate(values)))
    assert main(["evaluate", str(LISTING1_PATH), "--measurements", str(stream)]) == expected
    capsys.readouterr()


def test_criterion_9_catalog_completeness():
    expected = deduplicated()
    assert len(CATALOG) == len(expected) == 31
    assert {e.label: e.parent_characteristics for e in CATALOG.values()} == expected
