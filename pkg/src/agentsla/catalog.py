"""Static catalog of the metric types an AgentSLA metric may declare.

Each entry records where the metric sits in the AI-agent quality model,
its definition, and the unit vocabulary the validator enforces.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from types import MappingProxyType

from agentsla.model import MetricType


class UnitDimension(enum.Enum):
    TIME = "TIME"
    ENERGY = "ENERGY"
    WATER = "WATER"
    CARBON = "CARBON"
    COUNT = "COUNT"
    RATIO = "RATIO"
    DISTANCE = "DISTANCE"
    BOOLEAN = "BOOLEAN"
    ORDINAL = "ORDINAL"


UNITS: MappingProxyType = MappingProxyType({
    UnitDimension.TIME: frozenset({"ms", "sec", "min", "hour"}),
    UnitDimension.ENERGY: frozenset({"J", "Wh", "kWh"}),
    UnitDimension.WATER: frozenset({"mL", "L", "m3"}),
    UnitDimension.CARBON: frozenset({"gCO2e", "kgCO2e", "tCO2e"}),
    UnitDimension.COUNT: frozenset({"token", "char", "word"}),
    UnitDimension.RATIO: frozenset({"ratio"}),
    UnitDimension.DISTANCE: frozenset(),
    UnitDimension.BOOLEAN: frozenset(),
    UnitDimension.ORDINAL: frozenset(),
})

_REQUIRED = frozenset({
    UnitDimension.TIME,
    UnitDimension.ENERGY,
    UnitDimension.WATER,
    UnitDimension.CARBON,
    UnitDimension.COUNT,
})


@dataclass(frozen=True)
class MetricCatalogEntry:
    metric_type: MetricType
    label: str
    parent_characteristics: tuple[str, ...]
    definition: str
    unit_dimension: UnitDimension

    @property
    def allowed_units(self) -> frozenset[str]:
        return UNITS[self.unit_dimension]

    @property
    def unit_required(self) -> bool:
        return self.unit_dimension in _REQUIRED


_IMPACT = ("Training impact", "Inference impact")

# label, parents, definition, dimension
_ROWS = {
    MetricType.PRECISION: ("Precision", ("Functional completeness",),
                           "True positive over all predicted positive", UnitDimension.RATIO),
    MetricType.RECALL: ("Recall", ("Functional completeness",),
                        "True positive over all actual positive", UnitDimension.RATIO),
    MetricType.ACCURACY: ("Accuracy", ("Functional correctness",),
                          "Percentage of correct prediction", UnitDimension.RATIO),
    MetricType.AUC: ("AUC (Area Under Curve)", ("Functional correctness",),
                     "Probability that the model, if given a randomly chosen positive and "
                     "negative example, will rank the positive higher than the negative.",
                     UnitDimension.RATIO),
    MetricType.F1: ("F1 Score", ("Functional completeness",),
                    "Harmonic mean of accuracy and recall", UnitDimension.RATIO),
    MetricType.XACCUDIFF: ("XAccuDiff (Cross-validation accuracy difference)",
                           ("Functional appropriateness",),
                           "Accuracy difference between the train and test sets",
                           UnitDimension.RATIO),
    MetricType.PMV: ("PMV (Perturbed Model Validation)", ("Functional appropriateness",),
                     "Accuracy decrease rate between a model and the same model trained "
                     "with noise in the training data", UnitDimension.RATIO),
    MetricType.TRAINING_TIME: ("TrainingTime", ("Functional appropriateness", "Time-behavior"),
                               "Training time used as complexity proxy", UnitDimension.TIME),
    MetricType.POINTWISE_ROBUSTNESS: ("PointwiseRobustness", ("User error protection",),
                                      "Minimum input change affecting model prediction",
                                      UnitDimension.DISTANCE),
    MetricType.ADVERSARIAL_FREQUENCY: ("AdversarialFrequency", ("User error protection",),
                                       "Input change impact frequency", UnitDimension.RATIO),
    MetricType.ADVERSARIAL_SEVERITY: ("AdversarialSeverity", ("Fault-tolerance",),
                                      "Distance between an input and its nearest adversarial example",
                                      UnitDimension.DISTANCE),
    MetricType.ADVERSARIAL_DISTANCE: ("AdversarialDistance", ("Fault-tolerance",),
                                      "AdversarialSeverity on a training input",
                                      UnitDimension.DISTANCE),
    MetricType.TTFT: ("TTFT (Time-To-First-Token)", ("Time-behavior",),
                      "Time between the request and the generation of the first token",
                      UnitDimension.TIME),
    MetricType.E2E: ("E2E (End-to-end response time)", ("Time-behavior",),
                     "Time elapsed between request and end result", UnitDimension.TIME),
    MetricType.BIAS: ("Bias", ("Fairness",),
                      "Ratio of successful bias tests passed using LangBiTe", UnitDimension.RATIO),
    MetricType.RACISM: ("Racism", ("Fairness",), "Ratio for racism tests", UnitDimension.RATIO),
    MetricType.SEXISM: ("Sexism", ("Fairness",), "Ratio for sexism tests", UnitDimension.RATIO),
    MetricType.AGEISM: ("Ageism", ("Fairness",), "Ratio for ageism tests", UnitDimension.RATIO),
    MetricType.RELIGIOUS: ("Religious", ("Fairness",),
                           "Ratio for religious bias tests", UnitDimension.RATIO),
    MetricType.POLITICAL: ("Political", ("Fairness",),
                           "Ratio for political bias tests", UnitDimension.RATIO),
    MetricType.XENOPHOBIA: ("Xenophobia", ("Fairness",),
                            "Ratio for xenophobia tests", UnitDimension.RATIO),
    MetricType.SHAP: ("SHAP", ("Interpretability",), "SHAP estimation error", UnitDimension.RATIO),
    MetricType.LIME: ("LIME", ("Interpretability",),
                      "Comparison to interpretable local surrogates", UnitDimension.RATIO),
    MetricType.ENERGY_CONSUMPTION: ("EnergyConsumption", _IMPACT,
                                    "Estimated energy consumption", UnitDimension.ENERGY),
    MetricType.WATER_CONSUMPTION: ("WaterConsumption", _IMPACT,
                                   "Estimated water consumption", UnitDimension.WATER),
    MetricType.CARBON_EMISSIONS: ("CarbonEmissions", _IMPACT,
                                  "Estimated carbon emissions", UnitDimension.CARBON),
    MetricType.CARBON_OFFSET: ("CarbonOffset", ("Mitigation",),
                               "Percentage of carbon emissions offset by buying Carbon offset credit",
                               UnitDimension.RATIO),
    MetricType.OUTPUT_SIZE: ("OutputSize", ("Conciseness",),
                             "Length of the generated output", UnitDimension.COUNT),
    MetricType.A2A: ("A2A", ("Interoperability",),
                     "The agent can communicate using A2A (0 if no, else 1)", UnitDimension.BOOLEAN),
    MetricType.MCP: ("MCP", ("Interoperability",),
                     "The agent can connect to tools via MCP (0 or 1)", UnitDimension.BOOLEAN),
    MetricType.OVERSIGHT_LEVEL: ("OversightLevel", ("Autonomy",),
                                 "Level of human oversight as defined by Cihon et al.",
                                 UnitDimension.ORDINAL),
}

CATALOG: MappingProxyType = MappingProxyType({
    mt: MetricCatalogEntry(mt, *row) for mt, row in _ROWS.items()
})


def catalog_lookup(metric_type: MetricType) -> MetricCatalogEntry:
    return CATALOG[metric_type]
