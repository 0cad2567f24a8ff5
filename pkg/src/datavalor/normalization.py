"""Normalization of raw metric observations into dimensionless scores.

Three schemes are supported:

* linear: m_norm = xi * (raw - m_min) / (m_max - m_min), unclamped by
  default so out-of-range observations extrapolate (a cost observed at
  4x its reference band legitimately scores below -4).
* delimited: 1 when an explicit threshold predicate holds, else 0.
  The direction (at_or_above / below) is declared, never inferred.
* binary: categorical labels mapped to 0/1 via a positive set, or to
  graded values in [0, 1] via an explicit level table.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import MathError, ValidationError


class SatisfiedWhen(enum.Enum):
    AT_OR_ABOVE = "at_or_above"
    BELOW = "below"


@dataclass(frozen=True)
class LinearRule:
    m_min: float
    m_max: float
    xi: int = 1
    clamp: bool = False

    def __post_init__(self):
        if self.xi not in (1, -1):
            raise ValidationError(f"xi must be +1 or -1, got {self.xi}")
        if self.m_max == self.m_min:
            raise MathError(f"degenerate bounds: m_min == m_max == {self.m_min}")

    def to_dict(self) -> dict:
        return {"kind": "linear", "min": self.m_min, "max": self.m_max,
                "xi": self.xi, "clamp": self.clamp}


@dataclass(frozen=True)
class DelimitedRule:
    threshold: float
    satisfied_when: SatisfiedWhen

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise ValidationError("threshold must be finite")

    def to_dict(self) -> dict:
        return {"kind": "delimited", "threshold": self.threshold,
                "satisfied_when": self.satisfied_when.value}


@dataclass(frozen=True)
class BinaryRule:
    positive_labels: frozenset[str] = frozenset()
    levels: dict = field(default_factory=dict)

    def __post_init__(self):
        if bool(self.positive_labels) == bool(self.levels):
            raise ValidationError(
                "binary rule needs exactly one of positive_labels or levels")
        for label, value in self.levels.items():
            if not 0.0 <= value <= 1.0:
                raise ValidationError(
                    f"level {label!r} assigns {value}, outside [0, 1]")

    def to_dict(self) -> dict:
        if self.positive_labels:
            return {"kind": "binary", "positive_labels": sorted(self.positive_labels)}
        return {"kind": "binary", "levels": dict(self.levels)}


NormalizationRule = LinearRule | DelimitedRule | BinaryRule


@dataclass(frozen=True)
class MetricObservation:
    metric_id: str
    raw: float | str
    unit: str = ""


@dataclass(frozen=True)
class NormalizedMetric:
    metric_id: str
    value: float
    rule_applied: NormalizationRule


def normalize_linear(raw: float, m_min: float, m_max: float, xi: int = 1,
                     clamp: bool = False) -> float:
    if m_max == m_min:
        raise MathError(f"degenerate bounds: m_min == m_max == {m_min}")
    if xi not in (1, -1):
        raise ValidationError(f"xi must be +1 or -1, got {xi}")
    value = xi * (raw - m_min) / (m_max - m_min)
    if clamp:
        lo, hi = (0.0, 1.0) if xi == 1 else (-1.0, 0.0)
        value = min(max(value, lo), hi)
    return value + 0.0  # folds -0.0 into 0.0, keeps audits clean


def normalize_delimited(raw: float, threshold: float,
                        satisfied_when: SatisfiedWhen) -> float:
    if satisfied_when is SatisfiedWhen.AT_OR_ABOVE:
        return 1.0 if raw >= threshold else 0.0
    return 1.0 if raw < threshold else 0.0


def normalize_binary(label: str, rule: BinaryRule) -> float:
    if rule.positive_labels:
        return 1.0 if label in rule.positive_labels else 0.0
    if label not in rule.levels:
        raise ValidationError(f"unknown label {label!r} for binary rule")
    return float(rule.levels[label])


def normalize(observation: MetricObservation,
              rule: NormalizationRule) -> NormalizedMetric:
    """Apply the rule to the observation; the rule is recorded for audit."""
    raw = observation.raw
    if isinstance(rule, LinearRule):
        if not isinstance(raw, (int, float)) or isinstance(raw, bool):
            raise ValidationError(
                f"metric {observation.metric_id!r}: linear rule needs a numeric raw value")
        if not math.isfinite(raw):
            raise ValidationError(
                f"metric {observation.metric_id!r}: raw value must be finite")
        value = normalize_linear(raw, rule.m_min, rule.m_max, rule.xi, rule.clamp)
    elif isinstance(rule, DelimitedRule):
        if not isinstance(raw, (int, float)) or isinstance(raw, bool):
            raise ValidationError(
                f"metric {observation.metric_id!r}: delimited rule needs a numeric raw value")
        value = normalize_delimited(raw, rule.threshold, rule.satisfied_when)
    elif isinstance(rule, BinaryRule):
        if not isinstance(raw, str):
            raise ValidationError(
                f"metric {observation.metric_id!r}: binary rule needs a categorical label")
        value = normalize_binary(raw, rule)
    else:
        raise ValidationError(f"unknown rule type {type(rule).__name__}")
    return NormalizedMetric(metric_id=observation.metric_id, value=value,
                            rule_applied=rule)


def rule_from_dict(doc: dict, path: str = "") -> NormalizationRule:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValidationError("rule must be an object with a 'kind'", path)
    kind = doc["kind"]
    keys = doc.keys() - {"kind"}
    if kind == "linear":
        allowed = {"min", "max", "xi", "clamp"}
        if keys - allowed:
            raise ValidationError(f"unknown fields: {sorted(keys - allowed)}", path)
        if "min" not in doc or "max" not in doc:
            raise ValidationError("linear rule needs 'min' and 'max'", path)
        return LinearRule(m_min=float(doc["min"]), m_max=float(doc["max"]),
                          xi=int(doc.get("xi", 1)), clamp=bool(doc.get("clamp", False)))
    if kind == "delimited":
        allowed = {"threshold", "satisfied_when"}
        if keys - allowed:
            raise ValidationError(f"unknown fields: {sorted(keys - allowed)}", path)
        if "threshold" not in doc or "satisfied_when" not in doc:
            raise ValidationError("delimited rule needs 'threshold' and 'satisfied_when'", path)
        try:
            when = SatisfiedWhen(doc["satisfied_when"])
        except ValueError:
            raise ValidationError(
                f"satisfied_when must be 'at_or_above' or 'below', got {doc['satisfied_when']!r}",
                path)
        return DelimitedRule(threshold=float(doc["threshold"]), satisfied_when=when)
    if kind == "binary":
        allowed = {"positive_labels", "levels"}
        if keys - allowed:
            raise ValidationError(f"unknown fields: {sorted(keys - allowed)}", path)
        if "positive_labels" in doc:
            return BinaryRule(positive_labels=frozenset(doc["positive_labels"]))
        if "levels" in doc:
            return BinaryRule(levels={k: float(v) for k, v in doc["levels"].items()})
        raise ValidationError("binary rule needs 'positive_labels' or 'levels'", path)
    raise ValidationError(f"unknown rule kind {kind!r}", path)
