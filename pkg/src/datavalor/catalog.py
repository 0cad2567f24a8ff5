"""Metric catalog: the controlled vocabulary of metrics and KPIs.

Each metric carries its balanced-scorecard perspective, a free-form
cluster label, the correlation direction (which fixes the sign
corrector xi used by linear normalization) and the normalization
scheme that applies to raw observations of it.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

from .errors import NotFoundError, ValidationError

CATALOG_VERSION = "1"


class BscPerspective(enum.Enum):
    FINANCIAL = "Financial"
    CUSTOMER = "Customer"
    INTERNAL_PROCESS = "InternalProcess"
    LEARNING_GROWTH = "LearningGrowth"


class Correlation(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    @property
    def xi(self) -> int:
        return 1 if self is Correlation.POSITIVE else -1


class NormalizationKind(enum.Enum):
    LINEAR = "linear"
    DELIMITED = "delimited"
    BINARY = "binary"


@dataclass(frozen=True)
class MetricDefinition:
    id: str
    name: str
    perspective: BscPerspective
    cluster: str
    description: str
    unit: str
    correlation: Correlation
    normalization_kind: NormalizationKind
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValidationError("metric id must be non-empty")
        if not self.cluster:
            raise ValidationError(f"metric {self.id!r} has an empty cluster")

    @property
    def xi(self) -> int:
        return self.correlation.xi

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "perspective": self.perspective.value,
            "cluster": self.cluster,
            "description": self.description,
            "unit": self.unit,
            "correlation": self.correlation.value,
            "normalization_kind": self.normalization_kind.value,
            "tags": list(self.tags),
        }


@dataclass(frozen=True)
class MetricCatalog:
    version: str
    metrics: tuple[MetricDefinition, ...] = field(default_factory=tuple)

    def __post_init__(self):
        seen: set[str] = set()
        for m in self.metrics:
            if m.id in seen:
                raise ValidationError(f"duplicate metric id {m.id!r}")
            seen.add(m.id)

    def __contains__(self, metric_id: str) -> bool:
        return any(m.id == metric_id for m in self.metrics)

    def __len__(self) -> int:
        return len(self.metrics)

    def get(self, metric_id: str) -> MetricDefinition:
        for m in self.metrics:
            if m.id == metric_id:
                return m
        raise NotFoundError(f"unknown metric {metric_id!r}")

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "metrics": [m.to_dict() for m in self.metrics],
        }


def _parse_enum(cls, value, path: str):
    try:
        return cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in cls)
        raise ValidationError(f"expected one of [{allowed}], got {value!r}", path)


def _metric_from_dict(doc: dict, path: str) -> MetricDefinition:
    if not isinstance(doc, dict):
        raise ValidationError("metric entry must be an object", path)
    required = {"id", "name", "perspective", "cluster", "description",
                "unit", "correlation", "normalization_kind", "tags"}
    missing = required - doc.keys()
    if missing:
        raise ValidationError(f"missing fields: {sorted(missing)}", path)
    unknown = doc.keys() - required
    if unknown:
        raise ValidationError(f"unknown fields: {sorted(unknown)}", path)
    return MetricDefinition(
        id=doc["id"],
        name=doc["name"],
        perspective=_parse_enum(BscPerspective, doc["perspective"], f"{path}/perspective"),
        cluster=doc["cluster"],
        description=doc["description"],
        unit=doc["unit"],
        correlation=_parse_enum(Correlation, doc["correlation"], f"{path}/correlation"),
        normalization_kind=_parse_enum(NormalizationKind, doc["normalization_kind"],
                                       f"{path}/normalization_kind"),
        tags=tuple(doc["tags"]),
    )


def catalog_from_dict(doc: dict) -> MetricCatalog:
    if not isinstance(doc, dict):
        raise ValidationError("catalog document must be an object")
    if "version" not in doc or "metrics" not in doc:
        raise ValidationError("catalog document needs 'version' and 'metrics'")
    if not isinstance(doc["metrics"], list):
        raise ValidationError("'metrics' must be a list", "/metrics")
    metrics = tuple(
        _metric_from_dict(m, f"/metrics/{i}") for i, m in enumerate(doc["metrics"])
    )
    return MetricCatalog(version=str(doc["version"]), metrics=metrics)


def load_catalog(source) -> MetricCatalog:
    """Load a catalog from a dict, a JSON string/path, or an open file."""
    if isinstance(source, MetricCatalog):
        return source
    if isinstance(source, dict):
        return catalog_from_dict(source)
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    return catalog_from_dict(doc)


def save_catalog(catalog: MetricCatalog, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(catalog.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def find_metrics(catalog: MetricCatalog,
                 perspective: BscPerspective | str | None = None,
                 cluster: str | None = None,
                 keyword: str | None = None) -> list[MetricDefinition]:
    """Filter metrics; every provided dimension must match. No filter returns all."""
    if isinstance(perspective, str):
        perspective = _parse_enum(BscPerspective, perspective, "/perspective")
    out = []
    for m in catalog.metrics:
        if perspective is not None and m.perspective is not perspective:
            continue
        if cluster is not None and m.cluster != cluster:
            continue
        if keyword is not None:
            hay = " ".join((m.id, m.name, m.description)).lower()
            if keyword.lower() not in hay:
                continue
        out.append(m)
    return out


_DEFAULT: MetricCatalog | None = None


def default_catalog() -> MetricCatalog:
    """The catalog shipped with the package (cached; immutable)."""
    global _DEFAULT
    if _DEFAULT is None:
        with resources.files("datavalor.data").joinpath("catalog.json").open("r") as fh:
            _DEFAULT = load_catalog(fh)
    return _DEFAULT


def metric_ids(metrics: Iterable[MetricDefinition]) -> list[str]:
    return [m.id for m in metrics]
