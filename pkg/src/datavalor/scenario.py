"""Scenario orchestration: audited end-to-end valuations over documents.

A scenario document binds candidates (observations, rules, cost ledgers,
potential inputs, ICF, temporal correction), domains with targets and
betas, a shared weight map, the driver, and optional screening effects.
Documents are schema-versioned; unknown fields are rejected, never
silently dropped, and validation errors carry JSON-pointer style paths.

Compat mode: metric entries may declare ``compat_m_norm``, the value as
printed in the source assessment the scenario was transcribed from.
When the scenario (or a per-call override) enables ``paper_compat``,
those values replace the engine-computed ones so published figures can
be replayed exactly; differences are surfaced as discrepancy notes in
either mode.
"""

from __future__ import annotations

import copy
import json
import os
import re
import threading
import warnings as _warnings
from dataclasses import dataclass, field

from .errors import NotFoundError, ValidationError
from .normalization import (MetricObservation, NormalizationRule, normalize,
                            rule_from_dict)
from .screening import RecommendationEffects, effects_from_dict
from .valuation import (AlignmentVariant, CapexItem, CostLedger,
                        DomainRelevance, Driver, Duration, GovernanceItem,
                        OpexItem, PotentialInputs, PotentialMode,
                        TemporalCorrection, ValuationComponent,
                        ValuationResult, ValuationWarning, WeightedMetric,
                        aggregate_index, combine_distributed_quality,
                        dataset_potential, dataset_value, format_money,
                        relevance, temporal_correction, utility)

SCHEMA_VERSION = "datavalor/1"

_DRIVER_RANK = {Driver.COST_ONLY: 0, Driver.QUALITY: 1,
                Driver.RELEVANCE: 2, Driver.UTILITY: 3}

ENTRY_SOURCES = ("observation", "prenormalized", "quality_index")


# ------------------------------------------------------------------- types

@dataclass(frozen=True)
class MetricEntry:
    metric_id: str
    source: str
    raw: float | str | None = None
    rule: NormalizationRule | None = None
    m_norm: float | None = None
    compat_m_norm: float | None = None

    def __post_init__(self):
        if self.source not in ENTRY_SOURCES:
            raise ValidationError(
                f"metric {self.metric_id!r}: unknown source {self.source!r}")
        if self.source == "observation" and (self.raw is None or self.rule is None):
            raise ValidationError(
                f"metric {self.metric_id!r}: observation entries need raw and rule")
        if self.source == "prenormalized" and self.m_norm is None:
            raise ValidationError(
                f"metric {self.metric_id!r}: prenormalized entries need m_norm")

    def to_dict(self) -> dict:
        doc: dict = {"metric_id": self.metric_id, "source": self.source}
        if self.source == "observation":
            doc["raw"] = self.raw
            doc["rule"] = self.rule.to_dict()
        elif self.source == "prenormalized":
            doc["m_norm"] = self.m_norm
        if self.compat_m_norm is not None:
            doc["compat_m_norm"] = self.compat_m_norm
        return doc


@dataclass(frozen=True)
class DomainSpec:
    id: str
    beta: float
    targets: dict

    def __post_init__(self):
        if self.beta < 0:
            raise ValidationError(f"domain {self.id!r}: beta must be nonnegative")

    def to_dict(self) -> dict:
        return {"id": self.id, "beta": self.beta, "targets": dict(self.targets)}


@dataclass(frozen=True)
class Candidate:
    id: str
    quality_metrics: tuple[MetricEntry, ...] = ()
    relevance_metrics: tuple[MetricEntry, ...] = ()
    components: tuple[tuple[str, float], ...] | None = None
    cost_ledger: CostLedger | None = None
    potential: PotentialInputs | None = None
    icf: float = 1.0
    temporal: TemporalCorrection | None = None

    def __post_init__(self):
        if self.icf <= 0:
            raise ValidationError(f"candidate {self.id!r}: icf must be positive")
        if self.components is not None:
            if any(f < 0 for _, f in self.components):
                raise ValidationError(
                    f"candidate {self.id!r}: coverage fractions must be nonnegative")


@dataclass(frozen=True)
class Scenario:
    schema: str
    id: str
    description: str
    currency: str
    driver: Driver
    alignment_variant: AlignmentVariant
    paper_compat: bool
    weights: dict
    domains: tuple[DomainSpec, ...]
    candidates: tuple[Candidate, ...]
    screening_effects: RecommendationEffects | None = None

    def candidate(self, candidate_id: str) -> Candidate:
        for c in self.candidates:
            if c.id == candidate_id:
                return c
        raise NotFoundError(f"unknown candidate {candidate_id!r}")

    def domain(self, domain_id: str) -> DomainSpec:
        for d in self.domains:
            if d.id == domain_id:
                return d
        raise NotFoundError(f"unknown domain {domain_id!r}")


# ------------------------------------------------------------ serialization

def _require(doc: dict, keys: set, path: str, optional: set = frozenset()):
    if not isinstance(doc, dict):
        raise ValidationError(f"expected an object, got {type(doc).__name__}", path)
    missing = keys - doc.keys()
    if missing:
        raise ValidationError(f"missing fields: {sorted(missing)}", path)
    unknown = doc.keys() - keys - optional
    if unknown:
        raise ValidationError(f"unknown fields: {sorted(unknown)}", path)


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"expected a number, got {value!r}", path)
    return float(value)


def _entry_from_dict(doc: dict, path: str) -> MetricEntry:
    if not isinstance(doc, dict):
        raise ValidationError("metric entry must be an object", path)
    _require(doc, {"metric_id", "source"}, path,
             optional={"raw", "rule", "m_norm", "compat_m_norm"})
    source = doc["source"]
    rule = None
    if doc.get("rule") is not None:
        rule = rule_from_dict(doc["rule"], f"{path}/rule")
    compat = doc.get("compat_m_norm")
    if compat is not None:
        compat = _number(compat, f"{path}/compat_m_norm")
    m_norm = doc.get("m_norm")
    if m_norm is not None:
        m_norm = _number(m_norm, f"{path}/m_norm")
    try:
        return MetricEntry(metric_id=doc["metric_id"], source=source,
                           raw=doc.get("raw"), rule=rule, m_norm=m_norm,
                           compat_m_norm=compat)
    except ValidationError as exc:
        raise ValidationError(exc.message, path)


def _duration_from_dict(doc: dict, path: str) -> Duration:
    _require(doc, {"value", "unit"}, path)
    return Duration(value=_number(doc["value"], f"{path}/value"), unit=doc["unit"])


def _ledger_from_dict(doc: dict, currency: str, path: str) -> CostLedger:
    _require(doc, set(), path, optional={"capex", "opex", "governance"})
    capex = []
    for i, item in enumerate(doc.get("capex", [])):
        ipath = f"{path}/capex/{i}"
        _require(item, {"label", "purchase_cost", "lifespan", "analysis_period"}, ipath)
        capex.append(CapexItem(
            label=item["label"],
            purchase_cost=_number(item["purchase_cost"], f"{ipath}/purchase_cost"),
            lifespan=_duration_from_dict(item["lifespan"], f"{ipath}/lifespan"),
            analysis_period=_duration_from_dict(item["analysis_period"],
                                                f"{ipath}/analysis_period")))
    opex = []
    for i, item in enumerate(doc.get("opex", [])):
        ipath = f"{path}/opex/{i}"
        _require(item, {"label", "unit_cost", "quantity"}, ipath, optional={"unit"})
        opex.append(OpexItem(
            label=item["label"],
            unit_cost=_number(item["unit_cost"], f"{ipath}/unit_cost"),
            quantity=_number(item["quantity"], f"{ipath}/quantity"),
            unit=item.get("unit", "")))
    governance = []
    for i, item in enumerate(doc.get("governance", [])):
        ipath = f"{path}/governance/{i}"
        _require(item, {"label", "cost"}, ipath)
        governance.append(GovernanceItem(
            label=item["label"], cost=_number(item["cost"], f"{ipath}/cost")))
    return CostLedger(currency=currency, capex=tuple(capex), opex=tuple(opex),
                      governance=tuple(governance))


def _ledger_to_dict(ledger: CostLedger) -> dict:
    return {
        "capex": [{"label": i.label, "purchase_cost": i.purchase_cost,
                   "lifespan": i.lifespan.to_dict(),
                   "analysis_period": i.analysis_period.to_dict()}
                  for i in ledger.capex],
        "opex": [{"label": i.label, "unit_cost": i.unit_cost,
                  "quantity": i.quantity, "unit": i.unit} for i in ledger.opex],
        "governance": [{"label": i.label, "cost": i.cost}
                       for i in ledger.governance],
    }


_POTENTIAL_FIELDS = {
    PotentialMode.DEMAND_PRICE: {"demand", "price"},
    PotentialMode.BOUNDS: {"v_max", "v_min"},
    PotentialMode.MARGIN: {"margin_fraction"},
    PotentialMode.UNIT: set(),
}


def _potential_from_dict(doc: dict, path: str) -> PotentialInputs:
    if "mode" not in doc:
        raise ValidationError("potential needs a mode", path)
    try:
        mode = PotentialMode(doc["mode"])
    except ValueError:
        raise ValidationError(f"unknown potential mode {doc['mode']!r}", f"{path}/mode")
    fields = _POTENTIAL_FIELDS[mode]
    _require(doc, {"mode"} | fields, path)
    kwargs = {f: _number(doc[f], f"{path}/{f}") for f in fields}
    return PotentialInputs(mode=mode, **kwargs)


def _potential_to_dict(potential: PotentialInputs) -> dict:
    doc: dict = {"mode": potential.mode.value}
    for f in _POTENTIAL_FIELDS[potential.mode]:
        doc[f] = getattr(potential, f)
    return doc


def _temporal_from_dict(doc: dict, path: str) -> TemporalCorrection:
    if "mode" not in doc:
        raise ValidationError("temporal correction needs a mode", path)
    if doc["mode"] == "processing_ratio":
        _require(doc, {"mode", "t_p", "t_a"}, path)
        return TemporalCorrection(
            mode="processing_ratio",
            t_p=_duration_from_dict(doc["t_p"], f"{path}/t_p"),
            t_a=_duration_from_dict(doc["t_a"], f"{path}/t_a"))
    if doc["mode"] == "fixed":
        _require(doc, {"mode", "increment"}, path)
        return TemporalCorrection(mode="fixed",
                                  increment=_number(doc["increment"],
                                                    f"{path}/increment"))
    raise ValidationError(f"unknown temporal mode {doc['mode']!r}", f"{path}/mode")


def _candidate_from_dict(doc: dict, currency: str, path: str) -> Candidate:
    _require(doc, {"id", "quality_metrics", "relevance_metrics", "potential",
                   "icf", "temporal"}, path,
             optional={"components", "cost_ledger"})
    quality = tuple(_entry_from_dict(e, f"{path}/quality_metrics/{i}")
                    for i, e in enumerate(doc["quality_metrics"]))
    rel = tuple(_entry_from_dict(e, f"{path}/relevance_metrics/{i}")
                for i, e in enumerate(doc["relevance_metrics"]))
    components = None
    if doc.get("components") is not None:
        components = []
        for i, comp in enumerate(doc["components"]):
            cpath = f"{path}/components/{i}"
            _require(comp, {"candidate_id", "fraction"}, cpath)
            components.append((comp["candidate_id"],
                               _number(comp["fraction"], f"{cpath}/fraction")))
        components = tuple(components)
    ledger = None
    if doc.get("cost_ledger") is not None:
        ledger = _ledger_from_dict(doc["cost_ledger"], currency, f"{path}/cost_ledger")
    potential = None
    if doc["potential"] is not None:
        potential = _potential_from_dict(doc["potential"], f"{path}/potential")
    try:
        return Candidate(
            id=doc["id"], quality_metrics=quality, relevance_metrics=rel,
            components=components, cost_ledger=ledger, potential=potential,
            icf=_number(doc["icf"], f"{path}/icf"),
            temporal=_temporal_from_dict(doc["temporal"], f"{path}/temporal"))
    except ValidationError as exc:
        if exc.path:
            raise
        raise ValidationError(exc.message, path)


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError("scenario document must be an object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported schema {doc.get('schema')!r}, expected {SCHEMA_VERSION!r}",
            "/schema")
    _require(doc, {"schema", "id", "description", "currency", "driver",
                   "alignment_variant", "paper_compat", "weights", "domains",
                   "candidates"}, "", optional={"screening_effects"})
    try:
        driver = Driver(doc["driver"])
    except ValueError:
        raise ValidationError(f"unknown driver {doc['driver']!r}", "/driver")
    try:
        variant = AlignmentVariant(doc["alignment_variant"])
    except ValueError:
        raise ValidationError(f"unknown alignment variant {doc['alignment_variant']!r}",
                              "/alignment_variant")
    if not isinstance(doc["weights"], dict):
        raise ValidationError("weights must be a metric-to-number map", "/weights")
    weights = {}
    for mid, w in doc["weights"].items():
        w = _number(w, f"/weights/{mid}")
        if w < 0:
            raise ValidationError("weights must be nonnegative", f"/weights/{mid}")
        weights[mid] = w

    domains = []
    seen_domains = set()
    for i, ddoc in enumerate(doc["domains"]):
        dpath = f"/domains/{i}"
        _require(ddoc, {"id", "beta", "targets"}, dpath)
        if ddoc["id"] in seen_domains:
            raise ValidationError(f"duplicate domain id {ddoc['id']!r}", dpath)
        seen_domains.add(ddoc["id"])
        targets = {mid: _number(v, f"{dpath}/targets/{mid}")
                   for mid, v in ddoc["targets"].items()}
        domains.append(DomainSpec(id=ddoc["id"],
                                  beta=_number(ddoc["beta"], f"{dpath}/beta"),
                                  targets=targets))

    candidates = []
    seen = set()
    for i, cdoc in enumerate(doc["candidates"]):
        cpath = f"/candidates/{i}"
        candidate = _candidate_from_dict(cdoc, doc["currency"], cpath)
        if candidate.id in seen:
            raise ValidationError(f"duplicate candidate id {candidate.id!r}", cpath)
        seen.add(candidate.id)
        candidates.append(candidate)

    by_id = {c.id for c in candidates}
    for i, c in enumerate(candidates):
        if c.components is None:
            if c.potential is None:
                raise ValidationError("candidate needs potential inputs",
                                      f"/candidates/{i}/potential")
            continue
        for cid, _fraction in c.components:
            if cid not in by_id:
                raise ValidationError(f"component references unknown candidate {cid!r}",
                                      f"/candidates/{i}/components")
            if cid == c.id:
                raise ValidationError("candidate cannot be its own component",
                                      f"/candidates/{i}/components")

    effects = None
    if doc.get("screening_effects") is not None:
        effects = effects_from_dict(doc["screening_effects"], "/screening_effects")

    if driver is Driver.RELEVANCE and len(domains) != 1:
        raise ValidationError(
            "relevance driver needs exactly one domain; use utility for several",
            "/domains")
    if driver is Driver.UTILITY and not domains:
        raise ValidationError("utility driver needs at least one domain", "/domains")

    return Scenario(schema=doc["schema"], id=doc["id"],
                    description=doc["description"], currency=doc["currency"],
                    driver=driver, alignment_variant=variant,
                    paper_compat=bool(doc["paper_compat"]), weights=weights,
                    domains=tuple(domains), candidates=tuple(candidates),
                    screening_effects=effects)


def scenario_to_dict(scenario: Scenario) -> dict:
    def candidate_doc(c: Candidate) -> dict:
        doc: dict = {
            "id": c.id,
            "quality_metrics": [e.to_dict() for e in c.quality_metrics],
            "relevance_metrics": [e.to_dict() for e in c.relevance_metrics],
        }
        if c.components is not None:
            doc["components"] = [{"candidate_id": cid, "fraction": f}
                                 for cid, f in c.components]
        if c.cost_ledger is not None:
            doc["cost_ledger"] = _ledger_to_dict(c.cost_ledger)
        doc["potential"] = (_potential_to_dict(c.potential)
                            if c.potential is not None else None)
        doc["icf"] = c.icf
        doc["temporal"] = c.temporal.to_dict()
        return doc

    doc = {
        "schema": scenario.schema,
        "id": scenario.id,
        "description": scenario.description,
        "currency": scenario.currency,
        "driver": scenario.driver.value,
        "alignment_variant": scenario.alignment_variant.value,
        "paper_compat": scenario.paper_compat,
        "weights": dict(scenario.weights),
        "domains": [d.to_dict() for d in scenario.domains],
        "candidates": [candidate_doc(c) for c in scenario.candidates],
    }
    if scenario.screening_effects is not None:
        doc["screening_effects"] = scenario.screening_effects.to_dict()
    return doc


def load_scenario(source) -> Scenario:
    if isinstance(source, dict):
        return scenario_from_dict(source)
    if hasattr(source, "read"):
        return scenario_from_dict(json.load(source))
    with open(source, "r", encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(scenario: Scenario, target) -> None:
    doc = scenario_to_dict(scenario)
    if hasattr(target, "write"):
        json.dump(doc, target, indent=2)
        target.write("\n")
        return
    with open(target, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def packaged_scenario(name: str) -> Scenario:
    from importlib import resources
    ref = resources.files("datavalor.data").joinpath("scenarios").joinpath(f"{name}.json")
    with ref.open("r") as fh:
        return load_scenario(fh)


# --------------------------------------------------------------- the engine

def _weight_for(scenario: Scenario, metric_id: str) -> float:
    if metric_id not in scenario.weights:
        raise ValidationError(f"no weight declared for metric {metric_id!r}",
                              f"/weights/{metric_id}")
    return scenario.weights[metric_id]


def _resolve_entry(entry: MetricEntry, quality_value: float | None,
                   compat: bool, candidate_id: str, notes: list[str]) -> dict:
    """Engine m_norm for one entry plus its audit record."""
    if entry.source == "observation":
        normalized = normalize(MetricObservation(entry.metric_id, entry.raw),
                               entry.rule)
        engine_value = normalized.value
    elif entry.source == "prenormalized":
        engine_value = entry.m_norm
    else:  # quality_index proxy
        if quality_value is None:
            raise ValidationError(
                f"candidate {candidate_id!r}: metric {entry.metric_id!r} proxies "
                "the quality index, but no quality index is computable")
        engine_value = quality_value

    value = engine_value
    if entry.compat_m_norm is not None and entry.compat_m_norm != engine_value:
        if compat:
            value = entry.compat_m_norm
        notes.append(
            f"candidate {candidate_id}: metric {entry.metric_id} computes to "
            f"{engine_value:.6g} but the source assessment carries "
            f"{entry.compat_m_norm:.6g}; using "
            f"{'the carried value (compat mode)' if compat else 'the computed value'}")
    record = {"metric_id": entry.metric_id, "source": entry.source,
              "m_norm": value}
    if entry.source == "observation":
        record["raw"] = entry.raw
        record["rule"] = entry.rule.to_dict()
    if entry.compat_m_norm is not None:
        record["compat_m_norm"] = entry.compat_m_norm
        record["engine_m_norm"] = engine_value
    return record


def _quality_stage(scenario: Scenario, candidate: Candidate, compat: bool,
                   notes: list[str], warnings_out: list[str]) -> tuple[float | None, dict | None]:
    if candidate.components is not None:
        parts = []
        part_docs = []
        for cid, fraction in candidate.components:
            sub = scenario.candidate(cid)
            if sub.components is not None:
                raise ValidationError(
                    f"candidate {candidate.id!r}: nested distributed component {cid!r}")
            sub_value, _ = _quality_stage(scenario, sub, compat, notes, warnings_out)
            if sub_value is None:
                raise ValidationError(
                    f"candidate {candidate.id!r}: component {cid!r} has no quality index")
            parts.append((sub_value, fraction))
            part_docs.append({"candidate_id": cid, "index": sub_value,
                              "fraction": fraction})
        value = combine_distributed_quality(parts)
        return value, {"value": value, "combined_from": part_docs, "metrics": []}

    if not candidate.quality_metrics:
        return None, None

    records = []
    weighted = []
    for entry in candidate.quality_metrics:
        record = _resolve_entry(entry, None, compat, candidate.id, notes)
        w = _weight_for(scenario, entry.metric_id)
        record["w_m"] = w
        records.append(record)
        weighted.append(WeightedMetric(metric_id=entry.metric_id,
                                       m_norm=record["m_norm"], w_m=w))
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always", ValuationWarning)
        index = aggregate_index(weighted, concept="quality")
    warnings_out.extend(str(w.message) for w in caught)
    return index.value, {"value": index.value, "combined_from": None,
                         "metrics": records}


def _relevance_stage(scenario: Scenario, candidate: Candidate,
                     quality_value: float | None, compat: bool,
                     notes: list[str], warnings_out: list[str]) -> list[dict]:
    if not candidate.relevance_metrics or not scenario.domains:
        return []
    resolved = []
    for entry in candidate.relevance_metrics:
        record = _resolve_entry(entry, quality_value, compat, candidate.id, notes)
        record["w_m"] = _weight_for(scenario, entry.metric_id)
        resolved.append(record)

    domain_docs = []
    for domain in scenario.domains:
        weighted = []
        for record in resolved:
            mid = record["metric_id"]
            if mid not in domain.targets:
                raise ValidationError(
                    f"domain {domain.id!r} declares no target for metric {mid!r}",
                    f"/domains/{domain.id}/targets/{mid}")
            weighted.append(WeightedMetric(metric_id=mid, m_norm=record["m_norm"],
                                           w_m=record["w_m"],
                                           m_target=domain.targets[mid]))
        with _warnings.catch_warnings(record=True) as caught:
            _warnings.simplefilter("always", ValuationWarning)
            dom = relevance(weighted, scenario.alignment_variant,
                            domain_id=domain.id, beta=domain.beta)
        warnings_out.extend(str(w.message) for w in caught)
        domain_docs.append({
            "id": domain.id,
            "beta": domain.beta,
            "relevance": dom.relevance,
            "terms": [{"metric_id": t.metric_id, "m_norm": t.m_norm,
                       "m_target": t.m_target, "w_m": t.w_m, "f": t.f,
                       "term": t.term} for t in dom.terms],
        })
    return domain_docs


def _check_driver(scenario: Scenario, notes: list[str]) -> None:
    effects = scenario.screening_effects
    if effects is None:
        return
    if effects.main_driver is not None:
        effects_rank = _DRIVER_RANK[Driver(effects.main_driver)]
        effects_name = effects.main_driver
    elif effects.cost_only:
        effects_rank = _DRIVER_RANK[Driver.COST_ONLY]
        effects_name = Driver.COST_ONLY.value
    else:
        return
    scenario_rank = _DRIVER_RANK[scenario.driver]
    if scenario_rank < effects_rank:
        raise ValidationError(
            f"scenario driver {scenario.driver.value!r} is below the screening "
            f"driver {effects_name!r}; downgrading the driver loses screening "
            "requirements", "/driver")
    if scenario_rank > effects_rank:
        notes.append(f"driver upgraded to {scenario.driver.value} over the "
                     f"screening recommendation {effects_name}")


def _component_values(scenario: Scenario, candidate: Candidate,
                      notes: list[str]) -> tuple[list[ValuationComponent], dict]:
    """Val components: the candidate's own potential, or its parts' potentials."""
    if candidate.potential is not None:
        inputs = PotentialInputs(
            mode=candidate.potential.mode, demand=candidate.potential.demand,
            price=candidate.potential.price, v_max=candidate.potential.v_max,
            v_min=candidate.potential.v_min,
            margin_fraction=candidate.potential.margin_fraction,
            costs=candidate.cost_ledger)
        val = dataset_potential(inputs)
        doc = _potential_to_dict(candidate.potential)
        doc["val"] = val
        return [ValuationComponent(component_id=candidate.id, val=val,
                                   icf=candidate.icf)], doc

    # Distributed contracts: each component contributes its own Val and ICF.
    parts = []
    part_docs = []
    for cid, _fraction in candidate.components:
        sub = scenario.candidate(cid)
        if sub.potential is None:
            raise ValidationError(
                f"candidate {candidate.id!r}: component {cid!r} has no potential inputs")
        sub_inputs = PotentialInputs(
            mode=sub.potential.mode, demand=sub.potential.demand,
            price=sub.potential.price, v_max=sub.potential.v_max,
            v_min=sub.potential.v_min,
            margin_fraction=sub.potential.margin_fraction,
            costs=sub.cost_ledger)
        val = dataset_potential(sub_inputs)
        parts.append(ValuationComponent(component_id=cid, val=val, icf=sub.icf))
        part_docs.append({"component_id": cid, "val": val, "icf": sub.icf})
    notes.append(f"candidate {candidate.id}: no own potential inputs; "
                 "summing component potentials")
    return parts, {"mode": "components", "parts": part_docs, "val": None}


def run_valuation(scenario: Scenario, candidate_id: str,
                  paper_compat: bool | None = None) -> ValuationResult:
    """Execute the full audited chain for one candidate."""
    compat = scenario.paper_compat if paper_compat is None else paper_compat
    candidate = scenario.candidate(candidate_id)
    notes: list[str] = []
    warnings_out: list[str] = []

    _check_driver(scenario, notes)
    effects = scenario.screening_effects

    quality_value, quality_doc = _quality_stage(scenario, candidate, compat,
                                                notes, warnings_out)

    domain_docs: list[dict] = []
    utility_value = None
    relevance_value = None
    if scenario.driver in (Driver.RELEVANCE, Driver.UTILITY):
        domain_docs = _relevance_stage(scenario, candidate, quality_value,
                                       compat, notes, warnings_out)
        if not domain_docs:
            raise ValidationError(
                f"candidate {candidate_id!r} has no relevance metrics for "
                f"driver {scenario.driver.value!r}")
        if scenario.driver is Driver.RELEVANCE:
            relevance_value = domain_docs[0]["relevance"]
        else:
            with _warnings.catch_warnings(record=True) as caught:
                _warnings.simplefilter("always", ValuationWarning)
                utility_value = utility([
                    DomainRelevance(domain_id=d["id"], relevance=d["relevance"],
                                    beta=d["beta"],
                                    alignment_variant=scenario.alignment_variant)
                    for d in domain_docs])
            warnings_out.extend(str(w.message) for w in caught)

    if scenario.driver is Driver.QUALITY:
        if quality_value is None:
            raise ValidationError(
                f"candidate {candidate_id!r} has no quality metrics for the "
                "quality driver")
        qru = quality_value
    elif scenario.driver is Driver.RELEVANCE:
        qru = relevance_value
    elif scenario.driver is Driver.UTILITY:
        qru = utility_value
    else:
        qru = 1.0

    ledger = candidate.cost_ledger or CostLedger(currency=scenario.currency)
    costs_doc = ledger.breakdown()

    components, potential_doc = _component_values(scenario, candidate, notes)

    if effects is not None:
        if effects.demand_required and (
                candidate.potential is None
                or candidate.potential.mode is not PotentialMode.DEMAND_PRICE):
            notes.append(f"candidate {candidate.id}: screening calls for demand "
                         "estimation but the potential inputs use "
                         f"{potential_doc['mode']}")
        if effects.icf_rule == "one_time" and candidate.icf != 1.0:
            notes.append(f"candidate {candidate.id}: screening pins ICF = 1 "
                         f"(one-time sale) but icf is {candidate.icf}")

    v_p = temporal_correction(candidate.temporal)

    result = dataset_value(qru, components, v_p, driver=scenario.driver)

    audit = {
        "schema": SCHEMA_VERSION,
        "scenario_id": scenario.id,
        "candidate_id": candidate.id,
        "driver": scenario.driver.value,
        "alignment_variant": scenario.alignment_variant.value,
        "paper_compat": compat,
        "quality": quality_doc,
        "domains": domain_docs,
        "utility": utility_value,
        "qru": qru,
        "costs": costs_doc,
        "potential": potential_doc,
        "icf": candidate.icf,
        "v_p": v_p,
        "components": [c.to_dict() for c in result.components],
        "value": result.value,
        "warnings": warnings_out,
        "discrepancy_notes": notes,
    }
    return ValuationResult(driver=result.driver, qru=result.qru,
                           components=result.components, v_p=result.v_p,
                           value=result.value, audit=audit)


# ------------------------------------------------------------------ compare

@dataclass(frozen=True)
class RankedCandidate:
    candidate_id: str
    value: float
    qru: float
    total_cost: float

    def to_dict(self, currency: str = "") -> dict:
        return {"candidate_id": self.candidate_id, "value": self.value,
                "qru": self.qru, "total_cost": self.total_cost,
                "value_display": format_money(self.value, currency)}


@dataclass(frozen=True)
class ComparisonReport:
    scenario_id: str
    currency: str
    ranked: tuple[RankedCandidate, ...]
    winner: str
    discrepancy_notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "currency": self.currency,
            "ranked": [r.to_dict(self.currency) for r in self.ranked],
            "winner": self.winner,
            "discrepancy_notes": list(self.discrepancy_notes),
        }


def rank_results(scenario: Scenario,
                 results: dict[str, ValuationResult]) -> ComparisonReport:
    drivers = {r.driver for r in results.values()}
    if len(drivers) > 1:
        raise ValidationError(
            f"cannot compare candidates valued under different drivers: "
            f"{sorted(d.value for d in drivers)}")
    entries = []
    notes: list[str] = []
    for cid, result in results.items():
        total_cost = result.audit.get("costs", {}).get("total", 0.0)
        entries.append(RankedCandidate(candidate_id=cid, value=result.value,
                                       qru=result.qru, total_cost=total_cost))
        notes.extend(result.audit.get("discrepancy_notes", []))
    # Higher value wins; ties prefer the cheaper candidate, then the id.
    entries.sort(key=lambda e: (-e.value, e.total_cost, e.candidate_id))
    return ComparisonReport(scenario_id=scenario.id, currency=scenario.currency,
                            ranked=tuple(entries), winner=entries[0].candidate_id,
                            discrepancy_notes=tuple(dict.fromkeys(notes)))


def compare(scenario: Scenario, paper_compat: bool | None = None) -> ComparisonReport:
    if len(scenario.candidates) < 2:
        raise ValidationError("comparison needs at least two candidates")
    results = {c.id: run_valuation(scenario, c.id, paper_compat)
               for c in scenario.candidates}
    return rank_results(scenario, results)


# ------------------------------------------------------------------ what-if

_OVERRIDE_KEYS = {"targets", "weights", "icf", "beta", "bounds", "margin",
                  "temporal"}


def _apply_overrides(doc: dict, candidate_id: str, overrides: dict) -> None:
    unknown = overrides.keys() - _OVERRIDE_KEYS
    if unknown:
        raise ValidationError(f"unknown override keys: {sorted(unknown)}")

    domains = {d["id"]: d for d in doc["domains"]}
    candidates = {c["id"]: c for c in doc["candidates"]}
    target = candidates.get(candidate_id)
    if target is None:
        raise NotFoundError(f"unknown candidate {candidate_id!r}")

    for domain_id, targets in overrides.get("targets", {}).items():
        if domain_id not in domains:
            raise ValidationError(f"override references unknown domain {domain_id!r}",
                                  "/targets")
        for mid, value in targets.items():
            if mid not in domains[domain_id]["targets"]:
                raise ValidationError(
                    f"domain {domain_id!r} has no existing target for {mid!r}",
                    f"/targets/{domain_id}/{mid}")
            domains[domain_id]["targets"][mid] = value

    for mid, value in overrides.get("weights", {}).items():
        if mid not in doc["weights"]:
            raise ValidationError(f"no existing weight for metric {mid!r}",
                                  f"/weights/{mid}")
        doc["weights"][mid] = value

    for domain_id, value in overrides.get("beta", {}).items():
        if domain_id not in domains:
            raise ValidationError(f"override references unknown domain {domain_id!r}",
                                  "/beta")
        domains[domain_id]["beta"] = value

    if "icf" in overrides:
        target["icf"] = overrides["icf"]

    if "bounds" in overrides:
        potential = target.get("potential") or {}
        if potential.get("mode") != "bounds":
            raise ValidationError(
                f"candidate {candidate_id!r} does not use bounds potential", "/bounds")
        bounds = overrides["bounds"]
        extra = bounds.keys() - {"v_max", "v_min"}
        if extra:
            raise ValidationError(f"unknown bounds fields: {sorted(extra)}", "/bounds")
        potential.update(bounds)

    if "margin" in overrides:
        potential = target.get("potential") or {}
        if potential.get("mode") != "margin":
            raise ValidationError(
                f"candidate {candidate_id!r} does not use margin potential", "/margin")
        potential["margin_fraction"] = overrides["margin"]

    if "temporal" in overrides:
        target["temporal"] = overrides["temporal"]


_DELTA_STAGES = ("qru", "utility", "v_p", "icf", "value")


@dataclass(frozen=True)
class WhatIfReport:
    candidate_id: str
    before: ValuationResult
    after: ValuationResult
    deltas: dict
    overrides: dict

    def to_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "deltas": self.deltas,
            "overrides": self.overrides,
        }


def _stage_deltas(before: dict, after: dict) -> dict:
    deltas: dict = {}
    for stage in _DELTA_STAGES:
        b, a = before.get(stage), after.get(stage)
        if isinstance(b, (int, float)) and isinstance(a, (int, float)):
            deltas[stage] = a - b
    bq, aq = before.get("quality"), after.get("quality")
    if bq and aq:
        deltas["quality"] = aq["value"] - bq["value"]
    b_rel = {d["id"]: d["relevance"] for d in before.get("domains", [])}
    a_rel = {d["id"]: d["relevance"] for d in after.get("domains", [])}
    common = {k: a_rel[k] - b_rel[k] for k in b_rel if k in a_rel}
    if common:
        deltas["relevance"] = common
    b_costs = before.get("costs", {}).get("total")
    a_costs = after.get("costs", {}).get("total")
    if b_costs is not None and a_costs is not None:
        deltas["costs"] = a_costs - b_costs
    return deltas


def what_if(scenario: Scenario, candidate_id: str, overrides: dict,
            paper_compat: bool | None = None) -> WhatIfReport:
    """Before/after valuation under overrides; the input scenario is untouched."""
    before = run_valuation(scenario, candidate_id, paper_compat)
    doc = copy.deepcopy(scenario_to_dict(scenario))
    _apply_overrides(doc, candidate_id, copy.deepcopy(overrides))
    modified = scenario_from_dict(doc)
    after = run_valuation(modified, candidate_id, paper_compat)
    return WhatIfReport(candidate_id=candidate_id, before=before, after=after,
                        deltas=_stage_deltas(before.audit, after.audit),
                        overrides=overrides)


# -------------------------------------------------------------------- store

_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class ScenarioStore:
    """File-backed scenario persistence; writes are serialized per id."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, scenario_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(scenario_id, threading.Lock())

    def _path(self, scenario_id: str) -> str:
        if not _ID_PATTERN.match(scenario_id):
            raise ValidationError(f"invalid scenario id {scenario_id!r}")
        return os.path.join(self.root, f"{scenario_id}.json")

    def save(self, scenario: Scenario) -> None:
        path = self._path(scenario.id)
        with self._lock(scenario.id):
            tmp = f"{path}.tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(scenario_to_dict(scenario), fh, indent=2)
                fh.write("\n")
            os.replace(tmp, path)

    def load(self, scenario_id: str) -> Scenario:
        path = self._path(scenario_id)
        if not os.path.exists(path):
            raise NotFoundError(f"unknown scenario {scenario_id!r}")
        with self._lock(scenario_id):
            with open(path, "r", encoding="utf-8") as fh:
                return scenario_from_dict(json.load(fh))

    def list(self) -> list[str]:
        return sorted(name[:-5] for name in os.listdir(self.root)
                      if name.endswith(".json"))

    def exists(self, scenario_id: str) -> bool:
        return os.path.exists(self._path(scenario_id))
