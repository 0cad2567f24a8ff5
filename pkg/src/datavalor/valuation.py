"""Step III algebra: indexes, alignment, relevance, utility, costs, value.

The chain is I_q = sum(m_norm * w_m), R_G = sum(w_m * f(m_norm, m_target)),
U = sum(beta_G * R_G), Val from one of four potential modes, V_p from the
temporal correction, and finally V = QRU * sum(Val * ICF) / V_p where QRU
is whichever driver index the screening selected.

Weight sums are deliberately not enforced: quality weights may sum below 1
when sub-weights are folded into a composite term, and domain betas may sum
above 1 when each domain represents a full market opportunity. Both cases
emit ValuationWarning rather than failing.
"""

from __future__ import annotations

import enum
import math
import warnings as _warnings
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal

from .errors import MathError, ValidationError


class ValuationWarning(UserWarning):
    """Non-fatal modelling lint (weight sums, beta totals, mode fallbacks)."""


class Driver(enum.Enum):
    QUALITY = "quality"
    RELEVANCE = "relevance"
    UTILITY = "utility"
    COST_ONLY = "cost_only"


class AlignmentVariant(enum.Enum):
    RATIO = "ratio"
    RECIPROCAL = "reciprocal"
    EXPONENTIAL = "exponential"


# ---------------------------------------------------------------- indexes

@dataclass(frozen=True)
class WeightedMetric:
    metric_id: str
    m_norm: float
    w_m: float
    m_target: float | None = None

    def __post_init__(self):
        if self.w_m < 0:
            raise ValidationError(f"metric {self.metric_id!r}: w_m must be nonnegative")


@dataclass(frozen=True)
class IndexValue:
    concept: str
    value: float
    contributing_metric_ids: tuple[str, ...]


def aggregate_index(metrics: list[WeightedMetric], concept: str = "quality") -> IndexValue:
    if not metrics:
        raise ValidationError("cannot aggregate an empty metric list")
    total_w = sum(m.w_m for m in metrics)
    if abs(total_w - 1.0) > 1e-9:
        _warnings.warn(f"{concept} index weights sum to {total_w:g}, not 1",
                       ValuationWarning, stacklevel=2)
    value = sum(m.m_norm * m.w_m for m in metrics)
    return IndexValue(concept=concept, value=value,
                      contributing_metric_ids=tuple(m.metric_id for m in metrics))


# -------------------------------------------------------------- alignment

def alignment(m_norm: float, m_target: float, variant: AlignmentVariant,
              strict_zero_target: bool = False) -> float:
    """How closely m_norm meets m_target; 1 at the target for every variant.

    The ratio variant keeps the piecewise sign handling: m/t for positive
    targets, t/m when the target is negative (worse-than-target costs score
    below 1), and the raw metric itself at target 0. strict_zero_target
    switches the target-0 case to the sign function |m|/m, which is the
    literal piecewise definition; the default follows the worked semantics.
    """
    if variant is AlignmentVariant.RECIPROCAL:
        return 1.0 / (1.0 + abs(m_norm - m_target))
    if variant is AlignmentVariant.EXPONENTIAL:
        return math.exp(-abs(m_norm - m_target))
    if variant is not AlignmentVariant.RATIO:
        raise ValidationError(f"unknown alignment variant {variant!r}")

    if m_target > 0:
        return m_norm / m_target
    if m_target == 0:
        if strict_zero_target:
            if m_norm == 0:
                raise MathError("ratio alignment undefined: |m|/m at m_norm = 0")
            return abs(m_norm) / m_norm
        return m_norm
    # Negative target: alignment is target-over-metric so that overshooting
    # a cost target scores below 1.
    if m_norm == 0:
        raise MathError("ratio alignment undefined: negative target with m_norm = 0")
    return m_target / m_norm


# -------------------------------------------------------------- relevance

@dataclass(frozen=True)
class AlignmentTerm:
    metric_id: str
    m_norm: float
    m_target: float
    w_m: float
    f: float

    @property
    def term(self) -> float:
        return self.w_m * self.f


@dataclass(frozen=True)
class DomainRelevance:
    domain_id: str
    relevance: float
    beta: float
    alignment_variant: AlignmentVariant
    terms: tuple[AlignmentTerm, ...] = ()

    def __post_init__(self):
        if self.beta < 0:
            raise ValidationError(f"domain {self.domain_id!r}: beta must be nonnegative")


def relevance(metrics: list[WeightedMetric], variant: AlignmentVariant,
              domain_id: str = "", beta: float = 1.0,
              strict_zero_target: bool = False) -> DomainRelevance:
    if not metrics:
        raise ValidationError("cannot compute relevance over an empty metric list")
    total_w = sum(m.w_m for m in metrics)
    if abs(total_w - 1.0) > 1e-9:
        _warnings.warn(f"relevance weights for domain {domain_id!r} sum to "
                       f"{total_w:g}, not 1", ValuationWarning, stacklevel=2)
    terms = []
    for m in metrics:
        if m.m_target is None:
            raise ValidationError(
                f"metric {m.metric_id!r} has no target for domain {domain_id!r}")
        try:
            f = alignment(m.m_norm, m.m_target, variant, strict_zero_target)
        except MathError as exc:
            raise MathError(f"metric {m.metric_id!r} in domain {domain_id!r}: {exc}")
        terms.append(AlignmentTerm(metric_id=m.metric_id, m_norm=m.m_norm,
                                   m_target=m.m_target, w_m=m.w_m, f=f))
    value = sum(t.term for t in terms)
    return DomainRelevance(domain_id=domain_id, relevance=value, beta=beta,
                           alignment_variant=variant, terms=tuple(terms))


def utility(relevances: list[DomainRelevance]) -> float:
    if not relevances:
        raise ValidationError("utility needs at least one domain relevance")
    total_beta = sum(r.beta for r in relevances)
    if total_beta > 1.0 + 1e-9:
        _warnings.warn(f"domain betas sum to {total_beta:g} (> 1); utility scales "
                       "with the number of domains", ValuationWarning, stacklevel=2)
    return sum(r.beta * r.relevance for r in relevances)


# ------------------------------------------------------------------ costs

_UNIT_DAYS = {"day": 1.0, "week": 7.0, "month": 365.25 / 12.0, "year": 365.25}


@dataclass(frozen=True)
class Duration:
    value: float
    unit: str

    def __post_init__(self):
        unit = self.unit.rstrip("s")
        if unit not in _UNIT_DAYS:
            raise ValidationError(f"unknown duration unit {self.unit!r}")
        object.__setattr__(self, "unit", unit)

    @property
    def days(self) -> float:
        return self.value * _UNIT_DAYS[self.unit]

    def to_dict(self) -> dict:
        return {"value": self.value, "unit": self.unit}


@dataclass(frozen=True)
class CapexItem:
    label: str
    purchase_cost: float
    lifespan: Duration
    analysis_period: Duration

    def __post_init__(self):
        if self.purchase_cost < 0:
            raise ValidationError(f"capex {self.label!r}: cost must be nonnegative")
        if self.lifespan.days <= 0:
            raise ValidationError(f"capex {self.label!r}: lifespan must be positive")
        if self.analysis_period.days < 0:
            raise ValidationError(f"capex {self.label!r}: analysis period must be nonnegative")

    @property
    def prorated(self) -> float:
        # Straight-line proration of the purchase over its lifespan.
        return self.purchase_cost / self.lifespan.days * self.analysis_period.days


@dataclass(frozen=True)
class OpexItem:
    label: str
    unit_cost: float
    quantity: float
    unit: str = ""

    def __post_init__(self):
        if self.unit_cost < 0 or self.quantity < 0:
            raise ValidationError(f"opex {self.label!r}: entries must be nonnegative")

    @property
    def cost(self) -> float:
        return self.unit_cost * self.quantity


@dataclass(frozen=True)
class GovernanceItem:
    label: str
    cost: float

    def __post_init__(self):
        if self.cost < 0:
            raise ValidationError(f"governance {self.label!r}: cost must be nonnegative")


@dataclass(frozen=True)
class CostLedger:
    currency: str = "EUR"
    capex: tuple[CapexItem, ...] = ()
    opex: tuple[OpexItem, ...] = ()
    governance: tuple[GovernanceItem, ...] = ()

    def total(self) -> float:
        return (sum(item.prorated for item in self.capex)
                + sum(item.cost for item in self.opex)
                + sum(item.cost for item in self.governance))

    def breakdown(self) -> dict:
        return {
            "currency": self.currency,
            "capex": [{"label": i.label, "purchase_cost": i.purchase_cost,
                       "lifespan": i.lifespan.to_dict(),
                       "analysis_period": i.analysis_period.to_dict(),
                       "prorated": i.prorated} for i in self.capex],
            "opex": [{"label": i.label, "unit_cost": i.unit_cost,
                      "quantity": i.quantity, "unit": i.unit,
                      "cost": i.cost} for i in self.opex],
            "governance": [{"label": i.label, "cost": i.cost}
                           for i in self.governance],
            "total": self.total(),
        }


def total_costs(ledger: CostLedger) -> float:
    return ledger.total()


def combine_distributed_costs(parts: list[CostLedger]) -> CostLedger:
    """Concatenate component ledgers; no cost sharing is ever inferred."""
    if not parts:
        raise ValidationError("cannot combine an empty ledger list")
    currencies = {p.currency for p in parts}
    if len(currencies) > 1:
        raise ValidationError(f"mixed currencies in distributed costs: {sorted(currencies)}")
    return CostLedger(
        currency=parts[0].currency,
        capex=tuple(i for p in parts for i in p.capex),
        opex=tuple(i for p in parts for i in p.opex),
        governance=tuple(i for p in parts for i in p.governance),
    )


# -------------------------------------------------------------- potential

class PotentialMode(enum.Enum):
    DEMAND_PRICE = "demand_price"
    BOUNDS = "bounds"
    MARGIN = "margin"
    UNIT = "unit"


@dataclass(frozen=True)
class PotentialInputs:
    mode: PotentialMode
    demand: float | None = None
    price: float | None = None
    v_max: float | None = None
    v_min: float | None = None
    margin_fraction: float | None = None
    costs: CostLedger | None = None


def dataset_potential(inputs: PotentialInputs) -> float:
    """Val: demand x price - costs | midpoint of bounds | margin on costs | 1."""
    mode = inputs.mode
    if mode is PotentialMode.DEMAND_PRICE:
        if inputs.demand is None or inputs.price is None:
            raise ValidationError("demand_price potential needs demand and price")
        if inputs.costs is None:
            raise ValidationError("demand_price potential needs a cost ledger")
        return inputs.demand * inputs.price - inputs.costs.total()
    if mode is PotentialMode.BOUNDS:
        if inputs.v_max is None or inputs.v_min is None:
            raise ValidationError("bounds potential needs v_max and v_min")
        if inputs.v_max < inputs.v_min:
            raise MathError(f"bounds potential: v_max {inputs.v_max} < v_min {inputs.v_min}")
        return (inputs.v_max + inputs.v_min) / 2.0
    if mode is PotentialMode.MARGIN:
        if inputs.margin_fraction is None:
            raise ValidationError("margin potential needs margin_fraction")
        if inputs.margin_fraction <= 0:
            raise ValidationError("margin_fraction must be positive")
        if inputs.costs is None:
            raise ValidationError("margin potential needs a cost ledger")
        return inputs.costs.total() * inputs.margin_fraction
    if mode is PotentialMode.UNIT:
        return 1.0
    raise ValidationError(f"unknown potential mode {mode!r}")


# ------------------------------------------------------- temporal and value

@dataclass(frozen=True)
class TemporalCorrection:
    mode: str  # "processing_ratio" or "fixed"
    t_p: Duration | None = None
    t_a: Duration | None = None
    increment: float | None = None

    def __post_init__(self):
        if self.mode == "processing_ratio":
            if self.t_p is None or self.t_a is None:
                raise ValidationError("processing_ratio correction needs t_p and t_a")
        elif self.mode == "fixed":
            if self.increment is None:
                raise ValidationError("fixed correction needs an increment")
            if not 0.01 <= self.increment <= 0.05:
                raise ValidationError(
                    f"fixed increment {self.increment} outside [0.01, 0.05]")
        else:
            raise ValidationError(f"unknown temporal mode {self.mode!r}")

    def to_dict(self) -> dict:
        if self.mode == "processing_ratio":
            return {"mode": self.mode, "t_p": self.t_p.to_dict(),
                    "t_a": self.t_a.to_dict()}
        return {"mode": self.mode, "increment": self.increment}


def temporal_correction(tc: TemporalCorrection) -> float:
    if tc.mode == "fixed":
        return 1.0 + tc.increment
    if tc.t_a.days <= 0:
        raise MathError("temporal correction needs a positive acquisition time")
    v_p = 1.0 + tc.t_p.days / tc.t_a.days
    if v_p < 1.0:
        raise MathError(f"temporal correction {v_p} below 1 (negative processing time)")
    return v_p


@dataclass(frozen=True)
class ValuationComponent:
    component_id: str
    val: float
    icf: float

    def __post_init__(self):
        if self.icf <= 0:
            raise ValidationError(f"component {self.component_id!r}: icf must be positive")

    def to_dict(self) -> dict:
        return {"component_id": self.component_id, "val": self.val, "icf": self.icf}


@dataclass(frozen=True)
class ValuationResult:
    driver: Driver
    qru: float
    components: tuple[ValuationComponent, ...]
    v_p: float
    value: float
    audit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "driver": self.driver.value,
            "qru": self.qru,
            "components": [c.to_dict() for c in self.components],
            "v_p": self.v_p,
            "value": self.value,
            "audit": self.audit,
        }


def dataset_value(qru: float, components: list[ValuationComponent], v_p: float,
                  driver: Driver = Driver.QUALITY) -> ValuationResult:
    """V = QRU * sum(Val_i * ICF_i) / V_p."""
    if not components:
        raise ValidationError("dataset value needs at least one component")
    if v_p < 1.0:
        raise MathError(f"v_p must be at least 1, got {v_p}")
    pool = sum(c.val * c.icf for c in components)
    value = qru * pool / v_p
    audit = {
        "driver": driver.value,
        "qru": qru,
        "components": [c.to_dict() for c in components],
        "component_pool": pool,
        "v_p": v_p,
        "value": value,
    }
    return ValuationResult(driver=driver, qru=qru, components=tuple(components),
                           v_p=v_p, value=value, audit=audit)


# ------------------------------------------------------------ distributed

def combine_distributed_quality(parts: list[tuple[float, float]]) -> float:
    """Sum of index x coverage_fraction; fractions are not renormalized."""
    if not parts:
        raise ValidationError("cannot combine an empty part list")
    for index, fraction in parts:
        if fraction < 0:
            raise ValidationError(f"coverage fraction {fraction} must be nonnegative")
    return sum(index * fraction for index, fraction in parts)


def return_on_investment(expected_gain: float, coverage: float, costs: float) -> float:
    """RoI proxy (gain x coverage - costs) / costs used for RoI observations."""
    if costs <= 0:
        raise MathError("RoI proxy needs positive costs")
    return (expected_gain * coverage - costs) / costs


def format_money(value: float, currency: str = "") -> str:
    """Display rounding only: half-even to 2 decimals. Never used in math."""
    quantized = Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN)
    return f"{quantized} {currency}".strip()
