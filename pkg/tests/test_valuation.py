import math

import pytest

from datavalor.errors import MathError, ValidationError
from datavalor.valuation import (AlignmentVariant, CapexItem, CostLedger,
                                 DomainRelevance, Driver, Duration,
                                 GovernanceItem, OpexItem, PotentialInputs,
                                 PotentialMode, TemporalCorrection,
                                 ValuationComponent, ValuationWarning,
                                 WeightedMetric, aggregate_index, alignment,
                                 combine_distributed_costs,
                                 combine_distributed_quality,
                                 dataset_potential, dataset_value,
                                 format_money, relevance,
                                 return_on_investment, temporal_correction,
                                 utility)

THIRD = 1.0 / 3.0


def quality_metrics():
    return [
        WeightedMetric(metric_id="accuracy", m_norm=0.8, w_m=THIRD),
        WeightedMetric(metric_id="volume", m_norm=0.6392784, w_m=THIRD),
        WeightedMetric(metric_id="completeness", m_norm=1.0, w_m=THIRD),
    ]


def test_index_aggregation():
    index = aggregate_index(quality_metrics())
    assert index.value == pytest.approx(0.8130928, abs=5e-4)
    assert index.contributing_metric_ids == ("accuracy", "volume", "completeness")


def test_index_weight_lint_warns_but_computes():
    metrics = [WeightedMetric(metric_id="a", m_norm=0.5, w_m=0.2),
               WeightedMetric(metric_id="b", m_norm=1.0, w_m=0.2)]
    with pytest.warns(ValuationWarning):
        index = aggregate_index(metrics)
    assert index.value == pytest.approx(0.3)


def test_index_rejects_empty_and_negative():
    with pytest.raises(ValidationError):
        aggregate_index([])
    with pytest.raises(ValidationError):
        WeightedMetric(metric_id="a", m_norm=0.5, w_m=-0.1)


def test_alignment_ratio():
    assert alignment(0.8, 1.0, AlignmentVariant.RATIO) == pytest.approx(0.8)
    assert alignment(0.8130928, 0.95, AlignmentVariant.RATIO) == pytest.approx(0.8558872, abs=1e-6)
    # negative target flips to target/metric
    assert alignment(-4.435, -2.5, AlignmentVariant.RATIO) == pytest.approx(0.5636979, abs=1e-6)
    # zero target keeps the metric by default
    assert alignment(-0.5, 0.0, AlignmentVariant.RATIO) == -0.5
    assert alignment(0.0, 0.0, AlignmentVariant.RATIO) == 0.0


def test_alignment_ratio_strict_zero_target():
    strict = dict(variant=AlignmentVariant.RATIO, strict_zero_target=True)
    assert alignment(0.4, 0.0, **strict) == 1.0
    assert alignment(-0.4, 0.0, **strict) == -1.0
    with pytest.raises(MathError):
        alignment(0.0, 0.0, **strict)


def test_alignment_ratio_zero_metric_negative_target():
    with pytest.raises(MathError):
        alignment(0.0, -1.0, AlignmentVariant.RATIO)


def test_alignment_reciprocal_and_exponential():
    for variant in (AlignmentVariant.RECIPROCAL, AlignmentVariant.EXPONENTIAL):
        assert alignment(0.7, 0.7, variant) == 1.0
    assert alignment(0.5, 1.0, AlignmentVariant.RECIPROCAL) == pytest.approx(1 / 1.5)
    assert alignment(0.5, 1.0, AlignmentVariant.EXPONENTIAL) == pytest.approx(math.exp(-0.5))


def test_relevance_single_domain():
    metrics = [
        WeightedMetric(metric_id="quality_index", m_norm=0.8130928, w_m=0.5,
                       m_target=1.0),
        WeightedMetric(metric_id="processing_cost", m_norm=-4.435, w_m=0.5,
                       m_target=-2.5),
    ]
    dom = relevance(metrics, AlignmentVariant.RATIO, domain_id="route-planning")
    assert dom.relevance == pytest.approx(0.6883954, abs=1e-6)
    assert [t.metric_id for t in dom.terms] == ["quality_index", "processing_cost"]


def test_relevance_requires_targets():
    metrics = [WeightedMetric(metric_id="a", m_norm=0.5, w_m=1.0)]
    with pytest.raises(ValidationError):
        relevance(metrics, AlignmentVariant.RATIO, domain_id="d")


def test_relevance_wraps_math_errors_with_context():
    metrics = [WeightedMetric(metric_id="rc", m_norm=0.0, w_m=1.0, m_target=-1.0)]
    with pytest.raises(MathError) as err:
        relevance(metrics, AlignmentVariant.RATIO, domain_id="fleet")
    assert "rc" in str(err.value) and "fleet" in str(err.value)


def test_utility_aggregates_and_warns_on_beta_overflow():
    doms = [DomainRelevance(domain_id="d1", relevance=0.6883954, beta=1.0,
                            alignment_variant=AlignmentVariant.RATIO),
            DomainRelevance(domain_id="d2", relevance=0.7661623, beta=1.0,
                            alignment_variant=AlignmentVariant.RATIO)]
    with pytest.warns(ValuationWarning):
        value = utility(doms)
    assert value == pytest.approx(1.4545577, abs=2e-3)

    halved = [DomainRelevance(domain_id=d.domain_id, relevance=d.relevance,
                              beta=0.5, alignment_variant=d.alignment_variant)
              for d in doms]
    assert utility(halved) == pytest.approx(0.7272788, abs=1e-6)


def test_duration_units():
    assert Duration(1, "day").days == 1.0
    assert Duration(2, "weeks").days == 14.0
    assert Duration(1, "month").days == pytest.approx(30.4375)
    assert Duration(1, "year").days == pytest.approx(365.25)
    with pytest.raises(ValidationError):
        Duration(1, "fortnight")


def test_capex_proration():
    item = CapexItem(label="sensors", purchase_cost=5000.0,
                     lifespan=Duration(5, "years"),
                     analysis_period=Duration(1, "month"))
    assert item.prorated == pytest.approx(83.3333333, abs=1e-6)


def test_capex_validation():
    with pytest.raises(ValidationError):
        CapexItem(label="x", purchase_cost=-1.0, lifespan=Duration(1, "year"),
                  analysis_period=Duration(1, "month"))
    with pytest.raises(ValidationError):
        CapexItem(label="x", purchase_cost=1.0, lifespan=Duration(0, "year"),
                  analysis_period=Duration(1, "month"))


def example1_ledger():
    return CostLedger(
        currency="USD",
        capex=(CapexItem(label="sensors", purchase_cost=5000.0,
                         lifespan=Duration(5, "years"),
                         analysis_period=Duration(1, "month")),),
        opex=(OpexItem(label="processing", unit_cost=887.0, quantity=0.6, unit="TB"),
              OpexItem(label="operations", unit_cost=500.0, quantity=0.6, unit="TB")),
    )


def test_ledger_total_and_breakdown():
    ledger = example1_ledger()
    assert ledger.total() == pytest.approx(915.5333333, abs=0.02)
    doc = ledger.breakdown()
    assert doc["total"] == pytest.approx(ledger.total())
    assert doc["capex"][0]["prorated"] == pytest.approx(83.3333333, abs=1e-6)
    assert doc["opex"][0]["cost"] == pytest.approx(532.2)


def test_combine_distributed_costs():
    a = CostLedger(currency="USD",
                   opex=(OpexItem(label="x", unit_cost=10.0, quantity=1.0),))
    b = CostLedger(currency="USD",
                   governance=(GovernanceItem(label="y", cost=5.0),))
    merged = combine_distributed_costs([a, b])
    assert merged.total() == 15.0
    with pytest.raises(ValidationError):
        combine_distributed_costs([])
    with pytest.raises(ValidationError):
        combine_distributed_costs([a, CostLedger(currency="EUR")])


def test_potential_modes():
    ledger = example1_ledger()
    margin = PotentialInputs(mode=PotentialMode.MARGIN, margin_fraction=0.1,
                             costs=ledger)
    assert dataset_potential(margin) == pytest.approx(91.5533333, abs=0.05)

    bounds = PotentialInputs(mode=PotentialMode.BOUNDS, v_max=50000.0,
                             v_min=-20000.0)
    assert dataset_potential(bounds) == 15000.0

    dp = PotentialInputs(mode=PotentialMode.DEMAND_PRICE, demand=12.0,
                         price=100.0, costs=ledger)
    assert dataset_potential(dp) == pytest.approx(1200 - ledger.total())

    assert dataset_potential(PotentialInputs(mode=PotentialMode.UNIT)) == 1.0


def test_potential_errors():
    with pytest.raises(MathError):
        dataset_potential(PotentialInputs(mode=PotentialMode.BOUNDS,
                                          v_max=-5.0, v_min=5.0))
    with pytest.raises(ValidationError):
        dataset_potential(PotentialInputs(mode=PotentialMode.MARGIN,
                                          margin_fraction=0.1))
    with pytest.raises(ValidationError):
        dataset_potential(PotentialInputs(mode=PotentialMode.MARGIN,
                                          margin_fraction=0.0,
                                          costs=example1_ledger()))
    with pytest.raises(ValidationError):
        dataset_potential(PotentialInputs(mode=PotentialMode.DEMAND_PRICE,
                                          demand=3.0, price=2.0))


def test_temporal_correction():
    ratio = TemporalCorrection(mode="processing_ratio",
                               t_p=Duration(15, "days"),
                               t_a=Duration(30, "days"))
    assert temporal_correction(ratio) == 1.5

    fixed = TemporalCorrection(mode="fixed", increment=0.05)
    assert temporal_correction(fixed) == 1.05

    with pytest.raises(ValidationError):
        TemporalCorrection(mode="fixed", increment=0.2)
    with pytest.raises(ValidationError):
        TemporalCorrection(mode="fixed", increment=0.005)

    with pytest.raises(MathError):
        temporal_correction(TemporalCorrection(mode="processing_ratio",
                                               t_p=Duration(1, "day"),
                                               t_a=Duration(0, "day")))
    with pytest.raises(MathError):
        temporal_correction(TemporalCorrection(mode="processing_ratio",
                                               t_p=Duration(-10, "days"),
                                               t_a=Duration(30, "days")))


def test_dataset_value_chain():
    component = ValuationComponent(component_id="greenroute",
                                   val=91.55333333333334, icf=1.0)
    result = dataset_value(1.4545576226903223, [component], 1.5,
                           driver=Driver.UTILITY)
    assert result.value == pytest.approx(88.76, abs=0.1)
    assert result.audit["component_pool"] == pytest.approx(91.5533333)
    assert result.audit["driver"] == "utility"


def test_dataset_value_guards():
    component = ValuationComponent(component_id="c", val=10.0, icf=1.0)
    with pytest.raises(ValidationError):
        dataset_value(1.0, [], 1.5)
    with pytest.raises(MathError):
        dataset_value(1.0, [component], 0.99)
    with pytest.raises(ValidationError):
        ValuationComponent(component_id="c", val=10.0, icf=0.0)


def test_cost_only_driver_unit_qru():
    component = ValuationComponent(component_id="c", val=200.0, icf=1.0)
    result = dataset_value(1.0, [component], 1.05, driver=Driver.COST_ONLY)
    assert result.value == pytest.approx(200.0 / 1.05)


def test_combine_distributed_quality():
    combined = combine_distributed_quality([(0.44, 0.8), (0.21, 0.6)])
    assert combined == pytest.approx(0.478, abs=2e-3)
    # coverage fractions are taken as-is, never renormalized
    assert combine_distributed_quality([(1.0, 0.5)]) == 0.5
    with pytest.raises(ValidationError):
        combine_distributed_quality([])
    with pytest.raises(ValidationError):
        combine_distributed_quality([(0.5, -0.1)])


def test_return_on_investment():
    assert return_on_investment(70000.0, 1.0, 45000.0) == pytest.approx(0.556, abs=5e-3)
    assert return_on_investment(28000.0, 1.0, 12500.0) == pytest.approx(1.24)
    with pytest.raises(MathError):
        return_on_investment(1000.0, 1.0, 0.0)


def test_format_money():
    assert format_money(1646.857142857143, "USD") == "1646.86 USD"
    assert format_money(-520.1904761904761, "USD") == "-520.19 USD"
    assert format_money(2.675) == "2.68"  # banker's rounding on the decimal form
    assert format_money(2.665) == "2.66"
