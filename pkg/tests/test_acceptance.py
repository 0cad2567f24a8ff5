"""Frozen acceptance checks: packaged scenarios, properties, and the CLI.

Each test records one acceptance label; conftest prints a PASS/FAIL line
per label after the run.
"""

import json
import random

import pytest
from pytest import approx

from datavalor import (
    AlignmentVariant,
    Duration,
    PairwiseMatrix,
    TemporalCorrection,
    ValuationComponent,
    alignment,
    combine_distributed_quality,
    compare,
    consistency_ratio,
    consistent_matrix,
    dataset_value,
    load_scenario,
    packaged_scenario,
    principal_priorities,
    run_valuation,
    save_scenario,
    scenario_to_dict,
    temporal_correction,
)
from datavalor.cli import main as cli_main


def test_example1_full_chain(record_property):
    record_property("acceptance", "example1 full valuation chain")
    scenario = packaged_scenario("example1")
    audit = run_valuation(scenario, "greenroute").audit

    quality = {m["metric_id"]: m["m_norm"] for m in audit["quality"]["metrics"]}
    assert quality["accuracy"] == 0.80
    assert quality["volume"] == approx(0.6393, abs=1e-4)
    assert quality["completeness"] == 1.0
    assert audit["quality"]["value"] == approx(0.8131, abs=5e-4)

    terms = {t["metric_id"]: t["m_norm"] for t in audit["domains"][0]["terms"]}
    assert terms["processing_cost"] == approx(-4.435, abs=1e-3)

    domains = {d["id"]: d["relevance"] for d in audit["domains"]}
    assert domains["route-planning"] == approx(0.6884, abs=1e-3)
    assert domains["fleet-advisory"] == approx(0.7662, abs=1e-3)
    assert audit["utility"] == approx(1.455, abs=2e-3)

    assert audit["costs"]["total"] == approx(915.53, abs=0.02)
    assert audit["potential"]["val"] == approx(91.55, abs=0.05)
    assert audit["v_p"] == 1.5
    assert audit["value"] == approx(88.76, abs=0.1)


def test_example2_cross_candidates(record_property):
    record_property("acceptance", "example2 cross-candidate valuation")
    scenario = packaged_scenario("example2")
    ids = ("d1", "d2", "d3", "d1-plus-d2")
    computed = {cid: run_valuation(scenario, cid, paper_compat=False).audit
                for cid in ids}
    carried = {cid: run_valuation(scenario, cid).audit for cid in ids}

    def quality_norms(audit):
        return {m["metric_id"]: m["m_norm"] for m in audit["quality"]["metrics"]}

    def relevance_norms(audit):
        return {t["metric_id"]: t["m_norm"] for t in audit["domains"][0]["terms"]}

    expected_quality = {
        "d1": {"granularity": 1.0, "format": 0.0, "precision": 1.0,
               "timeliness": 1.0, "similarity": 0.8},
        "d2": {"granularity": 0.111, "format": 1.0, "precision": 0.0,
               "timeliness": 0.67, "similarity": 0.6},
        "d3": {"granularity": 0.0, "format": 1.0, "precision": 1.0,
               "timeliness": 0.67, "similarity": 1.0},
    }
    for cid, expected in expected_quality.items():
        norms = quality_norms(computed[cid])
        for mid, value in expected.items():
            assert norms[mid] == approx(value, abs=5e-3), (cid, mid)

    expected_relevance = {
        "d1": {"compliance": 1.0, "risk_cost": 0.0,
               "storage_cost": -0.5, "roi": 1.24},
        "d2": {"compliance": 0.0, "risk_cost": -1.0,
               "storage_cost": -0.2, "roi": 0.826},
        "d3": {"compliance": 0.0, "risk_cost": -0.5,
               "storage_cost": -0.2, "roi": 2.5},
        "d1-plus-d2": {"roi": 0.556},
    }
    for cid, expected in expected_relevance.items():
        norms = relevance_norms(computed[cid])
        for mid, value in expected.items():
            assert norms[mid] == approx(value, abs=5e-3), (cid, mid)

    assert computed["d1"]["quality"]["value"] == approx(0.44, abs=5e-3)
    assert computed["d2"]["quality"]["value"] == approx(0.21, abs=5e-3)
    assert computed["d3"]["quality"]["value"] == approx(0.2935, abs=5e-3)
    # merged contract quality from the two sub-indices as printed
    assert combine_distributed_quality([(0.44, 0.8), (0.21, 0.6)]) == approx(
        0.478, abs=2e-3)

    assert computed["d1"]["domains"][0]["relevance"] == approx(0.576, abs=1e-3)
    assert carried["d2"]["domains"][0]["relevance"] == approx(0.273, abs=1e-3)
    assert carried["d1-plus-d2"]["domains"][0]["relevance"] == approx(
        0.233, abs=1e-3)
    # d3's relevance is pinned in both modes
    assert computed["d3"]["domains"][0]["relevance"] == approx(0.8479, abs=1e-3)
    assert carried["d3"]["domains"][0]["relevance"] == approx(0.818, abs=1e-3)

    assert carried["d1"]["value"] == approx(1646.0, abs=10.0)
    assert carried["d2"]["value"] == approx(-520.0, abs=10.0)
    assert carried["d3"]["value"] == approx(11680.0, abs=10.0)
    assert carried["d1-plus-d2"]["value"] == approx(-2880.0, abs=10.0)

    for flag in (None, False):
        report = compare(scenario, paper_compat=flag)
        assert report.winner == "d3"


def test_screening_replay_cli(record_property, capsys):
    record_property("acceptance", "screening replay through the CLI")
    answers = ["No", "Yes", "No", "No", "Yes", "No", "Direct", "Yes", "No", "No"]
    code = cli_main(["screen", "--tree", "step1",
                     "--answers", ",".join(answers)])
    captured = capsys.readouterr()
    assert code == 0
    doc = json.loads(captured.out)
    assert set(doc["session"]["accumulated_codes"]) == {2, 3, 6, 12, 13}
    effects = doc["effects"]
    assert effects["main_driver"] == "relevance"
    assert effects["include_capex"] is True
    assert effects["include_opex"] is True
    assert effects["strategy"] == "daas"
    assert effects["icf_value"] == 1.0
    notes = " ".join(doc["discrepancy_notes"])
    assert "table" in notes  # narrative/table divergence must be surfaced


def test_weighting_properties(record_property):
    record_property("acceptance", "pairwise weighting properties")
    rng = random.Random(20260813)
    for _ in range(100):
        n = rng.randint(2, 8)
        raw = [rng.uniform(0.05, 1.0) for _ in range(n)]
        total = sum(raw)
        weights = [w / total for w in raw]
        items = tuple(f"m{i}" for i in range(n))
        matrix = consistent_matrix(items, weights)

        vector = principal_priorities(matrix)
        assert sum(vector.weights) == approx(1.0, abs=1e-9)
        for got, true in zip(vector.weights, weights):
            assert abs(got - true) / true <= 1e-6
        assert consistency_ratio(matrix).consistency_ratio < 1e-8

    cyclic = PairwiseMatrix.from_rows(
        ("a", "b", "c"),
        [[1.0, 9.0, 1.0 / 9.0], [1.0 / 9.0, 1.0, 9.0], [9.0, 1.0 / 9.0, 1.0]])
    assert consistency_ratio(cyclic).consistency_ratio > 0.10

    two = PairwiseMatrix.from_rows(("a", "b"), [[1.0, 7.0], [1.0 / 7.0, 1.0]])
    assert consistency_ratio(two).consistency_ratio == 0.0


def test_alignment_properties(record_property):
    record_property("acceptance", "alignment function properties")
    rng = random.Random(977)
    bell = (AlignmentVariant.RECIPROCAL, AlignmentVariant.EXPONENTIAL)
    for _ in range(1000):
        t = rng.uniform(-5.0, 5.0)
        if t == 0.0:
            t = 1.0
        assert alignment(t, t, AlignmentVariant.RATIO) == 1.0

        m = rng.uniform(-6.0, 6.0)
        delta = rng.uniform(0.0, 4.0)
        for variant in bell:
            f = alignment(m, t, variant)
            assert 0.0 < f <= 1.0
            assert alignment(t, t, variant) == 1.0  # peak exactly at the target
            if m != t:
                assert f < 1.0
            left = alignment(t - delta, t, variant)
            right = alignment(t + delta, t, variant)
            assert abs(left - right) <= 1e-12


def test_ranking_invariance(record_property):
    record_property("acceptance", "ranking invariance")
    rng = random.Random(31337)
    for _ in range(100):
        k = rng.randint(2, 6)
        qru = rng.uniform(0.1, 2.0)
        vals = [rng.uniform(1.0, 500.0) for _ in range(k)]
        icfs = [rng.uniform(0.5, 3.0) for _ in range(k)]
        t_a = Duration(rng.uniform(5.0, 60.0), "day")
        t_p_fast = Duration(rng.uniform(0.0, 30.0), "day")
        t_p_slow = Duration(t_p_fast.value + rng.uniform(0.1, 30.0), "day")
        v_p = temporal_correction(TemporalCorrection(
            mode="processing_ratio", t_p=t_p_fast, t_a=t_a))
        v_p_slow = temporal_correction(TemporalCorrection(
            mode="processing_ratio", t_p=t_p_slow, t_a=t_a))

        def value_of(val, icf, correction):
            component = ValuationComponent(component_id="c", val=val, icf=icf)
            return dataset_value(qru, [component], correction).value

        base = [value_of(v, i, v_p) for v, i in zip(vals, icfs)]
        order = sorted(range(k), key=lambda i: -base[i])

        # a shared positive rescaling of every potential keeps the order
        scale = rng.uniform(0.01, 100.0)
        scaled = [value_of(v * scale, i, v_p) for v, i in zip(vals, icfs)]
        assert sorted(range(k), key=lambda i: -scaled[i]) == order

        # longer processing at fixed acquisition never raises a value
        slower = [value_of(v, i, v_p_slow) for v, i in zip(vals, icfs)]
        assert all(s <= b for s, b in zip(slower, base))


def test_round_trip_determinism(record_property, tmp_path):
    record_property("acceptance", "round-trip and determinism")
    for name in ("example1", "example2"):
        scenario = packaged_scenario(name)
        path = tmp_path / f"{name}.json"
        save_scenario(scenario, str(path))
        assert scenario_to_dict(load_scenario(str(path))) == \
            scenario_to_dict(scenario)

    scenario = packaged_scenario("example2")
    for cid in ("d1", "d2", "d3", "d1-plus-d2"):
        first = json.dumps(run_valuation(scenario, cid).audit, sort_keys=True)
        second = json.dumps(run_valuation(scenario, cid).audit, sort_keys=True)
        assert first == second
    e1 = packaged_scenario("example1")
    assert run_valuation(e1, "greenroute").audit == \
        run_valuation(e1, "greenroute").audit
