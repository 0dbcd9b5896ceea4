import json
from fractions import Fraction as F

import pytest

from matchstab.audit import (
    RED_ARROWS,
    TIERS,
    AuditConfig,
    gen_instance,
    gen_matching,
    run_audit,
    separation_coverage,
)
from matchstab.concepts import check_ex_post
from matchstab.corpus import corpus, evaluate, labelled, run_case, run_corpus
from matchstab.deterministic import check_weakly_stable_det
from matchstab.instance import ModelTier, classify_tier
from matchstab.matching import is_deterministic

SMALL = dict(count=25, n_range=(1, 3), m_range=(1, 3))


@pytest.mark.parametrize("cid", list(corpus()))
def test_corpus_case_reproduces(cid):
    bad = [o.line() for o in run_case(corpus()[cid]) if not o.ok]
    assert not bad


def test_corpus_ids_and_tiers():
    cases = corpus()
    for cid in ("EX1", "P4", "P6", "P10", "P16", "P33", "EX2", "EX3", "EX4", "EX5", "EX6", "EX7", "EX8"):
        assert cid in cases
    for c in cases.values():
        assert classify_tier(c.instance) <= c.tier
        assert c.summary and c.expected


def test_corpus_expectations_from_examples():
    cases = corpus()
    assert cases["P10"].expected["claimwise"] is True
    assert cases["P10"].expected["fractional"] is False
    assert cases["P4"].expected["robust_ex_post"] is True and cases["P4"].expected["ex_ante"] is False
    assert cases["EX7"].expected["assoc.claimwise"] is False


def test_corpus_unknown_key():
    with pytest.raises(KeyError):
        evaluate(corpus()["P4"], "nonsense")


def test_outcome_line_format():
    line = run_case(corpus()["P10"])[0].line()
    assert line.startswith("ok") and "P10" in line


def test_labelled_uses_null_marker():
    c = corpus()["EX4-p1"]
    assert "@" in labelled(c.instance, c.matching)


def test_full_corpus_passes():
    assert all(o.ok for o in run_corpus())


def test_same_seed_same_report():
    a = run_audit(AuditConfig(seed=7, **SMALL))
    b = run_audit(AuditConfig(seed=7, **SMALL))
    assert a.to_json() == b.to_json()
    assert a.ok, a.to_table()


def test_different_seeds_generate_different_pairs():
    cfg1, cfg2 = AuditConfig(seed=1), AuditConfig(seed=2)
    pairs1 = [gen_instance(cfg1, ModelTier.GENERAL, k) for k in range(10)]
    pairs2 = [gen_instance(cfg2, ModelTier.GENERAL, k) for k in range(10)]
    assert pairs1 != pairs2


def test_empty_audit():
    r = run_audit(AuditConfig(count=0))
    assert r.ok and not r.checks and not r.violations
    assert json.loads(r.to_json())["count"] == 0
    assert "result: ok" in r.to_table()


@pytest.mark.parametrize("kwargs", [
    dict(count=-1),
    dict(n_range=(0, 2)),
    dict(m_range=(3, 2)),
    dict(tie_prob=F(3, 2)),
    dict(seed=-1),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        AuditConfig(**kwargs)


def test_no_ties_gives_strict_orders():
    cfg = AuditConfig(tie_prob=0)
    for k in range(30):
        assert gen_instance(cfg, ModelTier.WEAK, k).is_strict()


def test_no_cuts_and_square_sizes_stay_complete():
    cfg = AuditConfig(unacc_prob=0, n_range=(3, 3), m_range=(3, 3))
    for k in range(30):
        assert classify_tier(gen_instance(cfg, ModelTier.GENERAL, k)) <= ModelTier.WEAK


def test_single_part_gives_deterministic_matching():
    cfg = AuditConfig(parts=(1, 1))
    for tier in TIERS:
        for k in range(10):
            inst = gen_instance(cfg, tier, k)
            assert is_deterministic(gen_matching(inst, cfg, k, tier))


def test_generated_matchings_fit_their_tier():
    cfg = AuditConfig()
    for tier in TIERS:
        for k in range(20):
            inst = gen_instance(cfg, tier, k)
            p = gen_matching(inst, cfg, k, tier)
            assert classify_tier(inst) <= tier
            if tier != ModelTier.GENERAL:
                assert p.is_bistochastic()


def test_stable_mixtures_are_ex_post():
    cfg = AuditConfig(stable_bias=1, parts=(1, 4))
    for k in range(20):
        inst = gen_instance(cfg, ModelTier.BASE, k)
        p = gen_matching(inst, cfg, k, ModelTier.BASE)
        assert check_ex_post(inst, p).holds


def test_stable_bias_draws_stable_parts():
    cfg = AuditConfig(stable_bias=1, parts=(1, 1))
    for tier in TIERS:
        for k in range(10):
            inst = gen_instance(cfg, tier, k)
            q = gen_matching(inst, cfg, k, tier)
            assert check_weakly_stable_det(inst, q, tier) is None


def test_every_separation_has_a_corpus_witness():
    cov = separation_coverage()
    assert set(cov) == {f"{t.label}: {a} / {b}" for t in TIERS for a, b in RED_ARROWS[t]}
    assert all(cov.values()), cov
    assert "P4" in cov["Base: robust_ex_post / ex_ante"]
    assert "P6" in cov["Base: ex_post / robust_ex_post"]
    assert "P10" in cov["Base: claimwise / fractional"]
    assert "P16" in cov["WeakOrders: fractional / ex_post"]


def test_audit_with_corpus_replay():
    r = run_audit(AuditConfig(count=2, include_corpus=True, tiers=(ModelTier.BASE,)))
    assert r.ok and r.corpus_failures == []
    assert set(r.pairs) == {"Base"}


def test_report_lists_checks_per_tier():
    r = run_audit(AuditConfig(seed=3, **SMALL))
    names = set(r.checks)
    assert "Base: ex_ante => robust_ex_post" in names
    assert "WeakOrders: fractional <=> fractional_dual" in names
    assert "transform: ex_ante <=> assoc ex_ante" in names
    assert all(failed == 0 for _, failed in r.checks.values())
