import itertools
from fractions import Fraction as F

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import instance_and_matching, instances, load, matchings
from matchstab.concepts import (
    CONCEPTS,
    SD,
    Verdict,
    check_af_fractional,
    check_claimwise,
    check_concept,
    check_ex_ante,
    check_ex_post,
    check_fractional,
    check_fractional_dual,
    check_robust_ex_post,
    check_sd_stability,
    evaluate_all,
    sd_dominates,
)
from matchstab.deterministic import check_weakly_stable_det
from matchstab.errors import TierError
from matchstab.instance import NULL, ModelTier, WeakOrder, parse_instance
from matchstab.matching import (
    RandomMatching,
    all_assignments,
    from_assignment,
    mix,
)

TIERS = list(ModelTier)


# independent re-evaluation helpers (strict orders only)

def better_mass(inst, p, i, o):
    r = inst.pref_rank[i]
    return sum((p[i, k] for k in range(inst.m) if r[k] < r[o]), F(0))


def lower_priority_mass(inst, p, i, o):
    r = inst.prio_rank[o]
    return sum((p[j, o] for j in range(inst.n) if r[j] > r[i]), F(0))


def cumulative(order, vec):
    out, run = [], F(0)
    for e in order.flat():
        if e != NULL:
            run += vec[e]
            out.append(run)
    return out


def strictly_prefers(order, a, b):
    ca, cb = cumulative(order, a), cumulative(order, b)
    return all(x >= y for x, y in zip(ca, cb)) and list(a) != list(b)


def sd_blocked(inst, p, strength):
    """Quantifies over every deterministic q with q(i,o)=1, q != p."""
    n = inst.n
    for i, o in itertools.product(range(n), repeat=2):
        if strength == "strong" and p[i, o] == 1:
            # q(i) = p(i) and q(o) = p(o): nothing changes for the pair
            continue
        for perm in itertools.permutations(range(n)):
            if perm[i] != o:
                continue
            q = from_assignment(perm, n)
            if q == p:
                continue
            pi, qi = p.cells[i], q.cells[i]
            po = [p[j, o] for j in range(n)]
            qo = [q[j, o] for j in range(n)]
            if strength == "strong":
                if not strictly_prefers(inst.prefs[i], pi, qi) and not strictly_prefers(inst.prios[o], po, qo):
                    return True
            elif strictly_prefers(inst.prefs[i], qi, pi) and strictly_prefers(inst.prios[o], qo, po):
                return True
    return False


# ---------------------------------------------------------------- examples

def test_ex_ante_examples():
    inst, p = load("EX1")
    assert check_ex_ante(inst, p).holds and check_af_fractional(inst, p).holds
    inst, p = load("P4")
    v = check_ex_ante(inst, p)
    w = v.witness
    assert (w.agent, w.other_agent, w.obj, w.other_obj) == (0, 1, 1, 2)
    v = check_af_fractional(inst, p)
    assert (v.witness.agent, v.witness.obj, v.witness.values) == (0, 1, (F(1, 2), F(1, 2)))


def test_fractional_examples():
    inst, p = load("P10")
    v = check_fractional(inst, p)
    assert not v.holds
    assert (v.witness.agent, v.witness.obj, v.witness.values) == (1, 0, (F(2, 3), F(1, 3)))
    assert not check_fractional_dual(inst, p).holds
    inst, p = load("P16")
    assert check_fractional(inst, p).holds and check_fractional_dual(inst, p).holds
    inst, p = load("EX5")
    v = check_fractional(inst, p)
    assert not v.holds and v.values["reason"] == "wasteful"
    assert check_fractional(inst, p, require_axioms=False).holds


def test_claimwise_examples():
    inst, p = load("P10")
    assert check_claimwise(inst, p).holds
    inst, p = load("P33")
    w = check_claimwise(inst, p).witness
    assert (w.agent, w.other_agent, w.obj, w.values) == (1, 2, 0, (F(1, 2), F(1, 4)))
    inst, p = load("EX7")
    assert check_claimwise(inst, p, "general").holds


def test_ex_post_examples():
    inst, p = load("P6")
    v = check_ex_post(inst, p)
    assert v.holds and v.certificate.reconstructs(p)
    assert v.certificate.weights == [F(1, 3)] * 3
    assert all(check_weakly_stable_det(inst, q) is None for q in v.certificate.matchings)
    inst, p = load("P16")
    assert not check_ex_post(inst, p).holds
    inst, p = load("P10")
    assert not check_ex_post(inst, p).holds


def test_robust_examples():
    inst, p = load("P4")
    v = check_robust_ex_post(inst, p)
    assert v.holds and v.values["realizable"] == 2
    inst, p = load("P6")
    v = check_robust_ex_post(inst, p)
    assert not v.holds and v.values["reason"] == "every part is unstable"
    assert v.certificate.reconstructs(p)
    assert all(check_weakly_stable_det(inst, q) is not None for q in v.certificate.matchings)
    inst, p = load("EX1")
    assert check_robust_ex_post(inst, p).holds


def test_sd_dominates_examples():
    order = WeakOrder.strict([0, 1, 2, NULL])
    a = (F(1), F(0), F(0))
    assert sd_dominates(order, a, a) == SD.WEAKLY
    assert sd_dominates(order, a, (F(1, 2), F(0), F(1, 2))) == SD.STRICTLY
    assert sd_dominates(order, (0, 1, 0), (1, 0, 0)) == SD.NO
    with pytest.raises(TierError):
        sd_dominates(WeakOrder((frozenset({0, 1}), frozenset({NULL}))), (1, 0), (0, 1))


def test_sd_examples():
    inst, p = load("P33")
    assert check_sd_stability(inst, p, "weak").holds
    inst, p = load("P4")
    assert not check_sd_stability(inst, p, "strong").holds
    inst, p = load("EX1")
    assert check_sd_stability(inst, p, "strong").holds


def test_sd_rejects_other_tiers():
    inst, p = load("P16")
    with pytest.raises(TierError):
        check_sd_stability(inst, p)
    inst, p = load("P4")
    with pytest.raises(ValueError):
        check_sd_stability(inst, p, "medium")


def test_unknown_concept():
    inst, p = load("P4")
    with pytest.raises(ValueError):
        check_concept(inst, p, "pareto")


def test_deterministic_concepts_need_deterministic_input():
    inst, p = load("P4")
    with pytest.raises(ValueError):
        check_concept(inst, p, "det_no_envy")
    assert check_concept(inst, from_assignment((0, 1, 2), 3), "det-weakly-stable").holds


def test_evaluate_all_skips_sd_outside_base():
    inst, p = load("P16")
    assert not {"sd_strong", "sd_weak"} & set(evaluate_all(inst, p))
    inst, p = load("P4")
    assert set(evaluate_all(inst, p)) == set(CONCEPTS)


def test_verdict_round_trip_on_examples():
    for stem in ("P4", "P6", "P10", "EX3", "EX5"):
        inst, p = load(stem)
        for v in evaluate_all(inst, p).values():
            assert Verdict.from_dict(v.to_dict(inst), inst) == v


def test_empty_instance_is_vacuously_stable():
    inst = parse_instance("agents: 0\nobjects:\n")
    p = RandomMatching.zeros(0, 0)
    assert all(v.holds for v in evaluate_all(inst, p).values())


# ---------------------------------------------------------------- properties

@given(st.integers(1, 4).flatmap(lambda n: instance_and_matching(ModelTier.BASE, n, max_parts=4)))
def test_sd_matches_exhaustive_blocking_search(pair):
    inst, p = pair
    assert check_sd_stability(inst, p, "strong").holds == (not sd_blocked(inst, p, "strong"))
    assert check_sd_stability(inst, p, "weak").holds == (not sd_blocked(inst, p, "weak"))


@given(instance_and_matching(ModelTier.BASE, 4, max_parts=4))
def test_sd_dominance_matches_cumulative_sums(pair):
    inst, p = pair
    for i, k in itertools.product(range(inst.n), repeat=2):
        a, b = p.cells[i], p.cells[k]
        got = sd_dominates(inst.prefs[i], a, b)
        ca, cb = cumulative(inst.prefs[i], a), cumulative(inst.prefs[i], b)
        weak = all(x >= y for x, y in zip(ca, cb))
        assert got == (SD.NO if not weak else SD.WEAKLY if a == b else SD.STRICTLY)


@given(instance_and_matching(ModelTier.BASE, 4, max_parts=4))
def test_base_witnesses_are_genuine(pair):
    inst, p = pair
    v = check_fractional(inst, p)
    if not v.holds:
        i, o = v.witness.agent, v.witness.obj
        rhs, lhs = lower_priority_mass(inst, p, i, o), better_mass(inst, p, i, o)
        assert v.witness.values == (rhs, lhs) and rhs > lhs
    v = check_claimwise(inst, p)
    if not v.holds:
        i, j, o = v.witness.agent, v.witness.other_agent, v.witness.obj
        assert inst.prio_rank[o][i] < inst.prio_rank[o][j]
        assert p[j, o] > better_mass(inst, p, i, o)
    v = check_ex_ante(inst, p)
    if not v.holds:
        w = v.witness
        assert p[w.agent, w.other_obj] > 0 and p[w.other_agent, w.obj] > 0
        assert inst.pref_rank[w.agent][w.obj] < inst.pref_rank[w.agent][w.other_obj]
        assert inst.prio_rank[w.obj][w.agent] < inst.prio_rank[w.obj][w.other_agent]


@given(st.sampled_from(TIERS).flatmap(lambda t: st.tuples(st.just(t), instance_and_matching(t, 3, 3, 4))))
def test_ex_post_certificates_are_stable_and_exact(data):
    tier, (inst, p) = data
    v = check_ex_post(inst, p, tier)
    if v.holds:
        assert v.certificate.reconstructs(p)
        assert all(check_weakly_stable_det(inst, q, tier) is None for q in v.certificate.matchings)


@given(st.sampled_from(TIERS).flatmap(lambda t: st.tuples(st.just(t), instance_and_matching(t, 3, 3, 4))))
def test_robust_failure_certificate_contains_unstable_part(data):
    tier, (inst, p) = data
    v = check_robust_ex_post(inst, p, tier)
    if not v.holds and v.certificate is not None:
        assert v.certificate.reconstructs(p)
        assert any(check_weakly_stable_det(inst, q, tier) is not None for q in v.certificate.matchings)


@given(st.sampled_from(TIERS).flatmap(lambda t: st.tuples(st.just(t), instance_and_matching(t, 4, 4, 4))))
def test_dual_form_agrees(data):
    tier, (inst, p) = data
    assert check_fractional(inst, p, tier).holds == check_fractional_dual(inst, p, tier).holds


@given(instance_and_matching(ModelTier.BASE, 4, max_parts=4))
def test_fractional_saturates_supported_pairs(pair):
    inst, p = pair
    if check_fractional(inst, p).holds:
        for i, o in itertools.product(range(inst.n), repeat=2):
            if p[i, o] > 0:
                ahead = sum((p[j, o] for j in range(inst.n) if inst.prio_rank[o][j] < inst.prio_rank[o][i]), F(0))
                assert p[i, o] + better_mass(inst, p, i, o) + ahead == 1


@given(st.sampled_from(TIERS).flatmap(lambda t: st.tuples(st.just(t), instances(t, 3, 3))))
def test_deterministic_matchings_collapse(data):
    tier, inst = data
    for a in all_assignments(inst.n, inst.m, tier):
        q = from_assignment(a, inst.m)
        stable = check_weakly_stable_det(inst, q, tier) is None
        for c in ("ex_ante", "robust_ex_post", "ex_post", "fractional", "claimwise"):
            assert check_concept(inst, q, c, tier).holds == stable, c


@pytest.mark.parametrize("tier", [ModelTier.BASE, ModelTier.WEAK])
@pytest.mark.parametrize("checker", [check_fractional, check_claimwise])
@given(data=st.data())
def test_stable_sets_are_convex(tier, checker, data):
    inst = data.draw(instances(tier, 3))
    ps = [data.draw(matchings(inst.n, inst.m, tier, 4)) for _ in range(6)]
    good = [p for p in ps if checker(inst, p, tier).holds]
    assume(len(good) >= 2)
    lam = data.draw(st.fractions(0, 1, max_denominator=10))
    assume(0 < lam < 1)
    r = mix([(lam, good[0]), (1 - lam, good[1])])
    assert checker(inst, r, tier).holds


NW_BREAKS_UNDER_MIXING = """\
agents: 3
objects: o1 o2 o3
pref 1: o2 > @ > o1 > o3
pref 2: [o1 o2] > @ > o3
pref 3: [o1 o3] > o2 > @
prio o1: 3 > 2 > @ > 1
prio o2: [1 2] > 3 > @
prio o3: 3 > @ > 1 > 2
"""


def test_general_tier_stability_is_not_convex():
    inst = parse_instance(NW_BREAKS_UNDER_MIXING)
    p = from_assignment((1, NULL, 0), 3)
    q = from_assignment((NULL, 1, 2), 3)
    for checker in (check_fractional, check_claimwise):
        assert checker(inst, p, "general").holds and checker(inst, q, "general").holds
        r = mix([(F(1, 2), p), (F(1, 2), q)])
        v = checker(inst, r, "general")
        assert not v.holds and v.values["reason"] == "wasteful"
        assert checker(inst, r, "general", require_axioms=False).holds


@pytest.mark.parametrize("checker", [check_fractional, check_claimwise])
@given(data=st.data())
def test_general_inequality_systems_are_convex(checker, data):
    inst = data.draw(instances(ModelTier.GENERAL, 3, 3))
    ps = [data.draw(matchings(inst.n, inst.m, ModelTier.GENERAL, 4)) for _ in range(6)]
    good = [p for p in ps if checker(inst, p, "general", require_axioms=False).holds]
    assume(len(good) >= 2)
    lam = data.draw(st.fractions(0, 1, max_denominator=10))
    r = mix([(lam, good[0]), (1 - lam, good[1])]) if 0 < lam < 1 else good[0]
    assert checker(inst, r, "general", require_axioms=False).holds
