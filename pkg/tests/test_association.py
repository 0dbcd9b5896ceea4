from fractions import Fraction as F

import pytest
from hypothesis import given

from conftest import data_text, instance_and_matching, instances, load
from matchstab.association import (
    respects_individual_rationality,
    respects_non_wastefulness,
    restrict_back,
    to_associated_instance,
    to_associated_matching,
)
from matchstab.concepts import check_concept
from matchstab.deterministic import check_weakly_stable_det
from matchstab.instance import ModelTier, classify_tier, parse_instance, render_instance
from matchstab.matching import RandomMatching, all_assignments, from_assignment, parse_matching

W = ModelTier.WEAK
G = ModelTier.GENERAL


def associated(stem):
    inst, p = load(stem)
    a_inst, amap = to_associated_instance(inst)
    return inst, p, a_inst, amap, to_associated_matching(p, amap)


@pytest.mark.parametrize("stem", ["EX3", "EX6", "EX7", "EX8"])
def test_golden_companions(stem):
    _, _, a_inst, _, a_p = associated(stem)
    golden = parse_instance(data_text(f"{stem}.assoc.inst.txt"))
    assert a_inst == golden
    assert a_p == parse_matching(data_text(f"{stem}.assoc.match.txt"), golden)


def test_companion_shape_and_labels():
    inst, p, a_inst, amap, a_p = associated("EX3")
    assert (a_inst.n, a_inst.m) == (inst.n + inst.m, inst.n + inst.m)
    assert amap.dummy_agents == ("d_x", "d_y")
    assert amap.null_objects == ("phi_1", "phi_2", "phi_3")
    assert classify_tier(a_inst) <= W
    assert a_p.is_bistochastic()


def test_label_clash_gets_fresh_name():
    inst = parse_instance("agents: d_x\nobjects: x\npref d_x: x > @\nprio x: d_x > @\n")
    a_inst, amap = to_associated_instance(inst)
    assert len(set(a_inst.agent_labels)) == 2
    assert amap.dummy_agents == ("d_x_",)


def test_respect_predicates_on_examples():
    inst, p, _, amap, a_p = associated("EX6")
    assert not respects_non_wastefulness(p, a_p, amap)
    assert respects_individual_rationality(p, a_p, amap)
    inst, p, _, amap, a_p = associated("EX8")
    assert respects_non_wastefulness(p, a_p, amap)
    assert not respects_individual_rationality(p, a_p, amap)


def test_foreign_companion_matching_is_rejected():
    _, p, _, amap, a_p = associated("EX3")
    other = RandomMatching(tuple(tuple(F(1) if i == o else F(0) for o in range(5)) for i in range(5)))
    with pytest.raises(ValueError):
        respects_non_wastefulness(p, other, amap)
    with pytest.raises(ValueError):
        to_associated_matching(RandomMatching.zeros(2, 2), amap)
    with pytest.raises(ValueError):
        restrict_back(RandomMatching.zeros(2, 2), amap)


def test_empty_single_pair_gives_antidiagonal():
    inst = parse_instance("agents: 1\nobjects: x\npref 1: x > @\nprio x: 1 > @\n")
    a_inst, amap = to_associated_instance(inst)
    a_p = to_associated_matching(RandomMatching.zeros(1, 1), amap)
    assert a_p.cells == ((0, 1), (1, 0))


def test_companion_claim_example():
    inst, p, a_inst, _, a_p = associated("EX7")
    assert check_concept(inst, p, "claimwise", G).holds
    v = check_concept(a_inst, a_p, "claimwise", W)
    assert not v.holds
    names = (a_inst.agent_labels[v.witness.agent], a_inst.agent_labels[v.witness.other_agent],
             a_inst.object_labels[v.witness.obj])
    assert names == ("d_x", "d_z", "phi_2")


@given(instance_and_matching(G, 4, 4, 4))
def test_restrict_back_inverts(pair):
    inst, p = pair
    _, amap = to_associated_instance(inst)
    assert restrict_back(to_associated_matching(p, amap), amap) == p


@given(instances(G, 4, 4))
def test_companion_is_square_and_complete(inst):
    a_inst, _ = to_associated_instance(inst)
    assert classify_tier(a_inst) <= W
    assert all(all(row) for row in a_inst.acceptable)
    assert parse_instance(render_instance(a_inst)) == a_inst


@given(instances(G, 4, 4))
def test_deterministic_stability_is_preserved(inst):
    a_inst, amap = to_associated_instance(inst)
    for a in all_assignments(inst.n, inst.m, G):
        q = from_assignment(a, inst.m)
        a_q = to_associated_matching(q, amap)
        assert (check_weakly_stable_det(inst, q, G) is None) == (check_weakly_stable_det(a_inst, a_q, W) is None)


@given(instance_and_matching(G, 3, 3, 3))
def test_concepts_transfer_through_companion(pair):
    inst, p = pair
    a_inst, amap = to_associated_instance(inst)
    a_p = to_associated_matching(p, amap)
    rnw = respects_non_wastefulness(p, a_p, amap)
    rir = respects_individual_rationality(p, a_p, amap)

    def both(c):
        return check_concept(inst, p, c, G).holds, check_concept(a_inst, a_p, c, W, 16).holds

    orig, comp = both("ex_ante")
    assert orig == comp
    for c in ("ex_post", "robust_ex_post", "fractional"):
        orig, comp = both(c)
        assert orig == (comp and rnw), c
    orig, comp = both("claimwise")
    if comp and rnw and rir:
        assert orig
