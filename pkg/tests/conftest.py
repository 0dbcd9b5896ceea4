from __future__ import annotations

from fractions import Fraction
from importlib.resources import files

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from matchstab.instance import NULL, Instance, ModelTier, WeakOrder, parse_instance
from matchstab.matching import all_assignments, from_assignment, mix, parse_matching

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def data_text(name: str) -> str:
    return (files("matchstab") / "data" / name).read_text(encoding="utf-8")


def load(stem: str, match: str | None = None, tier=None):
    inst = parse_instance(data_text(f"{stem}.inst.txt"))
    p = parse_matching(data_text(f"{match or stem}.match.txt"), inst, tier)
    return inst, p


@pytest.fixture
def loader():
    return load


@st.composite
def weak_orders(draw, size: int, tier: ModelTier) -> WeakOrder:
    perm = draw(st.permutations(range(size)))
    if tier == ModelTier.GENERAL:
        keep = draw(st.lists(st.booleans(), min_size=size, max_size=size))
        good = [x for x, k in zip(perm, keep) if k]
        bad = [x for x, k in zip(perm, keep) if not k]
    else:
        good, bad = list(perm), []

    def tiered(seq):
        if tier == ModelTier.BASE or not seq:
            return [frozenset([x]) for x in seq]
        cuts = draw(st.lists(st.booleans(), min_size=len(seq) - 1, max_size=len(seq) - 1))
        out = [[seq[0]]]
        for x, merge in zip(seq[1:], cuts):
            if merge:
                out[-1].append(x)
            else:
                out.append([x])
        return [frozenset(t) for t in out]

    return WeakOrder(tuple(tiered(good) + [frozenset([NULL])] + tiered(bad)))


@st.composite
def instances(draw, tier: ModelTier, max_n: int = 3, max_m: int | None = None, min_n: int = 1) -> Instance:
    n = draw(st.integers(min_n, max_n))
    m = n if tier <= ModelTier.WEAK else draw(st.integers(1, max_m or max_n))
    prefs = tuple(draw(weak_orders(m, tier)) for _ in range(n))
    prios = tuple(draw(weak_orders(n, tier)) for _ in range(m))
    return Instance(prefs, prios)


@st.composite
def matchings(draw, n: int, m: int, tier: ModelTier, max_parts: int = 3):
    pool = all_assignments(n, m, tier)
    k = draw(st.integers(1, max_parts))
    picks = [draw(st.sampled_from(pool)) for _ in range(k)]
    weights = [draw(st.integers(1, 5)) for _ in range(k)]
    total = sum(weights)
    return mix((Fraction(w, total), from_assignment(a, m)) for w, a in zip(weights, picks))


@st.composite
def instance_and_matching(draw, tier: ModelTier, max_n: int = 3, max_m: int | None = None, max_parts: int = 3):
    inst = draw(instances(tier, max_n, max_m))
    return inst, draw(matchings(inst.n, inst.m, tier, max_parts))
