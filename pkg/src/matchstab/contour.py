"""Upper/lower contour sums of a matching along one entity's order."""

from __future__ import annotations

from fractions import Fraction

from .instance import Instance
from .matching import ZERO, RandomMatching


def agent_at_least(inst: Instance, p: RandomMatching, i: int, o: int) -> Fraction:
    """Probability that i gets o or something i likes at least as much."""
    r, row = inst.pref_rank[i], p.cells[i]
    return sum((row[k] for k in range(inst.m) if r[k] <= r[o]), ZERO)


def agent_better(inst: Instance, p: RandomMatching, i: int, o: int) -> Fraction:
    r, row = inst.pref_rank[i], p.cells[i]
    return sum((row[k] for k in range(inst.m) if r[k] < r[o]), ZERO)


def agent_worse(inst: Instance, p: RandomMatching, i: int, o: int) -> Fraction:
    """Probability that i gets a real object strictly worse than o."""
    r, row = inst.pref_rank[i], p.cells[i]
    return sum((row[k] for k in range(inst.m) if r[k] > r[o]), ZERO)


def object_at_least(inst: Instance, p: RandomMatching, i: int, o: int) -> Fraction:
    """Share of o held by agents with priority at least that of i."""
    r = inst.prio_rank[o]
    return sum((p.cells[j][o] for j in range(inst.n) if r[j] <= r[i]), ZERO)


def object_better(inst: Instance, p: RandomMatching, i: int, o: int) -> Fraction:
    r = inst.prio_rank[o]
    return sum((p.cells[j][o] for j in range(inst.n) if r[j] < r[i]), ZERO)


def object_worse(inst: Instance, p: RandomMatching, i: int, o: int) -> Fraction:
    r = inst.prio_rank[o]
    return sum((p.cells[j][o] for j in range(inst.n) if r[j] > r[i]), ZERO)

