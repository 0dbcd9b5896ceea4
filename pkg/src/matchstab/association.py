"""Square, fully acceptable companion of a general instance.

Each object o_j gets a dummy agent d_j and each agent i a personal null
object phi_i. Agents rank their acceptable objects, then their own null
object, then the other null objects, then unacceptable objects. Dummies
rank their own object first, then the other objects, then the null objects
in the order their object ranks the corresponding agents.
"""

from __future__ import annotations

from dataclasses import dataclass

from .deterministic import check_individually_rational, check_non_wasteful
from .instance import NULL, Instance, WeakOrder
from .matching import RandomMatching, associated_square


@dataclass(frozen=True)
class AssociationMap:
    """Index bookkeeping between a general instance and its companion.

    Companion agents are the n original agents followed by the m dummies;
    companion objects are the m original objects followed by the n null
    objects.
    """

    source: Instance
    target: Instance

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def m(self) -> int:
        return self.source.m

    def dummy(self, o: int) -> int:
        return self.n + o

    def null_object(self, i: int) -> int:
        return self.m + i

    @property
    def dummy_agents(self) -> tuple[str, ...]:
        return self.target.agent_labels[self.n:]

    @property
    def null_objects(self) -> tuple[str, ...]:
        return self.target.object_labels[self.m:]


def _fresh(base: str, taken: set[str]) -> str:
    lab = base
    while lab in taken:
        lab += "_"
    taken.add(lab)
    return lab


def _split(order: WeakOrder) -> tuple[list[frozenset[int]], list[frozenset[int]]]:
    """Tiers above and below the null marker."""
    k = next(r for r, t in enumerate(order.tiers) if NULL in t)
    return list(order.tiers[:k]), list(order.tiers[k + 1:])


def to_associated_instance(inst: Instance) -> tuple[Instance, AssociationMap]:
    n, m = inst.n, inst.m
    taken = set(inst.agent_labels)
    dummies = [_fresh(f"d_{lab}", taken) for lab in inst.object_labels]
    taken_o = set(inst.object_labels)
    nulls = [_fresh(f"phi_{lab}", taken_o) for lab in inst.agent_labels]

    def phi(i):
        return m + i

    def dum(o):
        return n + o

    prefs = []
    for i, order in enumerate(inst.prefs):
        good, bad = _split(order)
        tiers = good + [frozenset([phi(i)])]
        tiers += [frozenset([phi(k)]) for k in range(n) if k != i]
        tiers += bad + [frozenset([NULL])]
        prefs.append(WeakOrder(tuple(tiers)))
    for o, order in enumerate(inst.prios):
        tiers = [frozenset([o])] + [frozenset([k]) for k in range(m) if k != o]
        tiers += [frozenset(phi(i) for i in t) for t in order.tiers if NULL not in t]
        tiers.append(frozenset([NULL]))
        prefs.append(WeakOrder(tuple(tiers)))

    prios = []
    for o, order in enumerate(inst.prios):
        good, bad = _split(order)
        tiers = good + [frozenset([dum(o)])]
        tiers += [frozenset([dum(k)]) for k in range(m) if k != o]
        tiers += bad + [frozenset([NULL])]
        prios.append(WeakOrder(tuple(tiers)))
    for i, order in enumerate(inst.prefs):
        tiers = [frozenset([i])] + [frozenset([k]) for k in range(n) if k != i]
        tiers += [frozenset(dum(o) for o in t) for t in order.tiers if NULL not in t]
        tiers.append(frozenset([NULL]))
        prios.append(WeakOrder(tuple(tiers)))

    target = Instance(
        tuple(prefs),
        tuple(prios),
        tuple(inst.agent_labels) + tuple(dummies),
        tuple(inst.object_labels) + tuple(nulls),
    )
    return target, AssociationMap(inst, target)


def to_associated_matching(p: RandomMatching, amap: AssociationMap) -> RandomMatching:
    if p.shape != (amap.n, amap.m):
        raise ValueError("matching does not fit the source instance")
    return associated_square(p)


def restrict_back(p_assoc: RandomMatching, amap: AssociationMap) -> RandomMatching:
    n, m = amap.n, amap.m
    if p_assoc.shape != (n + m, n + m):
        raise ValueError("associated matching has the wrong shape")
    return RandomMatching(tuple(row[:m] for row in p_assoc.cells[:n]), m)


def _check_pair(p: RandomMatching, p_assoc: RandomMatching, amap: AssociationMap) -> None:
    if p_assoc != to_associated_matching(p, amap):
        raise ValueError("associated matching was not derived from this matching")


def respects_non_wastefulness(p: RandomMatching, p_assoc: RandomMatching, amap: AssociationMap) -> bool:
    """No acceptable original pair (i, o) where i wants more of o and the agents leave some of o."""
    _check_pair(p, p_assoc, amap)
    src, tgt = amap.source, amap.target
    n, m = amap.n, amap.m
    result = True
    for i in range(n):
        for o in range(m):
            if not src.acceptable[i][o]:
                continue
            r = tgt.pref_rank[i]
            up = sum(p_assoc.cells[i][b] for b in range(n + m) if r[b] <= r[o])
            taken = sum(p_assoc.cells[k][o] for k in range(n))
            if up < 1 and taken < 1:
                result = False
                break
        if not result:
            break
    direct = check_non_wasteful(src, p) is None
    if result != direct:
        raise AssertionError("non-wastefulness forms disagree")
    return result


def respects_individual_rationality(p: RandomMatching, p_assoc: RandomMatching, amap: AssociationMap) -> bool:
    """No mass on an unacceptable pair, seen both directly and through the dummy/null block."""
    _check_pair(p, p_assoc, amap)
    src = amap.source
    result = all(
        p_assoc.cells[i][o] == 0 and p_assoc.cells[amap.dummy(o)][amap.null_object(i)] == 0
        for i in range(amap.n)
        for o in range(amap.m)
        if not src.acceptable[i][o]
    )
    direct = check_individually_rational(src, p) is None
    if result != direct:
        raise AssertionError("individual rationality forms disagree")
    return result
