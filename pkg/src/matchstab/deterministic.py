"""No envy, non-wastefulness, individual rationality and weak stability."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .contour import agent_at_least
from .instance import NULL, NULL_LABEL, Instance, ModelTier, resolve_tier
from .matching import ONE, ZERO, RandomMatching, assignment, from_assignment


@dataclass(frozen=True)
class Witness:
    """A concrete violation: who is involved and the offending values."""

    kind: str
    agent: int | None = None
    other_agent: int | None = None
    obj: int | None = None
    other_obj: int | None = None
    values: tuple[Fraction, ...] = ()

    def participants(self) -> tuple:
        return (self.agent, self.other_agent, self.obj, self.other_obj)

    def to_dict(self, inst: Instance) -> dict:
        d: dict = {"kind": self.kind}
        if self.agent is not None:
            d["agent"] = inst.agent_label(self.agent)
        if self.other_agent is not None:
            d["other_agent"] = inst.agent_label(self.other_agent)
        if self.obj is not None:
            d["object"] = inst.object_label(self.obj)
        if self.other_obj is not None:
            d["other_object"] = inst.object_label(self.other_obj)
        d["values"] = [str(v) for v in self.values]
        return d

    @classmethod
    def from_dict(cls, d: dict, inst: Instance) -> "Witness":
        def who(key, lookup):
            lab = d.get(key)
            if lab is None:
                return None
            return NULL if lab == NULL_LABEL else lookup(lab)

        return cls(
            d["kind"],
            who("agent", inst.agent_index),
            who("other_agent", inst.agent_index),
            who("object", inst.object_index),
            who("other_object", inst.object_index),
            tuple(Fraction(v) for v in d.get("values", ())),
        )


def _holders(a: Sequence[int], m: int) -> list[int]:
    h = [NULL] * m
    for i, o in enumerate(a):
        if o != NULL:
            h[o] = i
    return h


def _envy(inst: Instance, a: Sequence[int], tier: ModelTier) -> Witness | None:
    pr, qr = inst.pref_rank, inst.prio_rank
    for i in range(inst.n):
        mine = a[i]
        for j in range(inst.n):
            o = a[j]
            if o == NULL or i == j:
                continue
            if qr[o][i] >= qr[o][j]:
                continue
            if tier == ModelTier.GENERAL:
                # i holds nothing at least as good as o, and o is worth having
                if inst.acceptable[i][o] and (mine == NULL or pr[i][mine] > pr[i][o]):
                    return Witness("envy", i, j, o, mine, (ZERO, ONE))
            elif mine != NULL and pr[i][o] < pr[i][mine]:
                return Witness("envy", i, j, o, mine, (ONE, ONE))
    return None


def _irrational(inst: Instance, a: Sequence[int]) -> Witness | None:
    for i, o in enumerate(a):
        if o != NULL and not inst.acceptable[i][o]:
            return Witness("irrationality", i, None, o, None, (ONE,))
    return None


def _block(inst: Instance, a: Sequence[int]) -> Witness | None:
    holder = _holders(a, inst.m)
    pr, qr = inst.pref_rank, inst.prio_rank
    for i in range(inst.n):
        mine = a[i]
        for o in range(inst.m):
            if not inst.acceptable[i][o]:
                continue
            if mine != NULL and pr[i][mine] <= pr[i][o]:
                continue
            h = holder[o]
            if h == NULL or qr[o][h] > qr[o][i]:
                return Witness("block", i, None if h == NULL else h, o, mine, (ZERO, ZERO))
    return None


def stability_witness(inst: Instance, a: Sequence[int], tier: ModelTier) -> Witness | None:
    if tier <= ModelTier.WEAK:
        return _envy(inst, a, tier)
    return _irrational(inst, a) or _block(inst, a)


def is_weakly_stable_assignment(inst: Instance, a: Sequence[int], tier: ModelTier) -> bool:
    return stability_witness(inst, a, tier) is None


def check_no_envy(inst: Instance, q: RandomMatching, tier: ModelTier | str | None = None) -> Witness | None:
    """Lexicographically least (i, j, o, o') justified-envy tuple, or None."""
    return _envy(inst, assignment(q), resolve_tier(inst, tier))


def check_non_wasteful(inst: Instance, p: RandomMatching) -> Witness | None:
    """First acceptable pair where i wants more of o and o is not fully allocated."""
    for i in range(inst.n):
        for o in range(inst.m):
            if not inst.acceptable[i][o]:
                continue
            up = agent_at_least(inst, p, i, o)
            if up < 1:
                col = p.col_sum(o)
                if col < 1:
                    return Witness("waste", i, None, o, None, (up, col))
    return None


def check_individually_rational(inst: Instance, p: RandomMatching) -> Witness | None:
    for i in range(inst.n):
        for o in range(inst.m):
            if p.cells[i][o] > 0 and not inst.acceptable[i][o]:
                return Witness("irrationality", i, None, o, None, (p.cells[i][o],))
    return None


def check_weakly_stable_det(inst: Instance, q: RandomMatching, tier: ModelTier | str | None = None) -> Witness | None:
    return stability_witness(inst, assignment(q), resolve_tier(inst, tier))


def _strict_list(order, size: int) -> list[int]:
    """Acceptable entities, ties broken by index."""
    return [e for e in order.above_null() if e < size]


def deferred_acceptance(inst: Instance, proposing: str = "agents") -> RandomMatching:
    """Gale-Shapley after breaking every tie in favour of the smaller index."""
    if proposing not in ("agents", "objects"):
        raise ValueError("proposing must be 'agents' or 'objects'")
    if proposing == "agents":
        lists = [_strict_list(w, inst.m) for w in inst.prefs]
        key = [[(inst.prio_rank[o][i], i) for i in range(inst.n)] for o in range(inst.m)]
        ok = [[inst.prio_rank[o][i] < inst.prio_rank[o][NULL] for i in range(inst.n)] for o in range(inst.m)]
        nprop, nrecv = inst.n, inst.m
    else:
        lists = [_strict_list(w, inst.n) for w in inst.prios]
        key = [[(inst.pref_rank[i][o], o) for o in range(inst.m)] for i in range(inst.n)]
        ok = [[inst.pref_rank[i][o] < inst.pref_rank[i][NULL] for o in range(inst.m)] for i in range(inst.n)]
        nprop, nrecv = inst.m, inst.n

    nxt = [0] * nprop
    held = [NULL] * nrecv
    free = list(range(nprop))
    while free:
        x = free.pop(0)
        while nxt[x] < len(lists[x]):
            y = lists[x][nxt[x]]
            nxt[x] += 1
            if not ok[y][x]:
                continue
            cur = held[y]
            if cur == NULL:
                held[y] = x
                x = NULL
                break
            if key[y][x] < key[y][cur]:
                held[y] = x
                x = cur
        # x is either placed (NULL) or has exhausted its list
    if proposing == "agents":
        a = [NULL] * inst.n
        for o, i in enumerate(held):
            if i != NULL:
                a[i] = o
    else:
        a = list(held)
    return from_assignment(a, inst.m)
