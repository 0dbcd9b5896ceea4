"""Stability concepts for random matchings, each returning a Verdict."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .contour import (
    agent_at_least,
    agent_better,
    agent_worse,
    object_at_least,
    object_better,
    object_worse,
)
from .decomposition import Decomposition, bvn_decompose, decompose_over, enumerate_realizable
from .deterministic import (
    Witness,
    check_individually_rational,
    check_no_envy,
    check_non_wasteful,
    check_weakly_stable_det,
    stability_witness,
)
from .errors import TierError
from .instance import NULL, Instance, ModelTier, WeakOrder, classify_tier, resolve_tier
from .matching import ONE, ZERO, RandomMatching, assignment, is_deterministic, slack


CONCEPTS = (
    "ex_ante",
    "af_fractional",
    "robust_ex_post",
    "ex_post",
    "fractional",
    "fractional_dual",
    "claimwise",
    "sd_strong",
    "sd_weak",
    "non_wasteful",
    "individually_rational",
)

# Axioms for 0/1 matchings only; not part of evaluate_all.
DETERMINISTIC_CONCEPTS = ("det_no_envy", "det_weakly_stable")


@dataclass(frozen=True)
class Verdict:
    concept: str
    holds: bool
    witness: Witness | None = None
    certificate: Decomposition | None = None
    values: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self, inst: Instance) -> dict:
        d: dict = {"concept": self.concept, "holds": self.holds}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict(inst)
        if self.certificate is not None:
            d["certificate"] = self.certificate.to_json()
        if self.values:
            d["values"] = self.values
        return d

    @classmethod
    def from_dict(cls, d: dict, inst: Instance) -> "Verdict":
        w = d.get("witness")
        c = d.get("certificate")
        return cls(
            d["concept"],
            bool(d["holds"]),
            Witness.from_dict(w, inst) if w is not None else None,
            Decomposition.from_json(c) if c is not None else None,
            dict(d.get("values", {})),
        )


def _fail(concept: str, w: Witness, **values) -> Verdict:
    return Verdict(concept, False, witness=w, values=values)


def _gate(concept: str, inst: Instance, p: RandomMatching, tier: ModelTier,
          rational: bool = True, wasteless: bool = True) -> Verdict | None:
    """Generalized-tier prerequisites: individual rationality and non-wastefulness."""
    if tier != ModelTier.GENERAL:
        return None
    if rational:
        w = check_individually_rational(inst, p)
        if w is not None:
            return _fail(concept, w, reason="individually irrational")
    if wasteless:
        w = check_non_wasteful(inst, p)
        if w is not None:
            return _fail(concept, w, reason="wasteful")
    return None


def _pairs(inst: Instance, tier: ModelTier):
    for i in range(inst.n):
        for o in range(inst.m):
            if tier != ModelTier.GENERAL or inst.acceptable[i][o]:
                yield i, o


# ---------------------------------------------------------------- ex-ante

def _ex_ante_envy(inst: Instance, p: RandomMatching) -> Witness | None:
    pr, qr = inst.pref_rank, inst.prio_rank
    for i in range(inst.n):
        for j in range(inst.n):
            for o in range(inst.m):
                if not p.cells[j][o] or qr[o][i] >= qr[o][j]:
                    continue
                for o2 in range(inst.m):
                    if p.cells[i][o2] and pr[i][o] < pr[i][o2]:
                        return Witness("ex_ante_envy", i, j, o, o2, (p.cells[i][o2], p.cells[j][o]))
    return None


def _general_ex_ante_envy(inst: Instance, p: RandomMatching) -> Witness | None:
    """i wants more of an acceptable o while a lower-priority j holds some of it."""
    qr = inst.prio_rank
    for i in range(inst.n):
        for j in range(inst.n):
            for o in range(inst.m):
                if not inst.acceptable[i][o] or not p.cells[j][o] or qr[o][i] >= qr[o][j]:
                    continue
                up = agent_at_least(inst, p, i, o)
                if up < 1:
                    return Witness("ex_ante_envy", i, j, o, None, (up, p.cells[j][o]))
    return None


def check_ex_ante(inst: Instance, p: RandomMatching, tier: ModelTier | str | None = None) -> Verdict:
    tier = resolve_tier(inst, tier)
    if tier <= ModelTier.WEAK:
        w = _ex_ante_envy(inst, p)
        return Verdict("ex_ante", True) if w is None else _fail("ex_ante", w)

    verdict = _gate("ex_ante", inst, p, tier, wasteless=False)
    if verdict is None:
        verdict = Verdict("ex_ante", True)
        for i, o in _pairs(inst, tier):
            a, b = agent_at_least(inst, p, i, o), object_at_least(inst, p, i, o)
            if a < 1 and b < 1:
                verdict = _fail("ex_ante", Witness("ex_ante_block", i, None, o, None, (a, b)))
                break
    if __debug__:
        alt = (
            check_individually_rational(inst, p) is None
            and check_non_wasteful(inst, p) is None
            and _general_ex_ante_envy(inst, p) is None
        )
        assert alt == verdict.holds, "ex-ante forms disagree"
    return verdict


def check_af_fractional(inst: Instance, p: RandomMatching, tier: ModelTier | str | None = None) -> Verdict:
    """Every (acceptable) pair has the agent or the object saturated at or above the other."""
    tier = resolve_tier(inst, tier)
    for i, o in _pairs(inst, tier):
        a, b = agent_at_least(inst, p, i, o), object_at_least(inst, p, i, o)
        if a != 1 and b != 1:
            return _fail("af_fractional", Witness("af_block", i, None, o, None, (a, b)))
    return Verdict("af_fractional", True)


# ---------------------------------------------------------------- fractional and claimwise

def _agent_side(inst: Instance, p: RandomMatching, i: int, o: int, tier: ModelTier) -> Fraction:
    """Left side: what i already gets that it likes at least as much as o, o itself excluded."""
    if tier == ModelTier.BASE:
        return agent_better(inst, p, i, o)
    return agent_at_least(inst, p, i, o) - p.cells[i][o]


def check_fractional(inst: Instance, p: RandomMatching, tier: ModelTier | str | None = None,
                     require_axioms: bool = True) -> Verdict:
    """Pairwise inequality system; with require_axioms=False the IR/NW prerequisites are skipped."""
    tier = resolve_tier(inst, tier)
    gate = _gate("fractional", inst, p, tier) if require_axioms else None
    if gate is not None:
        return gate
    free = slack(p).object_slack
    for i, o in _pairs(inst, tier):
        lhs = _agent_side(inst, p, i, o, tier)
        rhs = object_worse(inst, p, i, o)
        if tier == ModelTier.GENERAL:
            rhs += free[o]
        if rhs > lhs:
            return _fail("fractional", Witness("fractional", i, None, o, None, (rhs, lhs)))
    return Verdict("fractional", True)


def check_fractional_dual(inst: Instance, p: RandomMatching, tier: ModelTier | str | None = None) -> Verdict:
    """Same concept, evaluated from the objects' side."""
    tier = resolve_tier(inst, tier)
    gate = _gate("fractional_dual", inst, p, tier)
    if gate is not None:
        return gate
    free = slack(p).agent_slack
    for i, o in _pairs(inst, tier):
        if tier == ModelTier.BASE:
            lhs = object_better(inst, p, i, o)
        else:
            lhs = object_at_least(inst, p, i, o) - p.cells[i][o]
        rhs = agent_worse(inst, p, i, o)
        if tier == ModelTier.GENERAL:
            rhs += free[i]
        if rhs > lhs:
            return _fail("fractional_dual", Witness("fractional_dual", i, None, o, None, (rhs, lhs)))
    return Verdict("fractional_dual", True)


def check_claimwise(inst: Instance, p: RandomMatching, tier: ModelTier | str | None = None,
                    require_axioms: bool = True) -> Verdict:
    """No agent i has a claim against a lower-priority j over some object o."""
    tier = resolve_tier(inst, tier)
    gate = _gate("claimwise", inst, p, tier) if require_axioms else None
    if gate is not None:
        return gate
    free = slack(p).object_slack
    qr = inst.prio_rank
    general = tier == ModelTier.GENERAL
    for i in range(inst.n):
        for j in range(inst.n):
            for o in range(inst.m):
                if qr[o][i] >= qr[o][j] or (general and not inst.acceptable[i][o]):
                    continue
                lhs = _agent_side(inst, p, i, o, tier)
                rhs = p.cells[j][o] + (free[o] if general else ZERO)
                if rhs > lhs:
                    return _fail("claimwise", Witness("claim", i, j, o, None, (rhs, lhs)))
    return Verdict("claimwise", True)


def equality_sum(inst: Instance, p: RandomMatching, i: int, o: int) -> Fraction:
    """p(i,o) plus i's better objects plus o's higher-priority agents."""
    return p.cells[i][o] + agent_better(inst, p, i, o) + object_better(inst, p, i, o)


# ---------------------------------------------------------------- ex-post and robust ex-post

def _is_stable(inst: Instance, q: RandomMatching, tier: ModelTier) -> bool:
    return stability_witness(inst, assignment(q), tier) is None


def check_ex_post(inst: Instance, p: RandomMatching, tier: ModelTier | str | None = None,
                  cap: int | None = None) -> Verdict:
    """Decomposable into weakly stable deterministic matchings (non-wasteful first when generalized)."""
    tier = resolve_tier(inst, tier)
    gate = _gate("ex_post", inst, p, tier, rational=False)
    if gate is not None:
        return gate
    stable = [q for q in enumerate_realizable(p, tier, cap) if _is_stable(inst, q, tier)]
    cert = decompose_over(stable, p) if stable else None
    if cert is None:
        verdict = Verdict("ex_post", False, values={
            "reason": "no convex combination of weakly stable matchings equals p",
            "stable_candidates": len(stable),
        })
    else:
        verdict = Verdict("ex_post", True, certificate=cert)
    if __debug__ and tier == ModelTier.BASE:
        assert check_fractional(inst, p, tier).holds == verdict.holds, "ex-post and fractional disagree"
    return verdict


def _decomposition_with(p: RandomMatching, q: RandomMatching) -> Decomposition:
    """A decomposition of p giving q positive weight; q must be realizable."""
    a = assignment(q)
    s = slack(p)
    n, m = p.shape
    caps = [p.cells[i][o] for i, o in enumerate(a) if o != NULL]
    caps += [s.agent_slack[i] for i, o in enumerate(a) if o == NULL]
    matched = {o for o in a if o != NULL}
    caps += [s.object_slack[o] for o in range(m) if o not in matched]
    lam = min(caps) if caps else ONE
    if lam >= 1:
        return Decomposition(((ONE, q),))
    rest = RandomMatching(tuple(
        tuple((p.cells[i][o] - lam * q.cells[i][o]) / (1 - lam) for o in range(m)) for i in range(n)
    ), m)
    parts: list[tuple[Fraction, RandomMatching]] = [(lam, q)]
    for w, r in bvn_decompose(rest).parts:
        w = w * (1 - lam)
        if r == q:
            parts[0] = (parts[0][0] + w, q)
        else:
            parts.append((w, r))
    return Decomposition(tuple(parts))


def check_robust_ex_post(inst: Instance, p: RandomMatching, tier: ModelTier | str | None = None,
                         cap: int | None = None) -> Verdict:
    """Every deterministic matching that can appear in a decomposition is weakly stable."""
    tier = resolve_tier(inst, tier)
    gate = _gate("robust_ex_post", inst, p, tier, rational=False)
    if gate is not None:
        return gate
    realizable = enumerate_realizable(p, tier, cap)
    unstable = [q for q in realizable if not _is_stable(inst, q, tier)]
    if not unstable:
        return Verdict("robust_ex_post", True, values={"realizable": len(realizable)})
    cert = decompose_over(unstable, p)
    if cert is not None:
        q = cert.matchings[0]
        note = "every part is unstable"
    else:
        q = unstable[0]
        cert = _decomposition_with(p, q)
        note = "decomposition containing an unstable part"
    w = stability_witness(inst, assignment(q), tier)
    return Verdict("robust_ex_post", False, witness=w, certificate=cert, values={
        "reason": note,
        "unstable_matching": [[str(x) for x in row] for row in q.cells],
    })


# ---------------------------------------------------------------- stochastic dominance

class SD(enum.Enum):
    NO = "no"
    WEAKLY = "weakly"
    STRICTLY = "strictly"


def sd_dominates(order: WeakOrder, a: Sequence[Fraction], b: Sequence[Fraction]) -> SD:
    """Does a first-order stochastically dominate b along a strict order?"""
    if not order.is_strict():
        raise TierError("stochastic dominance needs a strict order")
    ca = cb = ZERO
    for e in order.flat():
        if e == NULL:
            continue
        ca += a[e]
        cb += b[e]
        if ca < cb:
            return SD.NO
    return SD.WEAKLY if list(a) == list(b) else SD.STRICTLY


def check_sd_stability(inst: Instance, p: RandomMatching, strength: str = "strong") -> Verdict:
    """Strong: no pair weakly sd-blocks p. Weak: no pair strongly sd-blocks p."""
    if classify_tier(inst) != ModelTier.BASE:
        raise TierError("sd-stability is only defined for strict, complete, balanced instances")
    if strength not in ("strong", "weak"):
        raise ValueError("strength must be 'strong' or 'weak'")
    concept = f"sd_{strength}"
    for i in range(inst.n):
        for o in range(inst.m):
            if strength == "strong":
                # the unit vector on o is not sd-beaten on either side
                a, b = agent_at_least(inst, p, i, o), object_at_least(inst, p, i, o)
                if a < 1 and b < 1:
                    return _fail(concept, Witness("sd_weak_block", i, None, o, None, (a, b)))
            else:
                # the unit vector on o sd-beats p on both sides
                a, b = agent_better(inst, p, i, o), object_better(inst, p, i, o)
                if a == 0 and b == 0 and p.cells[i][o] < 1:
                    return _fail(concept, Witness("sd_strong_block", i, None, o, None, (a, b, p.cells[i][o])))
    return Verdict(concept, True)


# ---------------------------------------------------------------- dispatch

def check_concept(inst: Instance, p: RandomMatching, concept: str,
                  tier: ModelTier | str | None = None, cap: int | None = None) -> Verdict:
    concept = concept.replace("-", "_")
    if concept == "ex_ante":
        return check_ex_ante(inst, p, tier)
    if concept == "af_fractional":
        return check_af_fractional(inst, p, tier)
    if concept == "robust_ex_post":
        return check_robust_ex_post(inst, p, tier, cap)
    if concept == "ex_post":
        return check_ex_post(inst, p, tier, cap)
    if concept == "fractional":
        return check_fractional(inst, p, tier)
    if concept == "fractional_dual":
        return check_fractional_dual(inst, p, tier)
    if concept == "claimwise":
        return check_claimwise(inst, p, tier)
    if concept in ("sd_strong", "sd_weak"):
        resolve_tier(inst, tier)
        return check_sd_stability(inst, p, concept[3:])
    if concept == "non_wasteful":
        w = check_non_wasteful(inst, p)
        return Verdict(concept, w is None, witness=w)
    if concept == "individually_rational":
        w = check_individually_rational(inst, p)
        return Verdict(concept, w is None, witness=w)
    if concept in DETERMINISTIC_CONCEPTS:
        if not is_deterministic(p):
            raise ValueError(f"{concept} needs a deterministic matching")
        check = check_no_envy if concept == "det_no_envy" else check_weakly_stable_det
        w = check(inst, p, tier)
        return Verdict(concept, w is None, witness=w)
    raise ValueError(f"unknown concept {concept!r}")


def evaluate_all(inst: Instance, p: RandomMatching, tier: ModelTier | str | None = None,
                 cap: int | None = None) -> dict[str, Verdict]:
    """Every concept applicable under the tier (sd-stability only for Base)."""
    tier = resolve_tier(inst, tier)
    out = {}
    for c in CONCEPTS:
        if c.startswith("sd_") and tier != ModelTier.BASE:
            continue
        out[c] = check_concept(inst, p, c, tier, cap)
    return out
