"""Worked instances with known verdicts, shipped as package data.

Every case pairs an instance file with a matching file and a table of
expected outcomes. Keys are either concept names (evaluated on the case's
own tier), ``assoc.<concept>`` (evaluated on the square companion under the
weak-order tier), or one of the structural checks handled by ``evaluate``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from importlib.resources import files

from .association import (
    respects_individual_rationality,
    respects_non_wastefulness,
    restrict_back,
    to_associated_instance,
    to_associated_matching,
)
from .concepts import CONCEPTS, check_claimwise, check_concept, check_fractional
from .decomposition import (
    decompose_over,
    enumerate_realizable,
    vertex_decompositions,
)
from .deterministic import check_no_envy, check_weakly_stable_det, deferred_acceptance
from .instance import NULL, Instance, ModelTier, parse_instance
from .matching import RandomMatching, assignment, enumerate_deterministic, parse_matching, slack

CORPUS_CAP = 16


def _read(name: str) -> str:
    return (files("matchstab") / "data" / name).read_text(encoding="utf-8")


def labelled(inst: Instance, q: RandomMatching) -> tuple[str, ...]:
    """Object label per agent for a deterministic matching, '@' when unmatched."""
    return tuple("@" if o == NULL else inst.object_labels[o] for o in assignment(q))


@dataclass(frozen=True, eq=False)
class CorpusCase:
    id: str
    instance: Instance
    matching: RandomMatching
    tier: ModelTier
    expected: dict
    summary: str
    witnesses: dict = field(default_factory=dict)
    files: tuple[str, str] = ("", "")


@dataclass(frozen=True)
class Outcome:
    case: str
    key: str
    expected: object
    actual: object
    ok: bool
    witness: dict | None = None

    def line(self) -> str:
        mark = "ok  " if self.ok else "FAIL"
        extra = f"  witness={self.witness}" if self.witness else ""
        return f"{mark} {self.case:7s} {self.key:34s} expected={self.expected} actual={self.actual}{extra}"


def _case(inst_file, match_file, tier, summary, expected, witnesses=None):
    return dict(inst=inst_file, match=match_file, tier=tier, summary=summary,
                expected=expected, witnesses=witnesses or {})


_B, _W, _G = ModelTier.BASE, ModelTier.WEAK, ModelTier.GENERAL

_CASES = {
    "EX1": _case("EX1.inst.txt", "EX1.match.txt", _B, "four stable matchings, ex-ante stable mixture", {
        "ex_ante": True,
        "af_fractional": True,
        "robust_ex_post": True,
        "ex_post": True,
        "sd_strong": True,
        "stable_set": frozenset({("w", "x", "y", "z"), ("w", "x", "z", "y"),
                                 ("x", "w", "y", "z"), ("x", "w", "z", "y")}),
        "stable_decompositions": frozenset({
            frozenset({(("w", "x", "y", "z"), "1/2"), (("x", "w", "z", "y"), "1/2")}),
            frozenset({(("w", "x", "z", "y"), "1/2"), (("x", "w", "y", "z"), "1/2")}),
        }),
    }),
    "P4": _case("P4.inst.txt", "P4.match.txt", _B, "robust ex-post but not ex-ante", {
        "robust_ex_post": True,
        "ex_ante": False,
        "af_fractional": False,
        "sd_strong": False,
        "ex_post": True,
        "realizable_set": frozenset({("x", "y", "z"), ("z", "x", "y")}),
        "da.agents": ("x", "y", "z"),
        "da.objects": ("z", "x", "y"),
    }, witnesses={
        "ex_ante": {"agent": "1", "other_agent": "2", "object": "y", "other_object": "z"},
        "af_fractional": {"agent": "1", "object": "y", "values": ["1/2", "1/2"]},
    }),
    "P6": _case("P6.inst.txt", "P6.match.txt", _B, "ex-post but not robust ex-post", {
        "ex_post": True,
        "robust_ex_post": False,
        "robust_ex_post.all_parts_unstable": True,
        "ex_post.certificate": frozenset({(("x", "y", "z"), "1/3"), (("z", "x", "y"), "1/3"),
                                          (("y", "z", "x"), "1/3")}),
        "stable_set": frozenset({("x", "y", "z"), ("z", "x", "y"), ("y", "z", "x")}),
    }),
    "P10": _case("P10.inst.txt", "P10.match.txt", _B, "claimwise but not fractional", {
        "claimwise": True,
        "fractional": False,
        "ex_post": False,
        "da.objects": ("z", "x", "y"),
    }, witnesses={
        "fractional": {"agent": "2", "object": "x", "values": ["2/3", "1/3"]},
    }),
    "P16": _case("P16.inst.txt", "P16.match.txt", _W, "weak orders: fractional but not ex-post", {
        "fractional": True,
        "ex_post": False,
        "realizable_set": frozenset({("x", "z", "y"), ("z", "y", "x")}),
    }),
    "P33": _case("P33.inst.txt", "P33.match.txt", _B, "weakly sd-stable but not claimwise", {
        "sd_weak": True,
        "claimwise": False,
    }, witnesses={
        "claimwise": {"agent": "2", "other_agent": "3", "object": "x", "values": ["1/2", "1/4"]},
    }),
    "EX2": _case("EX2.inst.txt", "EX2.match.txt", _G, "wasteful mixture meeting the inequalities", {
        "non_wasteful": False,
        "individually_rational": True,
        "fractional_inequalities": True,
    }),
    "EX3": _case("EX3.inst.txt", "EX3.match.txt", _G, "substochastic companion golden", {
        "assoc.golden_instance": True,
        "assoc.golden_matching": True,
        "assoc.roundtrip": True,
        "slack": (("1/6", "1/2", "1/3"), ("0", "0")),
    }),
    "EX4-p1": _case("EX4.inst.txt", "EX4-p1.match.txt", _G, "axiom independence", {
        "det_no_envy": True, "individually_rational": True, "non_wasteful": False,
    }),
    "EX4-p2": _case("EX4.inst.txt", "EX4-p2.match.txt", _G, "axiom independence", {
        "det_no_envy": True, "individually_rational": False, "non_wasteful": True,
    }),
    "EX4-p3": _case("EX4.inst.txt", "EX4-p3.match.txt", _G, "axiom independence", {
        "det_no_envy": False, "individually_rational": True, "non_wasteful": True,
    }),
    "EX4": _case("EX4.inst.txt", "EX4-p4.match.txt", _G, "axiom independence", {
        "det_no_envy": True, "individually_rational": True, "non_wasteful": True,
        "det_weakly_stable": True,
        "stable_set": frozenset({("@", "x")}),
    }),
    "EX5": _case("EX5.inst.txt", "EX5.match.txt", _G, "wasteful mixture of stable matchings", {
        "non_wasteful": False,
        "individually_rational": True,
        "fractional_inequalities": True,
        "stable_decomposition": True,
        "ex_post": False,
        "realizable_set": frozenset({("x", "z", "@"), ("z", "y", "x")}),
    }, witnesses={
        "non_wasteful": {"agent": "1", "object": "y"},
    }),
    "EX5-q1": _case("EX5.inst.txt", "EX5-q1.match.txt", _G, "wasteful mixture of stable matchings", {
        "det_weakly_stable": True,
    }),
    "EX5-q2": _case("EX5.inst.txt", "EX5-q2.match.txt", _G, "wasteful mixture of stable matchings", {
        "det_weakly_stable": True,
    }),
    "EX6": _case("EX6.inst.txt", "EX6.match.txt", _G, "companion fractional, NW not respected", {
        "non_wasteful": False,
        "fractional": False,
        "assoc.fractional": True,
        "respects_nw": False,
        "respects_ir": True,
        "assoc.golden_instance": True,
        "assoc.golden_matching": True,
    }),
    "EX7": _case("EX7.inst.txt", "EX7.match.txt", _G, "claimwise, companion not claimwise", {
        "claimwise": True,
        "assoc.claimwise": False,
        "respects_nw": True,
        "respects_ir": True,
        "assoc.golden_instance": True,
        "assoc.golden_matching": True,
        "assoc.roundtrip": True,
    }, witnesses={
        "assoc.claimwise": {"agent": "d_x", "other_agent": "d_z", "object": "phi_2"},
    }),
    "EX8": _case("EX8.inst.txt", "EX8.match.txt", _G, "companion claimwise, IR not respected", {
        "individually_rational": False,
        "non_wasteful": True,
        "claimwise_inequalities": True,
        "assoc.claimwise": True,
        "respects_ir": False,
        "assoc.golden_instance": True,
        "assoc.golden_matching": True,
    }, witnesses={
        "individually_rational": {"agent": "1", "object": "y"},
    }),
}

def corpus() -> dict[str, CorpusCase]:
    """All shipped cases keyed by id, in declaration order."""
    out = {}
    for cid, s in _CASES.items():
        inst = parse_instance(_read(s["inst"]))
        p = parse_matching(_read(s["match"]), inst, s["tier"])
        out[cid] = CorpusCase(cid, inst, p, s["tier"], dict(s["expected"]), s["summary"],
                              dict(s["witnesses"]), (s["inst"], s["match"]))
    return out


class _Context:
    """Lazily computed side data for one case."""

    def __init__(self, case: CorpusCase, cap: int):
        self.case = case
        self.cap = cap

    @cached_property
    def assoc(self):
        inst, amap = to_associated_instance(self.case.instance)
        return inst, amap, to_associated_matching(self.case.matching, amap)

    @cached_property
    def stable(self) -> list[RandomMatching]:
        c = self.case
        return enumerate_deterministic(c.instance, True, c.tier, self.cap)

    def golden(self):
        stem = self.case.files[0].rsplit(".inst.txt", 1)[0]
        g = parse_instance(_read(f"{stem}.assoc.inst.txt"))
        return g, parse_matching(_read(f"{stem}.assoc.match.txt"), g, ModelTier.WEAK)


def _weighted(inst: Instance, d) -> frozenset:
    return frozenset((labelled(inst, q), str(w)) for w, q in d.parts)


def evaluate(case: CorpusCase, key: str, cap: int = CORPUS_CAP, ctx: _Context | None = None):
    """Actual value of one expectation key, plus the witness as a label dict when there is one."""
    ctx = ctx or _Context(case, cap)
    inst, p, tier = case.instance, case.matching, case.tier

    if key.startswith("assoc.") and key[6:] in CONCEPTS:
        a_inst, _, a_p = ctx.assoc
        v = check_concept(a_inst, a_p, key[6:], ModelTier.WEAK, cap)
        return v.holds, (v.witness.to_dict(a_inst) if v.witness else None)
    if key in CONCEPTS:
        v = check_concept(inst, p, key, tier, cap)
        return v.holds, (v.witness.to_dict(inst) if v.witness else None)

    if key == "fractional_inequalities":
        v = check_fractional(inst, p, tier, require_axioms=False)
        return v.holds, (v.witness.to_dict(inst) if v.witness else None)
    if key == "claimwise_inequalities":
        v = check_claimwise(inst, p, tier, require_axioms=False)
        return v.holds, (v.witness.to_dict(inst) if v.witness else None)
    if key == "det_no_envy":
        w = check_no_envy(inst, p, tier)
        return w is None, (w.to_dict(inst) if w else None)
    if key == "det_weakly_stable":
        w = check_weakly_stable_det(inst, p, tier)
        return w is None, (w.to_dict(inst) if w else None)
    if key == "stable_set":
        return frozenset(labelled(inst, q) for q in ctx.stable), None
    if key == "realizable_set":
        return frozenset(labelled(inst, q) for q in enumerate_realizable(p, tier, cap)), None
    if key == "stable_decompositions":
        return frozenset(_weighted(inst, d) for d in vertex_decompositions(ctx.stable, p)), None
    if key == "stable_decomposition":
        return decompose_over(ctx.stable, p) is not None, None
    if key == "ex_post.certificate":
        v = check_concept(inst, p, "ex_post", tier, cap)
        return (_weighted(inst, v.certificate) if v.certificate else None), None
    if key == "robust_ex_post.all_parts_unstable":
        v = check_concept(inst, p, "robust_ex_post", tier, cap)
        if v.certificate is None:
            return None, None
        return all(check_weakly_stable_det(inst, q, tier) is not None for q in v.certificate.matchings), None
    if key in ("da.agents", "da.objects"):
        return labelled(inst, deferred_acceptance(inst, key[3:])), None
    if key == "slack":
        s = slack(p)
        return (tuple(map(str, s.agent_slack)), tuple(map(str, s.object_slack))), None
    if key == "respects_nw":
        _, amap, a_p = ctx.assoc
        return respects_non_wastefulness(p, a_p, amap), None
    if key == "respects_ir":
        _, amap, a_p = ctx.assoc
        return respects_individual_rationality(p, a_p, amap), None
    if key == "assoc.golden_instance":
        return ctx.assoc[0] == ctx.golden()[0], None
    if key == "assoc.golden_matching":
        return ctx.assoc[2] == ctx.golden()[1], None
    if key == "assoc.roundtrip":
        _, amap, a_p = ctx.assoc
        return restrict_back(a_p, amap) == p, None
    raise KeyError(f"unknown expectation key {key!r}")


def _witness_ok(expected: dict | None, actual: dict | None) -> bool:
    if not expected:
        return True
    if actual is None:
        return False
    return all(actual.get(k) == v for k, v in expected.items())


def run_case(case: CorpusCase, cap: int = CORPUS_CAP) -> list[Outcome]:
    ctx = _Context(case, cap)
    out = []
    for key, want in case.expected.items():
        got, wit = evaluate(case, key, cap, ctx)
        ok = got == want and _witness_ok(case.witnesses.get(key), wit)
        out.append(Outcome(case.id, key, want, got, ok, wit))
    return out


def run_corpus(cases: dict[str, CorpusCase] | None = None, cap: int = CORPUS_CAP) -> list[Outcome]:
    cases = corpus() if cases is None else cases
    return [o for c in cases.values() for o in run_case(c, cap)]

