"""Randomised audit of the implications between stability concepts.

Instances and matchings come from a seeded PCG64 stream keyed by
(seed, tier, index), so every generated pair can be rebuilt on its own.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .association import (
    respects_individual_rationality,
    respects_non_wastefulness,
    to_associated_instance,
    to_associated_matching,
)
from .concepts import (
    _general_ex_ante_envy,
    check_claimwise,
    check_concept,
    check_fractional,
    equality_sum,
    evaluate_all,
)
from .corpus import corpus, run_corpus
from .deterministic import (
    check_individually_rational,
    check_non_wasteful,
    check_weakly_stable_det,
    is_weakly_stable_assignment,
)
from .instance import NULL, Instance, ModelTier, WeakOrder, classify_tier, render_instance
from .matching import (
    RandomMatching,
    all_assignments,
    from_assignment,
    is_deterministic,
    mix,
    render_matching,
)

TIERS = (ModelTier.BASE, ModelTier.WEAK, ModelTier.GENERAL)

# Concepts compared on the companion instance.
CHAIN = ("ex_ante", "robust_ex_post", "ex_post", "fractional", "claimwise")

# (holds, fails) pairs that no implication forces, per tier.
RED_ARROWS = {
    ModelTier.BASE: (("robust_ex_post", "ex_ante"), ("ex_post", "robust_ex_post"),
                     ("claimwise", "fractional")),
    ModelTier.WEAK: (("robust_ex_post", "ex_ante"), ("ex_post", "robust_ex_post"),
                     ("fractional", "ex_post"), ("claimwise", "fractional")),
    ModelTier.GENERAL: (("robust_ex_post", "ex_ante"), ("ex_post", "robust_ex_post"),
                        ("fractional", "ex_post"), ("claimwise", "fractional"),
                        ("claimwise", "assoc.claimwise")),
}


def _prob(x) -> Fraction:
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise ValueError(f"probability {x} outside [0, 1]")
    return x


@dataclass(frozen=True)
class AuditConfig:
    seed: int = 0
    count: int = 500
    n_range: tuple[int, int] = (1, 4)
    m_range: tuple[int, int] = (1, 4)
    tie_prob: Fraction = Fraction(1, 4)
    unacc_prob: Fraction = Fraction(1, 4)
    parts: tuple[int, int] = (1, 4)
    stable_bias: Fraction = Fraction(1, 3)
    rational_bias: Fraction = Fraction(1, 2)
    tiers: tuple[ModelTier, ...] = TIERS
    transform: bool = True
    include_corpus: bool = False
    cap: int = 16

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        if self.count < 0:
            raise ValueError("count must be non-negative")
        for name in ("n_range", "m_range", "parts"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} must be a non-empty range of positive integers")
        for name in ("tie_prob", "unacc_prob", "stable_bias", "rational_bias"):
            object.__setattr__(self, name, _prob(getattr(self, name)))
        object.__setattr__(self, "tiers", tuple(ModelTier(t) for t in self.tiers))


def _rng(cfg: AuditConfig, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, *key])))


def _chance(rng: np.random.Generator, prob: Fraction) -> bool:
    """Exact Bernoulli draw for a rational probability."""
    return int(rng.integers(prob.denominator)) < prob.numerator


def _sizes(cfg: AuditConfig, tier: ModelTier, rng) -> tuple[int, int]:
    n = int(rng.integers(cfg.n_range[0], cfg.n_range[1] + 1))
    if tier <= ModelTier.WEAK:
        return n, n
    return n, int(rng.integers(cfg.m_range[0], cfg.m_range[1] + 1))


def _random_order(rng, size: int, tier: ModelTier, cfg: AuditConfig) -> WeakOrder:
    perm = [int(x) for x in rng.permutation(size)]
    if tier == ModelTier.GENERAL:
        keep = [_chance(rng, 1 - cfg.unacc_prob) for _ in perm]
        good = [x for x, k in zip(perm, keep) if k]
        bad = [x for x, k in zip(perm, keep) if not k]
    else:
        good, bad = perm, []

    def tiered(seq):
        out: list[list[int]] = []
        for x in seq:
            if out and tier != ModelTier.BASE and _chance(rng, cfg.tie_prob):
                out[-1].append(x)
            else:
                out.append([x])
        return [frozenset(t) for t in out]

    return WeakOrder(tuple(tiered(good) + [frozenset([NULL])] + tiered(bad)))


def gen_instance(cfg: AuditConfig, tier: ModelTier, index: int) -> Instance:
    """Uniform strict orders, adjacent ties merged, then acceptability cuts (general tier only)."""
    tier = ModelTier(tier)
    rng = _rng(cfg, int(tier), index, 0)
    n, m = _sizes(cfg, tier, rng)
    prefs = tuple(_random_order(rng, m, tier, cfg) for _ in range(n))
    prios = tuple(_random_order(rng, n, tier, cfg) for _ in range(m))
    return Instance(prefs, prios)


def gen_matching(inst: Instance, cfg: AuditConfig, index: int, tier: ModelTier | None = None) -> RandomMatching:
    """A rational convex mixture of deterministic matchings valid for the tier.

    With probability stable_bias the parts are drawn from the weakly stable
    matchings; otherwise, on the general tier, rational_bias restricts the
    draw to matchings that only use mutually acceptable pairs.
    """
    tier = ModelTier(tier) if tier is not None else classify_tier(inst)
    rng = _rng(cfg, int(tier), index, 1)
    pool = all_assignments(inst.n, inst.m, tier)
    if _chance(rng, cfg.stable_bias):
        stable = [a for a in pool if is_weakly_stable_assignment(inst, a, tier)]
        pool = stable or pool
    elif tier == ModelTier.GENERAL and _chance(rng, cfg.rational_bias):
        pool = [a for a in pool if all(o == NULL or inst.acceptable[i][o] for i, o in enumerate(a))]
    k = int(rng.integers(cfg.parts[0], cfg.parts[1] + 1))
    picks = [pool[int(x)] for x in rng.choice(len(pool), size=min(k, len(pool)), replace=False)]
    weights = [int(rng.integers(1, 7)) for _ in picks]
    total = sum(weights)
    return mix((Fraction(w, total), from_assignment(a, inst.m)) for w, a in zip(weights, picks))


# ---------------------------------------------------------------- report

@dataclass
class Violation:
    tier: str
    index: int
    check: str
    instance: str
    matching: str
    verdicts: dict

    def reproducer(self) -> str:
        return f"# tier={self.tier} index={self.index} check={self.check}\n{self.instance}---\n{self.matching}"


@dataclass
class AuditReport:
    seed: int
    count: int
    pairs: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    separations: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    corpus_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.corpus_failures

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def to_table(self) -> str:
        rows = [f"audit seed={self.seed} count={self.count} per tier"]
        rows.append(f"{'tier':12s} {'pairs':>6s}")
        for t, k in self.pairs.items():
            rows.append(f"{t:12s} {k:6d}")
        rows.append("")
        rows.append(f"{'check':44s} {'tested':>7s} {'failed':>7s}")
        for name, (tested, failed) in sorted(self.checks.items()):
            rows.append(f"{name:44s} {tested:7d} {failed:7d}")
        rows.append("")
        rows.append("separations observed (holds / fails):")
        for name, k in sorted(self.separations.items()):
            rows.append(f"  {name:50s} {k:6d}")
        for v in self.violations:
            rows.append("")
            rows.append("VIOLATION " + v["check"])
            rows.append(Violation(**v).reproducer())
        for line in self.corpus_failures:
            rows.append("CORPUS " + line)
        rows.append("")
        rows.append("result: " + ("ok" if self.ok else "violations found"))
        return "\n".join(rows)


class _Recorder:
    def __init__(self, report: AuditReport):
        self.report = report

    def check(self, name: str, ok: bool, ctx: dict) -> None:
        tested, failed = self.report.checks.get(name, (0, 0))
        self.report.checks[name] = (tested + 1, failed + (not ok))
        if not ok:
            self.report.violations.append(asdict(Violation(check=name, **ctx)))


def _implies(a: bool, b: bool) -> bool:
    return not a or b


def audit_pair(inst: Instance, p: RandomMatching, tier: ModelTier, rec: _Recorder, ctx: dict,
               transform: bool = True, cap: int = 16) -> dict[str, bool]:
    """Run every checker on one pair and record each property; returns the verdict table."""
    v = {k: x.holds for k, x in evaluate_all(inst, p, tier, cap).items()}
    ctx = dict(ctx, verdicts=v)
    t = tier.label

    chain = [("ex_ante", "robust_ex_post"), ("robust_ex_post", "ex_post"),
             ("ex_post", "fractional"), ("fractional", "claimwise")]
    if tier == ModelTier.BASE:
        chain.append(("fractional", "ex_post"))
    for a, b in chain:
        rec.check(f"{t}: {a} => {b}", _implies(v[a], v[b]), ctx)

    ir = check_individually_rational(inst, p) is None
    nw = check_non_wasteful(inst, p) is None
    if tier == ModelTier.GENERAL:
        rec.check(f"{t}: af_fractional and IR <=> ex_ante", (v["af_fractional"] and ir) == v["ex_ante"], ctx)
        alt = ir and nw and _general_ex_ante_envy(inst, p) is None
        rec.check(f"{t}: ex_ante <=> no envy and IR and NW", alt == v["ex_ante"], ctx)
        if inst.is_strict():
            ineq = check_fractional(inst, p, tier, require_axioms=False).holds
            rec.check(f"{t}: strict, IR and inequalities => NW", _implies(ir and ineq, nw), ctx)
    else:
        rec.check(f"{t}: af_fractional <=> ex_ante", v["af_fractional"] == v["ex_ante"], ctx)
    rec.check(f"{t}: fractional <=> fractional_dual", v["fractional"] == v["fractional_dual"], ctx)

    if tier == ModelTier.BASE:
        rec.check(f"{t}: sd_strong <=> ex_ante", v["sd_strong"] == v["ex_ante"], ctx)
        rec.check(f"{t}: claimwise => sd_weak", _implies(v["claimwise"], v["sd_weak"]), ctx)
        if v["fractional"]:
            tight = all(equality_sum(inst, p, i, o) == 1 for i, o in p.support())
            rec.check(f"{t}: fractional => tight on support", tight, ctx)

    det = is_deterministic(p)
    if det:
        stable = check_weakly_stable_det(inst, p, tier) is None
        same = all(v[c] == stable for c in CHAIN)
        rec.check(f"{t}: deterministic collapse", same, ctx)

    if transform and tier == ModelTier.GENERAL:
        a_inst, amap = to_associated_instance(inst)
        a_p = to_associated_matching(p, amap)
        rnw = respects_non_wastefulness(p, a_p, amap)
        rir = respects_individual_rationality(p, a_p, amap)
        w = {c: check_concept(a_inst, a_p, c, ModelTier.WEAK, cap).holds for c in CHAIN}
        for c in CHAIN:
            v["assoc." + c] = w[c]
        if det:
            a_stable = check_weakly_stable_det(a_inst, a_p, ModelTier.WEAK) is None
            rec.check("transform: deterministic stability preserved",
                      a_stable == (check_weakly_stable_det(inst, p, tier) is None), ctx)
        rec.check("transform: ex_ante <=> assoc ex_ante", v["ex_ante"] == w["ex_ante"], ctx)
        rec.check("transform: ex_post <=> assoc ex_post and NW", v["ex_post"] == (w["ex_post"] and rnw), ctx)
        rec.check("transform: robust <=> assoc robust and NW",
                  v["robust_ex_post"] == (w["robust_ex_post"] and rnw), ctx)
        rec.check("transform: fractional <=> assoc fractional and NW",
                  v["fractional"] == (w["fractional"] and rnw), ctx)
        rec.check("transform: assoc claimwise, NW, IR => claimwise",
                  _implies(w["claimwise"] and rnw and rir, v["claimwise"]), ctx)
        v["assoc.respects_nw"] = rnw
        v["assoc.respects_ir"] = rir
    return v


def _tally(report: AuditReport, tier: ModelTier, v: dict) -> None:
    for a, b in RED_ARROWS[tier]:
        if a in v and b in v and v[a] and not v[b]:
            if b == "assoc.claimwise" and not (v["assoc.respects_nw"] and v["assoc.respects_ir"]):
                continue
            key = f"{tier.label}: {a} / {b}"
            report.separations[key] = report.separations.get(key, 0) + 1


def run_audit(cfg: AuditConfig) -> AuditReport:
    report = AuditReport(cfg.seed, cfg.count)
    rec = _Recorder(report)
    for tier in cfg.tiers:
        report.pairs[tier.label] = cfg.count
        for index in range(cfg.count):
            inst = gen_instance(cfg, tier, index)
            p = gen_matching(inst, cfg, index, tier)
            ctx = dict(tier=tier.label, index=index, instance=render_instance(inst),
                       matching=render_matching(p, inst))
            v = audit_pair(inst, p, tier, rec, ctx, cfg.transform, cfg.cap)
            _tally(report, tier, v)
    if cfg.include_corpus:
        report.corpus_failures = [o.line() for o in run_corpus() if not o.ok]
    return report


def separation_coverage(cap: int = 16) -> dict[str, list[str]]:
    """For each red arrow of each tier, the corpus cases that exhibit it.

    Cases are evaluated under every tier at least as loose as their own, so a
    strict-order counterexample also covers the weak-order and general tiers.
    """
    cases = corpus()
    out: dict[str, list[str]] = {}
    for tier in TIERS:
        for a, b in RED_ARROWS[tier]:
            out[f"{tier.label}: {a} / {b}"] = []
        for cid, case in cases.items():
            if case.tier > tier:
                continue
            v = {k: x.holds for k, x in evaluate_all(case.instance, case.matching, tier, cap).items()}
            if tier == ModelTier.GENERAL:
                a_inst, amap = to_associated_instance(case.instance)
                a_p = to_associated_matching(case.matching, amap)
                v["assoc.claimwise"] = check_claimwise(a_inst, a_p, ModelTier.WEAK).holds
                v["assoc.respects_nw"] = respects_non_wastefulness(case.matching, a_p, amap)
                v["assoc.respects_ir"] = respects_individual_rationality(case.matching, a_p, amap)
            for a, b in RED_ARROWS[tier]:
                if not (v[a] and not v[b]):
                    continue
                if b == "assoc.claimwise" and not (v["assoc.respects_nw"] and v["assoc.respects_ir"]):
                    continue
                out[f"{tier.label}: {a} / {b}"].append(cid)
    return out
