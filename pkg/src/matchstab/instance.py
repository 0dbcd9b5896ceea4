"""Agents, objects, weak orders and the line-oriented instance format."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .errors import ParseError, TierError

# Index of the null marker inside an order. Rank tables keep the null slot
# last, so NULL also works as a Python index into them.
NULL = -1
NULL_LABEL = "@"


class ModelTier(enum.IntEnum):
    BASE = 0
    WEAK = 1
    GENERAL = 2

    @property
    def label(self) -> str:
        return ("Base", "WeakOrders", "Generalized")[self]

    @classmethod
    def parse(cls, name: str) -> "ModelTier":
        key = name.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "base": cls.BASE,
            "strict": cls.BASE,
            "weak": cls.WEAK,
            "weakorders": cls.WEAK,
            "ties": cls.WEAK,
            "general": cls.GENERAL,
            "generalized": cls.GENERAL,
        }
        if key not in aliases:
            raise ValueError(f"unknown tier {name!r}")
        return aliases[key]


class Cmp(enum.IntEnum):
    WORSE = -1
    TIED = 0
    BETTER = 1


class Entity(NamedTuple):
    kind: str  # "agent", "object" or "null"
    index: int = NULL


def agent(i: int) -> Entity:
    return Entity("agent", i)


def obj(o: int) -> Entity:
    return Entity("object", o)


NULL_ENTITY = Entity("null", NULL)


@dataclass(frozen=True)
class WeakOrder:
    """Ranked tiers of entity indices, best first. NULL marks the null entity."""

    tiers: tuple[frozenset[int], ...]
    _rank: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tiers = tuple(frozenset(t) for t in self.tiers)
        object.__setattr__(self, "tiers", tiers)
        rank: dict[int, int] = {}
        for r, tier in enumerate(tiers):
            if not tier:
                raise ValueError("empty tier in order")
            for e in tier:
                if e in rank:
                    raise ValueError(f"entity {e} ranked twice")
                rank[e] = r
        if NULL not in rank:
            raise ValueError("null marker missing from order")
        if len(tiers[rank[NULL]]) != 1:
            raise ValueError("null marker tied with a real entity")
        object.__setattr__(self, "_rank", rank)

    @classmethod
    def strict(cls, seq: Iterable[int]) -> "WeakOrder":
        return cls(tuple(frozenset([e]) for e in seq))

    @classmethod
    def from_lists(cls, tiers: Iterable[Iterable[int]]) -> "WeakOrder":
        return cls(tuple(frozenset(t) for t in tiers))

    def rank(self, e: int) -> int:
        return self._rank[e]

    def compare(self, a: int, b: int) -> Cmp:
        ra, rb = self._rank[a], self._rank[b]
        if ra < rb:
            return Cmp.BETTER
        return Cmp.TIED if ra == rb else Cmp.WORSE

    def entities(self) -> frozenset[int]:
        return frozenset(self._rank)

    def is_strict(self) -> bool:
        return all(len(t) == 1 for t in self.tiers)

    def null_last(self) -> bool:
        return self.tiers[-1] == frozenset([NULL])

    def above_null(self) -> list[int]:
        """Entities ranked strictly above the null marker, best first."""
        out = []
        for tier in self.tiers:
            if NULL in tier:
                break
            out.extend(sorted(tier))
        return out

    def flat(self) -> list[int]:
        return [e for tier in self.tiers for e in sorted(tier)]


_LABEL_RE = re.compile(r"^[^\s\[\]>:@#=]+$")


def _check_labels(labels: Sequence[str], what: str, numeric_positional: bool) -> None:
    seen = set()
    for k, lab in enumerate(labels):
        if not _LABEL_RE.match(lab):
            raise ValueError(f"invalid {what} label {lab!r}")
        if lab in seen:
            raise ValueError(f"duplicate {what} label {lab!r}")
        if numeric_positional and lab.isdigit() and lab != str(k + 1):
            raise ValueError(f"numeric {what} label {lab!r} must equal its position {k + 1}")
        seen.add(lab)


@dataclass(frozen=True)
class Instance:
    """A two-sided market: agent preferences and object priorities.

    Agents are indexed 0..n-1 and objects 0..m-1. `pref_rank[i][o]` is the
    tier position of object o in agent i's order (smaller is better) and
    `pref_rank[i][NULL]` that of the null object; `prio_rank` is symmetric.
    """

    prefs: tuple[WeakOrder, ...]
    prios: tuple[WeakOrder, ...]
    agent_labels: tuple[str, ...] = ()
    object_labels: tuple[str, ...] = ()
    pref_rank: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    prio_rank: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    acceptable: tuple[tuple[bool, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        prefs, prios = tuple(self.prefs), tuple(self.prios)
        n, m = len(prefs), len(prios)
        object.__setattr__(self, "prefs", prefs)
        object.__setattr__(self, "prios", prios)
        alabels = tuple(self.agent_labels) or tuple(str(i + 1) for i in range(n))
        olabels = tuple(self.object_labels) or tuple(f"o{o + 1}" for o in range(m))
        if len(alabels) != n or len(olabels) != m:
            raise ValueError("label count does not match the number of orders")
        _check_labels(alabels, "agent", numeric_positional=True)
        _check_labels(olabels, "object", numeric_positional=False)
        object.__setattr__(self, "agent_labels", alabels)
        object.__setattr__(self, "object_labels", olabels)

        objs = frozenset(range(m)) | {NULL}
        agents = frozenset(range(n)) | {NULL}
        for i, w in enumerate(prefs):
            if w.entities() != objs:
                raise ValueError(f"preference of agent {alabels[i]} does not rank every object exactly once")
        for o, w in enumerate(prios):
            if w.entities() != agents:
                raise ValueError(f"priority of object {olabels[o]} does not rank every agent exactly once")

        pr = tuple(tuple(w.rank(o) for o in range(m)) + (w.rank(NULL),) for w in prefs)
        qr = tuple(tuple(w.rank(j) for j in range(n)) + (w.rank(NULL),) for w in prios)
        acc = tuple(
            tuple(pr[i][o] < pr[i][NULL] and qr[o][i] < qr[o][NULL] for o in range(m))
            for i in range(n)
        )
        object.__setattr__(self, "pref_rank", pr)
        object.__setattr__(self, "prio_rank", qr)
        object.__setattr__(self, "acceptable", acc)

    @property
    def n(self) -> int:
        return len(self.prefs)

    @property
    def m(self) -> int:
        return len(self.prios)

    def agent_index(self, label: str) -> int:
        try:
            return self.agent_labels.index(label)
        except ValueError:
            raise KeyError(f"unknown agent {label!r}") from None

    def object_index(self, label: str) -> int:
        try:
            return self.object_labels.index(label)
        except ValueError:
            raise KeyError(f"unknown object {label!r}") from None

    def agent_label(self, i: int) -> str:
        return NULL_LABEL if i == NULL else self.agent_labels[i]

    def object_label(self, o: int) -> str:
        return NULL_LABEL if o == NULL else self.object_labels[o]

    def is_strict(self) -> bool:
        return all(w.is_strict() for w in self.prefs + self.prios)


def is_acceptable_pair(inst: Instance, i: int, o: int) -> bool:
    return inst.acceptable[i][o]


def classify_tier(inst: Instance) -> ModelTier:
    if inst.n != inst.m or not all(w.null_last() for w in inst.prefs + inst.prios):
        return ModelTier.GENERAL
    return ModelTier.BASE if inst.is_strict() else ModelTier.WEAK


def resolve_tier(inst: Instance, claimed: ModelTier | str | None = None) -> ModelTier:
    """Return the tier to evaluate under; a claim stricter than the data is an error."""
    detected = classify_tier(inst)
    if claimed is None:
        return detected
    if isinstance(claimed, str):
        claimed = ModelTier.parse(claimed)
    if claimed < detected:
        raise TierError(f"instance is {detected.label}, cannot be treated as {claimed.label}")
    return claimed


def compare(inst: Instance, who: Entity, a: Entity, b: Entity) -> Cmp:
    """How `who` ranks a against b."""
    if who.kind == "agent":
        order, ranked = inst.prefs[who.index], "object"
    elif who.kind == "object":
        order, ranked = inst.prios[who.index], "agent"
    else:
        raise ValueError("the null entity has no order")
    for e in (a, b):
        if e.kind not in (ranked, "null"):
            raise ValueError(f"{who.kind} cannot rank a {e.kind}")
    ia = NULL if a.kind == "null" else a.index
    ib = NULL if b.kind == "null" else b.index
    return order.compare(ia, ib)


# ---------------------------------------------------------------- text format

_TOKEN_RE = re.compile(r"\s+|\[|\]|>|[^\s\[\]>]+")
_ORDER_RE = re.compile(r"^(pref|prio)\s+([^\s:]+)\s*:(.*)$")


def _tokenize(expr: str, lineno: int, offset: int) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while pos < len(expr):
        mt = _TOKEN_RE.match(expr, pos)
        tok = mt.group(0)
        if not tok.isspace():
            out.append((tok, offset + pos + 1))
        pos = mt.end()
    return out


def _parse_rank_expr(expr: str, lineno: int, offset: int) -> list[list[tuple[str, int]]]:
    toks = _tokenize(expr, lineno, offset)
    if not toks:
        raise ParseError("empty order", lineno, offset + 1)
    tiers: list[list[tuple[str, int]]] = []
    k = 0
    while True:
        if k >= len(toks):
            raise ParseError("expected an entity after '>'", lineno, offset + len(expr) + 1)
        tok, col = toks[k]
        if tok == "[":
            group = []
            k += 1
            while k < len(toks) and toks[k][0] not in ("]", "[", ">"):
                group.append(toks[k])
                k += 1
            if k >= len(toks) or toks[k][0] != "]":
                c = toks[k][1] if k < len(toks) else offset + len(expr) + 1
                raise ParseError("unterminated tie group", lineno, c)
            if not group:
                raise ParseError("empty tie group", lineno, col)
            tiers.append(group)
            k += 1
        elif tok in ("]", ">"):
            raise ParseError(f"unexpected {tok!r}", lineno, col)
        else:
            tiers.append([(tok, col)])
            k += 1
        if k == len(toks):
            return tiers
        tok, col = toks[k]
        if tok != ">":
            raise ParseError(f"expected '>' but found {tok!r}", lineno, col)
        k += 1


def _resolve_order(tiers, names: Sequence[str], who: str, lineno: int) -> WeakOrder:
    index = {lab: k for k, lab in enumerate(names)}
    seen: dict[int, int] = {}
    out = []
    for group in tiers:
        members = []
        for lab, col in group:
            if lab == NULL_LABEL:
                e = NULL
            elif lab in index:
                e = index[lab]
            else:
                raise ParseError(f"unknown entity {lab!r} in order of {who}", lineno, col)
            if e in seen:
                raise ParseError(f"duplicate entity {lab!r} in order of {who}", lineno, col)
            seen[e] = col
            members.append(e)
        if NULL in members and len(members) > 1:
            raise ParseError(f"null marker tied with a real entity in order of {who}", lineno, seen[NULL])
        out.append(members)
    if NULL not in seen:
        raise ParseError(f"null marker '@' missing from order of {who}", lineno)
    missing = [lab for k, lab in enumerate(names) if k not in seen]
    if missing:
        raise ParseError(f"missing entity {missing[0]!r} in order of {who}", lineno)
    return WeakOrder.from_lists(out)


def parse_instance(text: str) -> Instance:
    """Parse the instance format (see README) into a validated Instance."""
    agents: list[str] | None = None
    objects: list[str] | None = None
    header_line: dict[str, int] = {}
    pref_src: dict[str, tuple] = {}
    prio_src: dict[str, tuple] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.lstrip()
        indent = len(line) - len(stripped)
        head, sep, rest = stripped.partition(":")
        key = head.strip()
        if sep and key in ("agents", "objects"):
            if key in header_line:
                raise ParseError(f"duplicate '{key}:' line", lineno, indent + 1)
            header_line[key] = lineno
            names = rest.split()
            if key == "agents":
                if len(names) == 1 and names[0].isdigit():
                    agents = [str(k + 1) for k in range(int(names[0]))]
                else:
                    agents = names
            else:
                objects = names
            for lab in names:
                if not _LABEL_RE.match(lab):
                    raise ParseError(f"invalid label {lab!r}", lineno, line.find(lab, indent + len(head)) + 1)
            continue
        mt = _ORDER_RE.match(stripped)
        if not mt:
            raise ParseError("expected 'agents:', 'objects:', 'pref <agent>:' or 'prio <object>:'", lineno, indent + 1)
        kind, who, expr = mt.group(1), mt.group(2), mt.group(3)
        target = pref_src if kind == "pref" else prio_src
        if who in target:
            raise ParseError(f"duplicate {kind} line for {who!r}", lineno, indent + 1)
        offset = indent + mt.start(3)
        target[who] = (lineno, _parse_rank_expr(expr, lineno, offset))

    if agents is None:
        raise ParseError("missing 'agents:' line")
    if objects is None:
        raise ParseError("missing 'objects:' line")
    for side, names in (("agent", agents), ("object", objects)):
        dup = {x for x in names if names.count(x) > 1}
        if dup:
            raise ParseError(f"duplicate {side} {sorted(dup)[0]!r}", header_line[side + "s"])
    for lab in list(pref_src):
        if lab not in agents:
            raise ParseError(f"pref line for unknown agent {lab!r}", pref_src[lab][0])
    for lab in list(prio_src):
        if lab not in objects:
            raise ParseError(f"prio line for unknown object {lab!r}", prio_src[lab][0])

    prefs = []
    for lab in agents:
        if lab not in pref_src:
            raise ParseError(f"missing pref line for agent {lab!r}")
        lineno, tiers = pref_src[lab]
        prefs.append(_resolve_order(tiers, objects, f"agent {lab}", lineno))
    prios = []
    for lab in objects:
        if lab not in prio_src:
            raise ParseError(f"missing prio line for object {lab!r}")
        lineno, tiers = prio_src[lab]
        prios.append(_resolve_order(tiers, agents, f"object {lab}", lineno))
    try:
        return Instance(tuple(prefs), tuple(prios), tuple(agents), tuple(objects))
    except ValueError as exc:
        raise ParseError(str(exc), header_line["agents"]) from None


def render_order(order: WeakOrder, labels: Sequence[str]) -> str:
    parts = []
    for tier in order.tiers:
        names = [NULL_LABEL if e == NULL else labels[e] for e in sorted(tier)]
        parts.append(names[0] if len(names) == 1 else "[" + " ".join(names) + "]")
    return " > ".join(parts)


def render_instance(inst: Instance) -> str:
    default = tuple(str(i + 1) for i in range(inst.n))
    if inst.agent_labels == default:
        lines = [f"agents: {inst.n}"]
    else:
        lines = ["agents: " + " ".join(inst.agent_labels)]
    lines.append(("objects: " + " ".join(inst.object_labels)).rstrip())
    for i, w in enumerate(inst.prefs):
        lines.append(f"pref {inst.agent_labels[i]}: {render_order(w, inst.object_labels)}")
    for o, w in enumerate(inst.prios):
        lines.append(f"prio {inst.object_labels[o]}: {render_order(w, inst.agent_labels)}")
    return "\n".join(lines) + "\n"
