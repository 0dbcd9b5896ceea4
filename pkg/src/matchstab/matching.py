"""Exact-rational (sub)stochastic matching matrices."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Sequence

from .errors import CapExceeded, ParseError
from .instance import NULL, Instance, ModelTier, resolve_tier

ZERO = Fraction(0)
ONE = Fraction(1)
DEFAULT_CAP = 12


def as_rat(x) -> Fraction:
    """Convert ints, Fractions and 'p/q' strings; floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"refusing inexact value {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        if not _RAT_RE.match(x.strip()):
            raise ValueError(f"not a rational: {x!r}")
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


_RAT_RE = re.compile(r"^-?\d+(/\d+)?$")


@dataclass(frozen=True)
class RandomMatching:
    """An n x m matrix of probabilities with row and column sums at most one."""

    cells: tuple[tuple[Fraction, ...], ...]
    m: int | None = None

    def __post_init__(self):
        cells = tuple(tuple(as_rat(x) for x in row) for row in self.cells)
        m = self.m
        if m is None:
            m = len(cells[0]) if cells else 0
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "m", m)
        for i, row in enumerate(cells):
            if len(row) != m:
                raise ValueError(f"row {i + 1} has {len(row)} cells, expected {m}")
            for o, x in enumerate(row):
                if x < 0:
                    raise ValueError(f"negative cell at ({i + 1}, {o + 1})")
            if sum(row) > 1:
                raise ValueError(f"row {i + 1} sums to {sum(row)} > 1")
        for o in range(m):
            s = sum(row[o] for row in cells)
            if s > 1:
                raise ValueError(f"column {o + 1} sums to {s} > 1")

    @property
    def n(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.m

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, o = key
        return self.cells[i][o]

    def row_sum(self, i: int) -> Fraction:
        return sum(self.cells[i], ZERO)

    def col_sum(self, o: int) -> Fraction:
        return sum((row[o] for row in self.cells), ZERO)

    def is_bistochastic(self) -> bool:
        return (
            self.n == self.m
            and all(self.row_sum(i) == 1 for i in range(self.n))
            and all(self.col_sum(o) == 1 for o in range(self.m))
        )

    def support(self) -> list[tuple[int, int]]:
        return [(i, o) for i, row in enumerate(self.cells) for o, x in enumerate(row) if x]

    def nnz(self) -> int:
        return sum(1 for row in self.cells for x in row if x)

    def flat(self) -> tuple[Fraction, ...]:
        return tuple(x for row in self.cells for x in row)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(row) for row in self.cells]

    @classmethod
    def zeros(cls, n: int, m: int) -> "RandomMatching":
        return cls(tuple((ZERO,) * m for _ in range(n)), m)


# Deterministic matchings are the 0/1 special case.
DeterministicMatching = RandomMatching


@dataclass(frozen=True)
class SlackVector:
    agent_slack: tuple[Fraction, ...]
    object_slack: tuple[Fraction, ...]


def slack(p: RandomMatching) -> SlackVector:
    return SlackVector(
        tuple(1 - p.row_sum(i) for i in range(p.n)),
        tuple(1 - p.col_sum(o) for o in range(p.m)),
    )


def is_deterministic(p: RandomMatching) -> bool:
    return all(x == 0 or x == 1 for row in p.cells for x in row)


def from_assignment(assign: Sequence[int], m: int) -> RandomMatching:
    """Build a 0/1 matrix; assign[i] is agent i's object or NULL."""
    rows = []
    for o in assign:
        row = [ZERO] * m
        if o != NULL:
            row[o] = ONE
        rows.append(tuple(row))
    return RandomMatching(tuple(rows), m)


def assignment(q: RandomMatching) -> tuple[int, ...]:
    """Agent-to-object map of a deterministic matching (NULL when unmatched)."""
    out = []
    for i, row in enumerate(q.cells):
        hit = [o for o, x in enumerate(row) if x]
        if len(hit) > 1 or (hit and row[hit[0]] != 1):
            raise ValueError(f"row {i + 1} is not deterministic")
        out.append(hit[0] if hit else NULL)
    return tuple(out)


def mix(parts: Iterable[tuple[Fraction, RandomMatching]]) -> RandomMatching:
    """Weighted sum of matchings of equal shape."""
    parts = list(parts)
    if not parts:
        raise ValueError("empty mixture")
    n, m = parts[0][1].shape
    acc = [[ZERO] * m for _ in range(n)]
    for w, q in parts:
        if q.shape != (n, m):
            raise ValueError("shape mismatch in mixture")
        w = as_rat(w)
        for i, row in enumerate(q.cells):
            for o, x in enumerate(row):
                if x:
                    acc[i][o] += w * x
    return RandomMatching(tuple(tuple(r) for r in acc), m)


def associated_square(p: RandomMatching) -> RandomMatching:
    """Pad an n x m substochastic matrix to an (n+m) x (n+m) bistochastic one.

    Rows are agents then one dummy per object; columns are objects then one
    null column per agent. Agent i keeps its slack on its own null column,
    dummy j takes object j's slack, and the dummy/null block is p transposed.
    """
    n, m = p.shape
    s = slack(p)
    size = n + m
    rows = [[ZERO] * size for _ in range(size)]
    for i in range(n):
        for o in range(m):
            rows[i][o] = p.cells[i][o]
            rows[n + o][m + i] = p.cells[i][o]
        rows[i][m + i] = s.agent_slack[i]
    for o in range(m):
        rows[n + o][o] = s.object_slack[o]
    return RandomMatching(tuple(tuple(r) for r in rows), size)


@dataclass(frozen=True)
class SupportGraph:
    edges: tuple[tuple[int, int], ...]
    agent_slack_edges: tuple[int, ...]  # agents with positive slack
    object_slack_edges: tuple[int, ...]  # objects with positive slack

    def neighbours(self, i: int) -> list[int]:
        return [o for a, o in self.edges if a == i]


def support_graph(p: RandomMatching) -> SupportGraph:
    s = slack(p)
    return SupportGraph(
        tuple(p.support()),
        tuple(i for i, x in enumerate(s.agent_slack) if x > 0),
        tuple(o for o, x in enumerate(s.object_slack) if x > 0),
    )


# ---------------------------------------------------------------- enumeration

def default_cap() -> int:
    raw = os.environ.get("MATCHSTAB_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"MATCHSTAB_CAP must be an integer, got {raw!r}") from None


def check_cap(size: int, cap: int | None) -> None:
    cap = default_cap() if cap is None else cap
    if size > cap:
        raise CapExceeded(f"n+m = {size} exceeds the enumeration cap {cap}")


def canonical_key(q: RandomMatching) -> tuple[int, ...]:
    """Sort key putting 0/1 matrices in descending row-major lexicographic order."""
    return tuple(o if o != NULL else q.m for o in assignment(q))


def _partial_assignments(n: int, m: int, allowed=None):
    """All injective partial maps agent -> object, in canonical order."""
    used = [False] * m
    cur: list[int] = []

    def rec(i):
        if i == n:
            yield tuple(cur)
            return
        for o in range(m):
            if not used[o] and (allowed is None or allowed(i, o)):
                used[o] = True
                cur.append(o)
                yield from rec(i + 1)
                cur.pop()
                used[o] = False
        cur.append(NULL)
        yield from rec(i + 1)
        cur.pop()

    yield from rec(0)


def all_assignments(n: int, m: int, tier: ModelTier) -> list[tuple[int, ...]]:
    if tier <= ModelTier.WEAK:
        if n != m:
            return []
        return list(permutations(range(n)))
    return list(_partial_assignments(n, m))


def enumerate_deterministic(
    inst: Instance,
    stable_only: bool = False,
    tier: ModelTier | str | None = None,
    cap: int | None = None,
) -> list[RandomMatching]:
    """Every deterministic matching valid for the tier, optionally only the weakly stable ones."""
    from .deterministic import is_weakly_stable_assignment

    tier = resolve_tier(inst, tier)
    check_cap(inst.n + inst.m, cap)
    out = []
    for a in all_assignments(inst.n, inst.m, tier):
        if stable_only and not is_weakly_stable_assignment(inst, a, tier):
            continue
        out.append(from_assignment(a, inst.m))
    return out


# ---------------------------------------------------------------- text format

def parse_matching(text: str, inst: Instance, tier: ModelTier | str | None = None) -> RandomMatching:
    """Parse `agent: obj=rat ...` lines; omitted cells are zero."""
    tier = resolve_tier(inst, tier)
    rows = [[ZERO] * inst.m for _ in range(inst.n)]
    seen: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise ParseError("expected '<agent>: <object>=<rational> ...'", lineno, 1)
        lab = head.strip()
        try:
            i = inst.agent_index(lab)
        except KeyError:
            raise ParseError(f"unknown agent {lab!r}", lineno, line.find(lab) + 1) from None
        if i in seen:
            raise ParseError(f"duplicate line for agent {lab!r}", lineno, 1)
        seen.add(i)
        col = len(head) + 1
        cols_seen: set[int] = set()
        for mt in re.finditer(r"\S+", rest):
            tok = mt.group(0)
            tcol = col + mt.start() + 1
            olab, eq, val = tok.partition("=")
            if not eq:
                raise ParseError(f"expected '<object>=<rational>' but found {tok!r}", lineno, tcol)
            try:
                o = inst.object_index(olab)
            except KeyError:
                raise ParseError(f"unknown object {olab!r}", lineno, tcol) from None
            if o in cols_seen:
                raise ParseError(f"duplicate cell for object {olab!r}", lineno, tcol)
            cols_seen.add(o)
            if not _RAT_RE.match(val):
                raise ParseError(f"not a rational: {val!r}", lineno, tcol + len(olab) + 1)
            if "/" in val and int(val.split("/")[1]) == 0:
                raise ParseError("zero denominator", lineno, tcol + len(olab) + 1)
            x = Fraction(val)
            if x < 0:
                raise ParseError(f"negative cell {val}", lineno, tcol + len(olab) + 1)
            rows[i][o] = x
    try:
        p = RandomMatching(tuple(tuple(r) for r in rows), inst.m)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if tier <= ModelTier.WEAK and not p.is_bistochastic():
        raise ParseError(f"row and column sums must all equal 1 under the {tier.label} tier")
    return p


def render_matching(p: RandomMatching, inst: Instance) -> str:
    lines = []
    for i, row in enumerate(p.cells):
        cells = " ".join(f"{inst.object_labels[o]}={x}" for o, x in enumerate(row) if x)
        lines.append(f"{inst.agent_labels[i]}: {cells}".rstrip())
    return "\n".join(lines) + ("\n" if lines else "")


def format_matrix(p: RandomMatching) -> list[list[str]]:
    return [[str(x) for x in row] for row in p.cells]
