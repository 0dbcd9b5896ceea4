"""Birkhoff-von Neumann decomposition and exact convex-combination feasibility."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import CapExceeded
from .instance import NULL, ModelTier
from .matching import (
    ONE,
    ZERO,
    RandomMatching,
    all_assignments,
    assignment,
    associated_square,
    canonical_key,
    check_cap,
    from_assignment,
    mix,
    slack,
)


@dataclass(frozen=True)
class Decomposition:
    """Positive weights on deterministic matchings, summing to one."""

    parts: tuple[tuple[Fraction, RandomMatching], ...]

    def __post_init__(self):
        parts = tuple((Fraction(w), q) for w, q in self.parts)
        object.__setattr__(self, "parts", parts)
        if not parts:
            raise ValueError("a decomposition needs at least one part")
        for w, q in parts:
            if not 0 < w <= 1:
                raise ValueError(f"weight {w} outside (0, 1]")
            assignment(q)  # raises unless 0/1
        if sum(w for w, _ in parts) != 1:
            raise ValueError("weights do not sum to 1")

    @property
    def weights(self) -> list[Fraction]:
        return [w for w, _ in self.parts]

    @property
    def matchings(self) -> list[RandomMatching]:
        return [q for _, q in self.parts]

    def __len__(self) -> int:
        return len(self.parts)

    def reconstruct(self) -> RandomMatching:
        return mix(self.parts)

    def reconstructs(self, p: RandomMatching) -> bool:
        return self.reconstruct() == p

    def to_json(self) -> list[dict]:
        return [
            {"weight": str(w), "matching": [[int(x) for x in row] for row in q.cells]}
            for w, q in self.parts
        ]

    @classmethod
    def from_json(cls, data: list[dict]) -> "Decomposition":
        return cls(tuple(
            (Fraction(part["weight"]), RandomMatching(tuple(tuple(map(Fraction, row)) for row in part["matching"])))
            for part in data
        ))


@dataclass(frozen=True)
class FeasibilitySystem:
    """Find lambda >= 0 with sum(lambda) = 1 and sum(lambda_s * columns[s]) = target."""

    columns: tuple[RandomMatching, ...]
    target: RandomMatching

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        for q in self.columns:
            if q.shape != self.target.shape:
                raise ValueError("column shape differs from target shape")

    def rows(self) -> tuple[list[list[Fraction]], list[Fraction]]:
        flat_cols = [q.flat() for q in self.columns]
        flat_t = self.target.flat()
        A, b = [], []
        for c, t in enumerate(flat_t):
            row = [col[c] for col in flat_cols]
            if t or any(row):
                A.append(row)
                b.append(t)
        A.append([ONE] * len(self.columns))
        b.append(ONE)
        return A, b


# ---------------------------------------------------------------- simplex

def _pivot(tab, cost, basis, leave, enter):
    piv = tab[leave][enter]
    prow = [x / piv for x in tab[leave]]
    tab[leave] = prow
    for i in range(len(tab)):
        f = tab[i][enter]
        if i != leave and f:
            tab[i] = [x - f * y if y else x for x, y in zip(tab[i], prow)]
    f = cost[enter]
    if f:
        cost[:] = [x - f * y if y else x for x, y in zip(cost, prow)]
    basis[leave] = enter


def _run(tab, cost, basis, allowed: int) -> bool:
    """Minimise with Bland's rule over the first `allowed` columns; False when unbounded."""
    while True:
        enter = next((j for j in range(allowed) if cost[j] < 0), None)
        if enter is None:
            return True
        leave, best = None, None
        for i, row in enumerate(tab):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            return False
        _pivot(tab, cost, basis, leave, enter)


def _feasible_tableau(A: list[list[Fraction]], b: list[Fraction]):
    """Phase one: a feasible basis for Ax = b, x >= 0, with artificials removed, or None."""
    k = len(A[0]) if A else 0
    kept = []
    for row, rhs in zip(A, b):
        if not any(row):
            if rhs:
                return None
            continue
        if rhs < 0:
            row, rhs = [-x for x in row], -rhs
        kept.append((list(row), rhs))
    r = len(kept)
    tab = []
    for i, (row, rhs) in enumerate(kept):
        art = [ZERO] * r
        art[i] = ONE
        tab.append(row + art + [rhs])
    basis = [k + i for i in range(r)]
    cost = [-sum((tab[i][j] for i in range(r)), ZERO) for j in range(k)] + [ZERO] * r
    cost.append(-sum((tab[i][-1] for i in range(r)), ZERO))
    if not _run(tab, cost, basis, k + r):
        raise ArithmeticError("phase one cannot be unbounded")
    if cost[-1] != 0:
        return None
    # drive zero-level artificials out of the basis; drop redundant rows
    i = 0
    while i < len(tab):
        if basis[i] >= k:
            j = next((j for j in range(k) if tab[i][j]), None)
            if j is None:
                del tab[i], basis[i]
                continue
            _pivot(tab, cost, basis, i, j)
        i += 1
    tab = [row[:k] + row[-1:] for row in tab]
    return tab, basis, k


def _solution(tab, basis, k) -> list[Fraction]:
    x = [ZERO] * k
    for i, j in enumerate(basis):
        x[j] = tab[i][-1]
    return x


def _phase_one(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """A basic feasible x >= 0 with Ax = b, or None. Dense exact tableau."""
    state = _feasible_tableau(A, b)
    return None if state is None else _solution(*state)


def _maximize(A: list[list[Fraction]], b: list[Fraction], c: Sequence[Fraction]) -> list[Fraction] | None:
    """A basic optimal x for max c.x over Ax = b, x >= 0; None if infeasible."""
    state = _feasible_tableau(A, b)
    if state is None:
        return None
    tab, basis, k = state
    cost = [-v for v in c] + [ZERO]
    for i, j in enumerate(basis):
        f = cost[j]
        if f:
            cost = [x - f * y if y else x for x, y in zip(cost, tab[i])]
    if not _run(tab, cost, basis, k):
        raise ArithmeticError("objective is unbounded")
    return _solution(tab, basis, k)


def solve_convex_feasibility(sys: FeasibilitySystem) -> list[Fraction] | None:
    """Exact weights (one per column) or None when no convex combination hits the target."""
    if not sys.columns:
        return None
    A, b = sys.rows()
    x = _phase_one(A, b)
    if x is None:
        return None
    if any(v < 0 for v in x) or sum(x) != 1:
        raise ArithmeticError("simplex returned an invalid point")
    for row, rhs in zip(A, b):
        if sum((a * v for a, v in zip(row, x) if a), ZERO) != rhs:
            raise ArithmeticError("simplex solution fails re-substitution")
    return x


def decompose_over(columns: Sequence[RandomMatching], target: RandomMatching) -> Decomposition | None:
    """A decomposition of target using only the given deterministic matchings."""
    x = solve_convex_feasibility(FeasibilitySystem(tuple(columns), target))
    if x is None:
        return None
    return Decomposition(tuple((w, q) for w, q in zip(x, columns) if w > 0))


# ---------------------------------------------------------------- exact linear algebra

def _reduce(echelon: list[tuple[int, list[Fraction]]], vec: Sequence[Fraction]) -> list[Fraction]:
    v = list(vec)
    for col, row in echelon:
        f = v[col]
        if f:
            v = [a - f * b if b else a for a, b in zip(v, row)]
    return v


def _extend(echelon, vec):
    """Echelon basis with vec added, or None when vec is dependent."""
    v = _reduce(echelon, vec)
    col = next((c for c, a in enumerate(v) if a), None)
    if col is None:
        return None
    piv = v[col]
    v = [a / piv for a in v]
    out = []
    for c, row in echelon:
        f = row[col]
        out.append((c, [a - f * b if b else a for a, b in zip(row, v)] if f else row))
    out.append((col, v))
    return out


def _dependency(vectors: Sequence[Sequence[Fraction]]) -> list[Fraction] | None:
    """Nonzero mu with sum(mu_s * v_s) = 0, or None if the vectors are independent."""
    k = len(vectors)
    echelon: list[tuple[int, list[Fraction]]] = []
    for s, vec in enumerate(vectors):
        tag = [ZERO] * k
        tag[s] = ONE
        v = _reduce(echelon, list(vec) + tag)
        dim = len(vec)
        col = next((c for c in range(dim) if v[c]), None)
        if col is None:
            return v[dim:]
        piv = v[col]
        v = [a / piv for a in v]
        echelon = [(c, [a - row[col] * b for a, b in zip(row, v)] if row[col] else row) for c, row in echelon]
        echelon.append((col, v))
    return None


def _caratheodory(parts: list[tuple[Fraction, RandomMatching]], bound: int):
    """Shrink a convex combination until it has at most `bound` parts."""
    while len(parts) > bound:
        vecs = [list(q.flat()) + [ONE] for _, q in parts]
        mu = _dependency(vecs)
        if mu is None:
            break
        if not any(x > 0 for x in mu):
            mu = [-x for x in mu]
        t = min(w / x for (w, _), x in zip(parts, mu) if x > 0)
        parts = [(w - t * x, q) for (w, q), x in zip(parts, mu)]
        parts = [(w, q) for w, q in parts if w > 0]
    return parts


# ---------------------------------------------------------------- Birkhoff-von Neumann

def _perfect_matching(work: list[list[Fraction]]) -> list[int] | None:
    """Augmenting-path matching on the positive cells, scanning rows and columns in index order."""
    size = len(work)
    match_col = [NULL] * size

    def augment(i, seen):
        for o in range(size):
            if work[i][o] > 0 and not seen[o]:
                seen[o] = True
                if match_col[o] == NULL or augment(match_col[o], seen):
                    match_col[o] = i
                    return True
        return False

    for i in range(size):
        if not augment(i, [False] * size):
            return None
    row_match = [NULL] * size
    for o, i in enumerate(match_col):
        row_match[i] = o
    return row_match


def _bvn_square(p: RandomMatching) -> list[tuple[Fraction, tuple[int, ...]]]:
    work = [list(row) for row in p.cells]
    parts = []
    while any(x for row in work for x in row):
        perm = _perfect_matching(work)
        if perm is None:
            raise ArithmeticError("support has no perfect matching; input is not bistochastic")
        w = min(work[i][o] for i, o in enumerate(perm))
        for i, o in enumerate(perm):
            work[i][o] -= w
        parts.append((w, tuple(perm)))
    return parts


def bvn_decompose(p: RandomMatching) -> Decomposition:
    """Greedy Birkhoff-von Neumann decomposition; substochastic inputs are padded first."""
    n, m = p.shape
    if n == 0 or m == 0:
        return Decomposition(((ONE, p),))
    if p.is_bistochastic():
        return Decomposition(tuple((w, from_assignment(a, m)) for w, a in _bvn_square(p)))

    merged: dict[tuple[int, ...], Fraction] = {}
    for w, perm in _bvn_square(associated_square(p)):
        a = tuple(o if o < m else NULL for o in perm[:n])
        merged[a] = merged.get(a, ZERO) + w
    parts = [(w, from_assignment(a, m)) for a, w in merged.items()]
    parts = _caratheodory(parts, p.nnz() + 1)
    return Decomposition(tuple(parts))


# ---------------------------------------------------------------- realizability

def enumerate_realizable(
    p: RandomMatching, tier: ModelTier | str | None = None, cap: int | None = None
) -> list[RandomMatching]:
    """Deterministic matchings that carry positive weight in some decomposition of p.

    q qualifies iff it only uses cells where p is positive and every agent or
    object it leaves unmatched has positive slack in p. Then p - t*q stays a
    valid matching after rescaling for small t > 0, and conversely.
    """
    n, m = p.shape
    check_cap(n + m, cap)
    s = slack(p)
    agent_free = [x > 0 for x in s.agent_slack]
    object_free = [x > 0 for x in s.object_slack]
    used = [False] * m
    cur: list[int] = []
    out: list[tuple[int, ...]] = []

    def rec(i):
        if i == n:
            if all(used[o] or object_free[o] for o in range(m)):
                out.append(tuple(cur))
            return
        row = p.cells[i]
        for o in range(m):
            if row[o] > 0 and not used[o]:
                used[o] = True
                cur.append(o)
                rec(i + 1)
                cur.pop()
                used[o] = False
        if agent_free[i]:
            cur.append(NULL)
            rec(i + 1)
            cur.pop()

    rec(0)
    return [from_assignment(a, m) for a in out]


def _candidates(p: RandomMatching, tier: ModelTier) -> list[RandomMatching]:
    n, m = p.shape
    return [
        from_assignment(a, m)
        for a in all_assignments(n, m, tier)
        if all(o == NULL or p.cells[i][o] > 0 for i, o in enumerate(a))
    ]


def vertex_decompositions(
    columns: Sequence[RandomMatching], target: RandomMatching, cap: int = 16
) -> list[Decomposition]:
    """Every decomposition of target over an affinely independent subset of columns.

    These are the vertices of the polytope of all decompositions over the
    given columns. Exhaustive over subsets, so the column count is capped.
    """
    cols = list(columns)
    if len(cols) > cap:
        raise CapExceeded(f"{len(cols)} candidate matchings exceed the oracle cap {cap}")
    vecs = [list(q.flat()) + [ONE] for q in cols]
    found: list[Decomposition] = []

    def rec(start, echelon, chosen):
        for idx in range(start, len(cols)):
            ech = _extend(echelon, vecs[idx])
            if ech is None:
                continue
            sub = chosen + [idx]
            x = solve_convex_feasibility(FeasibilitySystem(tuple(cols[s] for s in sub), target))
            if x is not None and all(v > 0 for v in x):
                found.append(Decomposition(tuple((w, cols[s]) for w, s in zip(x, sub))))
            rec(idx + 1, ech, sub)

    rec(0, [], [])
    return found


def oracle_all_decompositions(
    p: RandomMatching, tier: ModelTier | str = ModelTier.GENERAL, cap: int = 64
) -> list[Decomposition]:
    """Vertex-supported decompositions of p covering every matching that can carry weight.

    Brute force that does not rely on the slack criterion: for each
    tier-valid deterministic matching inside the support of p, maximise its
    weight over all decompositions with an exact LP. The optimum is a basic
    solution, so its positive part is a vertex support; the matching can
    appear in some decomposition iff that optimum is positive.
    """
    if isinstance(tier, str):
        tier = ModelTier.parse(tier)
    cands = _candidates(p, tier)
    if len(cands) > cap:
        raise CapExceeded(f"{len(cands)} candidate matchings exceed the oracle cap {cap}")
    if not cands:
        return []
    A, b = FeasibilitySystem(tuple(cands), p).rows()
    found: dict[tuple, Decomposition] = {}
    for idx in range(len(cands)):
        c = [ZERO] * len(cands)
        c[idx] = ONE
        x = _maximize(A, b, c)
        if x is None:
            return []
        if x[idx] > 0:
            d = Decomposition(tuple((w, q) for w, q in zip(x, cands) if w > 0))
            key = tuple(sorted(canonical_key(q) for q in d.matchings))
            found.setdefault(key, d)
    return list(found.values())


def sort_canonical(qs: Sequence[RandomMatching]) -> list[RandomMatching]:
    return sorted(qs, key=canonical_key)
