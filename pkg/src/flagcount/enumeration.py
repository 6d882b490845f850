"""Complete, duplicate-free enumeration of primitive sublattices and flags.

A primitive rank-r sublattice Λ of a lattice with Gram matrix G is produced
exactly once, from its canonical shortest vector s (the sign-normalized,
lexicographically smallest among the vectors of minimal norm):

* s is a primitive vector with Q(s)^r <= γ_r^r · covol(Λ)^2 (Hermite);
* Λ/⟨s⟩ is a primitive rank-(r−1) sublattice of the factor lattice
  Z^k/⟨s⟩, with covol² = covol(Λ)²/Q(s), found recursively;
* the candidate is kept only if s really is its canonical shortest vector.

Float arithmetic is used only to bound search ranges (with a safety margin);
every accept/reject decision is made on exact integers or fractions.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .lattice import (
    FlagChain,
    IntegerBasis,
    LatticeError,
    PrimitiveLattice,
    RationalGram,
    Rows,
    combine,
    complete_basis,
    covol_sq,
    det,
    gram,
    int_det,
    hnf_canonicalize,
    is_primitive,
    orthogonal_complement,
    projected_gram,
    sign_normalize,
    solve_in_basis,
    _hnf,
)

# γ_r^r, Hermite's constant raised to the r-th power (exact values, r <= 8).
HERMITE_POW = {
    1: Fraction(1), 2: Fraction(4, 3), 3: Fraction(2), 4: Fraction(4),
    5: Fraction(8), 6: Fraction(64, 3), 7: Fraction(64), 8: Fraction(256),
}

_MARGIN = 1e-9


class HeightKind(enum.Enum):
    INF = "inf"
    AC = "ac"

    @classmethod
    def parse(cls, value) -> "HeightKind":
        if isinstance(value, HeightKind):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class EnumerationJob:
    partition: Tuple[int, ...]
    height: HeightKind
    bound_sq: Fraction

    def __post_init__(self):
        if not self.partition or any(d < 1 for d in self.partition):
            raise ValueError("partition parts must be positive integers")
        if self.bound_sq < 1:
            raise ValueError("bound_sq must be >= 1")

    @classmethod
    def make(cls, partition: Sequence[int], height, X=None, bound_sq=None) -> "EnumerationJob":
        if bound_sq is None:
            if X is None:
                raise ValueError("give X or bound_sq")
            bound_sq = Fraction(X) ** 2
        return cls(tuple(int(d) for d in partition), HeightKind.parse(height), Fraction(bound_sq))

    @property
    def n(self) -> int:
        return sum(self.partition)


# ---------------------------------------------------------------- quadratic forms

class _Form:
    """Positive-definite quadratic form with exact and float views."""

    __slots__ = ("g", "k", "den", "gi", "q", "mu")

    def __init__(self, g):
        self.g = tuple(tuple(Fraction(x) for x in row) for row in g)
        self.k = len(self.g)
        den = 1
        for row in self.g:
            for x in row:
                den = den * x.denominator // math.gcd(den, x.denominator)
        self.den = den
        self.gi = tuple(tuple(int(x * den) for x in row) for row in self.g)
        # Q(x) = Σ q_i (x_i + Σ_{j>i} mu[i][j] x_j)^2 from G = RᵗR, R upper triangular.
        rt = np.linalg.cholesky(np.array(self.gi, dtype=float) / den)
        r = rt.T
        self.q = [float(r[i, i] ** 2) for i in range(self.k)]
        self.mu = [[float(r[i, j] / r[i, i]) for j in range(self.k)] for i in range(self.k)]

    def norm_int(self, x) -> int:
        """den · Q(x), an integer."""
        gi = self.gi
        total = 0
        for i, xi in enumerate(x):
            if xi:
                row = gi[i]
                total += xi * sum(row[j] * xj for j, xj in enumerate(x) if xj)
        return total

    def norm(self, x) -> Fraction:
        return Fraction(self.norm_int(x), self.den)

    def points(self, radius: float, half: bool = True) -> List[Tuple[int, ...]]:
        """Nonzero integer x with Q(x) <= radius (float-bounded superset, margin added).

        With ``half`` only one of ±x is returned (the last nonzero coordinate positive).
        """
        k = self.k
        q, mu = self.q, self.mu
        limit = radius * (1 + _MARGIN) + _MARGIN
        out: List[Tuple[int, ...]] = []
        x = [0] * k

        def rec(i: int, rem: float, zero_above: bool) -> None:
            c = 0.0
            mui = mu[i]
            for j in range(i + 1, k):
                if x[j]:
                    c -= mui[j] * x[j]
            w = math.sqrt(max(rem, 0.0) / q[i]) + _MARGIN
            lo = math.ceil(c - w)
            hi = math.floor(c + w)
            if half and zero_above and lo < 0:
                lo = 0
            qi = q[i]
            for v in range(lo, hi + 1):
                d = v - c
                r2 = rem - qi * d * d
                if r2 < -_MARGIN * (1 + limit):
                    continue
                x[i] = v
                if i == 0:
                    if not (zero_above and v == 0):
                        out.append(tuple(x))
                else:
                    rec(i - 1, r2, zero_above and v == 0)
            x[i] = 0

        rec(k - 1, limit, True)
        return out


def _fbound(value: Fraction) -> float:
    return float(value) * (1 + 1e-12) + 1e-12


def _lll(g, delta=Fraction(3, 4)):
    """Exact LLL reduction of a Gram matrix. Returns (U, U G Uᵗ)."""
    k = len(g)
    u = [[int(i == j) for j in range(k)] for i in range(k)]
    if k == 1:
        return u, g
    if k == 2:
        a, b, c = g[0][0], g[0][1], g[1][1]
        while True:
            m = round(b / a)
            if m:
                u[1] = [x - m * y for x, y in zip(u[1], u[0])]
                c = c - 2 * m * b + m * m * a
                b = b - m * a
            if c < a:
                u[0], u[1] = u[1], u[0]
                a, c = c, a
            else:
                break
        return u, ((a, b), (b, c))
    g0 = g

    def current():
        return gram(tuple(tuple(r) for r in u), g0)

    def gso(gm):
        mu = [[Fraction(0)] * k for _ in range(k)]
        bs = [Fraction(0)] * k
        for i in range(k):
            for j in range(i):
                mu[i][j] = (Fraction(gm[i][j]) - sum(mu[j][t] * mu[i][t] * bs[t] for t in range(j))) / bs[j]
            bs[i] = Fraction(gm[i][i]) - sum(mu[i][t] ** 2 * bs[t] for t in range(i))
        return mu, bs

    gm = current()
    mu, bs = gso(gm)
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            m = round(mu[i][j])
            if m:
                u[i] = [x - m * y for x, y in zip(u[i], u[j])]
                gm = current()
                mu, bs = gso(gm)
        if bs[i] < (delta - mu[i][i - 1] ** 2) * bs[i - 1]:
            u[i], u[i - 1] = u[i - 1], u[i]
            gm = current()
            mu, bs = gso(gm)
            i = max(i - 1, 1)
        else:
            i += 1
    return u, gm


# ---------------------------------------------------------------- core recursion

Cap = Optional[Callable[[Fraction], Fraction]]


def _is_canonical_shortest(form: _Form, basis: Rows, s_norm_int: int) -> bool:
    """Is basis[0] the canonical shortest vector of span(basis) under ``form``?"""
    s = basis[0]
    r = len(basis)
    if r == 2:
        w = basis[1]
        gi = form.gi
        a = s_norm_int
        b = sum(s[i] * sum(gi[i][j] * w[j] for j in range(form.k)) for i in range(form.k))
        c = form.norm_int(w)
        # w' = w − m s with |⟨w', s⟩| <= Q(s)/2
        m = (2 * b + a) // (2 * a)
        b2 = b - m * a
        c2 = c - 2 * m * b + m * m * a
        if c2 > a:
            return True
        if c2 < a:
            return False
        wp = tuple(x - m * y for x, y in zip(w, s))
        if sign_normalize(wp) < s:
            return False
        if 2 * abs(b2) == a:
            sg = 1 if b2 > 0 else -1
            other = tuple(x - sg * y for x, y in zip(wp, s))
            if sign_normalize(other) < s:
                return False
        return True
    sub = _Form(gram(basis, form.g))
    target = Fraction(s_norm_int, form.den)
    for y in sub.points(_fbound(target)):
        if y[0] in (1, -1) and not any(y[1:]):
            continue
        val = sub.norm(y)
        if val < target:
            return False
        if val == target:
            v = sign_normalize(combine((y,), basis)[0])
            if v < s:
                return False
    return True


def _enum(g, r: int, bound: Fraction, lower: Fraction = Fraction(0), cap: Cap = None,
          count_only: bool = False):
    """Primitive rank-r sublattices of the lattice with Gram ``g``, covol² <= bound.

    Returns a list of (rows, covol²) with rows in the coordinates of ``g`` and
    rows[0] the canonical shortest vector (in reduced coordinates), or a count.
    ``lower`` is a known lower bound on λ₁² of every wanted lattice and ``cap``
    maps λ₁² to an upper bound on covol²; both only prune.
    """
    k = len(g)
    if r == k:
        cov = det(g)
        ok = cov <= bound and (cap is None or cov <= cap(_min_norm(_Form(g))))
        if count_only:
            return int(ok)
        return [(tuple(tuple(int(i == j) for j in range(k)) for i in range(k)), cov)] if ok else []
    u, gr = _lll(tuple(tuple(Fraction(x) for x in row) for row in g))
    form = _Form(gr)
    den = form.den
    identity_u = all(u[i][j] == (i == j) for i in range(k) for j in range(k))

    def back(rows):
        return rows if identity_u else combine(rows, tuple(tuple(x) for x in u))

    if r == 1:
        lim_int = bound.numerator * den  # Q·den·bound.den <= bound.num·den
        bden = bound.denominator
        low = lower * den
        total = 0
        out = []
        for x in form.points(_fbound(bound)):
            if math.gcd(*x) != 1:
                continue
            qi = form.norm_int(x)
            if qi * bden > lim_int or qi < low:
                continue
            if cap is not None:
                qn = Fraction(qi, den)
                if qn > cap(qn):
                    continue
            if count_only:
                total += 1
            else:
                out.append(((sign_normalize(x),), Fraction(qi, den)))
        if count_only:
            return total
        return [(back(rows), c) for rows, c in out]

    gpow = HERMITE_POW[r]
    gsub = HERMITE_POW[r - 1]
    smax = _fbound(Fraction(float((gpow * bound)) ** (1.0 / r)))
    total = 0
    out = []
    for s in form.points(smax):
        if math.gcd(*s) != 1:
            continue
        s = sign_normalize(s)
        sn_int = form.norm_int(s)
        sn = Fraction(sn_int, den)
        if sn < lower or sn ** r > gpow * bound:
            continue
        b_s = bound
        if cap is not None:
            b_s = min(b_s, cap(sn))
            if b_s <= 0:
                continue
        qb = b_s / sn
        low_sub = Fraction(3, 4) * sn
        if low_sub ** (r - 1) > gsub * qb:
            continue
        comp = complete_basis((s,))
        gq = projected_gram((s,), comp, form.g)
        for mrows, mcov in _enum(gq, r - 1, qb, lower=low_sub):
            lifted = combine(mrows, comp)
            basis = (s,) + lifted
            if not _is_canonical_shortest(form, basis, sn_int):
                continue
            if count_only:
                total += 1
            else:
                out.append((back(basis), sn * mcov))
    if count_only:
        return total
    return out


def _min_norm(form: _Form) -> Fraction:
    best = None
    radius = float(min(form.g[i][i] for i in range(form.k)))
    for x in form.points(radius):
        v = form.norm(x)
        if best is None or v < best:
            best = v
    return best


# ---------------------------------------------------------------- public enumeration

def _canonical(rows, ambient_rows=None, covsq=None) -> PrimitiveLattice:
    if ambient_rows is not None:
        rows = combine(rows, ambient_rows)
    return PrimitiveLattice(IntegerBasis(_hnf(rows)), Fraction(covsq))


def enumerate_primitive_sublattices(ambient, r: int, covol_sq_bound) -> List[PrimitiveLattice]:
    """Every primitive rank-r sublattice with covol² <= bound, once each, sorted by HNF."""
    ambient = RationalGram.of(ambient)
    bound = Fraction(covol_sq_bound)
    if not 1 <= r <= ambient.k:
        raise LatticeError("rank out of range")
    found = _enum(ambient.entries, r, bound)
    return sorted(_canonical(rows, covsq=c) for rows, c in found)


def count_primitive_sublattices(ambient, r: int, covol_sq_bound) -> int:
    ambient = RationalGram.of(ambient)
    if not 1 <= r <= ambient.k:
        raise LatticeError("rank out of range")
    return _enum(ambient.entries, r, Fraction(covol_sq_bound), count_only=True)


def brute_force_primitive_sublattices(ambient, r: int, covol_sq_bound,
                                      coordinate_box_radius: int) -> List[PrimitiveLattice]:
    """Exhaustive oracle: all r-subsets of box vectors, canonicalized and deduplicated."""
    ambient = RationalGram.of(ambient)
    bound = Fraction(covol_sq_bound)
    k = ambient.k
    rad = coordinate_box_radius
    vectors = [v for v in product(range(-rad, rad + 1), repeat=k) if any(v)]
    gmat = ambient.entries
    integral = all(x.denominator == 1 for row in gmat for x in row)
    if integral:
        gmat = tuple(tuple(int(x) for x in row) for row in gmat)
    seen = {}
    for combo in combinations(vectors, r):
        # a primitive lattice within the bound has a box basis with Gram det = covol²
        gd = int_det(gram(combo, gmat)) if integral else det(gram(combo, gmat))
        if gd == 0 or gd > bound:
            continue
        try:
            h = hnf_canonicalize(combo)
        except LatticeError:
            continue
        if h.rows in seen:
            continue
        seen[h.rows] = None
        if not is_primitive(h):
            continue
        c = covol_sq(h, ambient)
        if c <= bound:
            seen[h.rows] = PrimitiveLattice(h, c)
    return sorted(v for v in seen.values() if v is not None)


def _superlattices_raw(base_rows: Rows, base_cov: Fraction, new_rank: int, bound: Fraction,
                       count_only: bool = False):
    n = len(base_rows[0])
    r = len(base_rows)
    if new_rank == r:
        if count_only:
            return int(base_cov <= bound)
        return [(base_rows, base_cov)] if base_cov <= bound else []
    comp = complete_basis(base_rows)
    gq = projected_gram(base_rows, comp)
    res = _enum(gq, new_rank - r, bound / base_cov, count_only=count_only)
    if count_only:
        return res
    return [(tuple(base_rows) + combine(m, comp), base_cov * c) for m, c in res]


def enumerate_superlattices(base: PrimitiveLattice, new_rank: int, covol_sq_bound) -> List[PrimitiveLattice]:
    """Primitive rank-``new_rank`` lattices containing ``base`` with covol² <= bound."""
    if not base.r <= new_rank <= base.n:
        raise LatticeError("new_rank out of range")
    found = _superlattices_raw(base.rows, base.covol_sq, new_rank, Fraction(covol_sq_bound))
    return sorted(_canonical(rows, covsq=c) for rows, c in found)


# ---------------------------------------------------------------- heights

def _exponents(partition: Sequence[int]) -> List[int]:
    return [partition[i] + partition[i + 1] for i in range(len(partition) - 1)]


def height_inf(f: FlagChain) -> Fraction:
    """H_∞² = max covol²."""
    return max(f.covols_sq)


def height_ac(f: FlagChain) -> Fraction:
    """H_ac² = ∏ covol²(Λ^(i))^(d_i + d_{i+1})."""
    out = Fraction(1)
    for c, e in zip(f.covols_sq, _exponents(f.partition)):
        out *= c ** e
    return out


def flag_height(f: FlagChain, height) -> Fraction:
    return height_inf(f) if HeightKind.parse(height) is HeightKind.INF else height_ac(f)


def _iroot(value: Fraction, e: int) -> int:
    """Largest integer c >= 0 with c^e <= value."""
    if value < 1:
        return 0
    v = value.numerator // value.denominator
    c = int(round(v ** (1.0 / e)))
    while c ** e > v:
        c -= 1
    while (c + 1) ** e <= v:
        c += 1
    return c


# ---------------------------------------------------------------- flags

class _Plan:
    """Per-level bounds for one enumeration job."""

    def __init__(self, job: EnumerationJob):
        self.job = job
        self.partition = job.partition
        self.n = job.n
        self.ell = len(job.partition)
        self.ranks = []
        acc = 0
        for d in job.partition:
            acc += d
            self.ranks.append(acc)
        self.exps = _exponents(job.partition)
        self.inf = job.height is HeightKind.INF

    def level_bound(self, j: int, budget: Fraction) -> Fraction:
        """Upper bound on covol² of Λ^(j) (1-based) given the remaining budget."""
        if self.inf:
            return self.job.bound_sq
        return Fraction(_iroot(budget, self.exps[j - 1]))

    def spend(self, j: int, budget: Fraction, cov: Fraction) -> Fraction:
        if self.inf:
            return budget
        return budget / cov ** self.exps[j - 1]

    def top_down_cap(self, j: int, budget: Fraction) -> Cap:
        """Prune Λ^(j) by λ₁: the next smaller member has covol² >= λ₁^(2m)/γ_m^m."""
        if j == 1:
            return None
        m = self.ranks[j - 2]
        gm = HERMITE_POW[m]
        if self.inf:
            bound = self.job.bound_sq

            def cap(l1: Fraction) -> Fraction:
                return bound if l1 ** m <= gm * bound else Fraction(-1)
            return cap
        e_here = self.exps[j - 1]
        e_below = self.exps[j - 2]

        def cap(l1: Fraction) -> Fraction:
            lb = l1 ** m / gm
            lb = max(Fraction(1), Fraction(math.ceil(lb)))
            return Fraction(_iroot(budget / lb ** e_below, e_here))
        return cap


def _identity(n: int) -> Rows:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _resolve_order(job: EnumerationJob, order: str) -> str:
    if order == "auto":
        return "top-down" if job.height is HeightKind.AC else "bottom-up"
    if order not in ("top-down", "bottom-up"):
        raise ValueError("order must be 'auto', 'top-down' or 'bottom-up'")
    return order


def _first_level(plan: _Plan, order: str):
    """Candidates for the first level of the search tree, as (rows, covol²)."""
    n = plan.n
    budget = plan.job.bound_sq
    if order == "bottom-up":
        b = plan.level_bound(1, budget)
        if b < 1:
            return []
        found = _enum(RationalGram.identity(n).entries, plan.ranks[0], b)
        return sorted(((_hnf(rows), c) for rows, c in found))
    j = plan.ell - 1
    b = plan.level_bound(j, budget)
    if b < 1:
        return []
    cap = plan.top_down_cap(j, budget)
    return list(_enum(RationalGram.identity(n).entries, plan.ranks[j - 1], b, cap=cap))


def _bottom_up(plan: _Plan, items, count_only: bool):
    ell = plan.ell
    total = 0
    out: List[FlagChain] = []
    zn = PrimitiveLattice(IntegerBasis(_identity(plan.n)), Fraction(1))

    def rec(j, rows, cov, chain, budget):
        nonlocal total
        budget = plan.spend(j, budget, cov)
        lat = PrimitiveLattice(IntegerBasis(rows), cov) if not count_only else None
        chain = chain + [lat]
        if j == ell - 1:
            if count_only:
                total += 1
            else:
                out.append(FlagChain(plan.partition, tuple(chain) + (zn,)))
            return
        b = plan.level_bound(j + 1, budget)
        if b < 1:
            return
        if count_only and j + 1 == ell - 1:
            total += _superlattices_raw(rows, cov, plan.ranks[j], b, count_only=True)
            return
        nxt = _superlattices_raw(rows, cov, plan.ranks[j], b)
        for r2, c2 in sorted((_hnf(r2), c2) for r2, c2 in nxt):
            rec(j + 1, r2, c2, chain, budget)

    for rows, cov in items:
        rec(1, rows, cov, [], plan.job.bound_sq)
    return total if count_only else out


def _top_down(plan: _Plan, items, count_only: bool):
    total = 0
    out: List[FlagChain] = []
    zn = PrimitiveLattice(IntegerBasis(_identity(plan.n)), Fraction(1))

    def rec(j, rows_zn, cov, above, budget):
        # rows_zn: a (reduced) basis of Λ^(j) in Z^n coordinates
        nonlocal total
        budget = plan.spend(j, budget, cov)
        here = None if count_only else PrimitiveLattice(IntegerBasis(_hnf(rows_zn)), cov)
        chain = [here] + above
        if j == 1:
            if count_only:
                total += 1
            else:
                out.append(FlagChain(plan.partition, tuple(chain) + (zn,)))
            return
        b = plan.level_bound(j - 1, budget)
        if b < 1:
            return
        g = gram(rows_zn)
        cap = plan.top_down_cap(j - 1, budget)
        if count_only and j - 1 == 1:
            total += _enum(g, plan.ranks[j - 2], b, cap=cap, count_only=True)
            return
        for sub, c2 in _enum(g, plan.ranks[j - 2], b, cap=cap):
            rec(j - 1, combine(sub, rows_zn), c2, chain, budget)

    j0 = plan.ell - 1
    for rows, cov in items:
        rec(j0, rows, cov, [], plan.job.bound_sq)
    if count_only:
        return total
    return out


def _run_subtree(job: EnumerationJob, order: str, items, count_only: bool):
    plan = _Plan(job)
    if order == "bottom-up":
        return _bottom_up(plan, items, count_only)
    return _top_down(plan, items, count_only)


def _trivial(job: EnumerationJob):
    n = job.n
    return FlagChain(job.partition, (PrimitiveLattice(IntegerBasis(_identity(n)), Fraction(1)),))


def _dispatch(job: EnumerationJob, order: str, count_only: bool, workers: int):
    order = _resolve_order(job, order)
    if len(job.partition) == 1:
        return 1 if count_only else [_trivial(job)]
    plan = _Plan(job)
    items = _first_level(plan, order)
    if workers <= 1 or len(items) < 2 * workers:
        return _run_subtree(job, order, items, count_only)
    chunks = [items[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_subtree, [job] * workers, [order] * workers, chunks,
                              [count_only] * workers))
    if count_only:
        return sum(parts)
    return [f for part in parts for f in part]


def enumerate_flags(job: EnumerationJob, order: str = "auto", workers: int = 1) -> Iterator[FlagChain]:
    """Every flag with height² <= job.bound_sq, once each, ordered by concatenated HNF bases.

    ``order`` picks the tree: "bottom-up" grows Λ^(1) upwards through
    superlattices and streams in sorted order; "top-down" starts from
    Λ^(ℓ−1) and prunes by shortest vectors (much faster for H_ac) but sorts a
    materialized list. "auto" uses top-down for H_ac only.
    """
    order = _resolve_order(job, order)
    if order == "bottom-up" and workers <= 1 and len(job.partition) > 1:
        return _stream_bottom_up(job)
    flags = _dispatch(job, order, False, workers)
    return iter(sorted(flags, key=FlagChain.key))


def _stream_bottom_up(job: EnumerationJob) -> Iterator[FlagChain]:
    plan = _Plan(job)
    for item in _first_level(plan, "bottom-up"):
        yield from _bottom_up(plan, [item], False)


def count_flags(job: EnumerationJob, order: str = "auto", workers: int = 1) -> int:
    """Number of flags with height² <= job.bound_sq, without materializing them."""
    return _dispatch(job, order, True, workers)


def brute_force_flags(job: EnumerationJob, coordinate_box_radius: int) -> List[FlagChain]:
    """Oracle: chains of brute-force sublattices of Z^n, filtered by height."""
    n = job.n
    ident = RationalGram.identity(n)
    ranks = []
    acc = 0
    for d in job.partition:
        acc += d
        ranks.append(acc)
    # every member has covol² <= H² for both heights
    levels = [brute_force_primitive_sublattices(ident, rk, job.bound_sq, coordinate_box_radius)
              for rk in ranks[:-1]]
    zn = PrimitiveLattice(IntegerBasis(_identity(n)), Fraction(1))
    out = []

    def rec(i, chain):
        if i == len(levels):
            f = FlagChain(job.partition, tuple(chain) + (zn,))
            if flag_height(f, job.height) <= job.bound_sq:
                out.append(f)
            return
        for lat in levels[i]:
            if not chain or _contains(lat, chain[-1]):
                rec(i + 1, chain + [lat])

    rec(0, [])
    return sorted(out, key=FlagChain.key)


def _contains(big: PrimitiveLattice, small: PrimitiveLattice) -> bool:
    try:
        solve_in_basis(small.rows, big.rows)
        return True
    except LatticeError:
        return False


# ---------------------------------------------------------------- duality

def dual_flag(f: FlagChain) -> FlagChain:
    """Chain of orthogonal complements; a flag of the reversed partition."""
    n = f.n
    members = [orthogonal_complement(lat) for lat in reversed(f.lattices[:-1])]
    zn = PrimitiveLattice(IntegerBasis(_identity(n)), Fraction(1))
    return FlagChain(tuple(reversed(f.partition)), tuple(members) + (zn,))
