"""Exact integer and rational linear algebra for sublattices of Z^n.

Bases are stored row-wise (each row is a basis vector). Everything here is
exact: Python integers and :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Optional, Sequence, Tuple

Row = Tuple[int, ...]
Rows = Tuple[Row, ...]


class LatticeError(ValueError):
    pass


# ---------------------------------------------------------------- matrices

def _as_rows(m) -> Rows:
    if isinstance(m, IntegerBasis):
        return m.rows
    if isinstance(m, PrimitiveLattice):
        return m.basis.rows
    return tuple(tuple(int(x) for x in row) for row in m)


def det(matrix: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in matrix]
    k = len(a)
    if k == 0:
        return Fraction(1)
    sign = 1
    result = Fraction(1)
    for c in range(k):
        p = next((i for i in range(c, k) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        piv = a[c][c]
        result *= piv
        for i in range(c + 1, k):
            if a[i][c]:
                f = a[i][c] / piv
                ai, ac = a[i], a[c]
                for j in range(c, k):
                    ai[j] -= f * ac[j]
    return sign * result


def int_det(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix (Bareiss)."""
    a = [list(row) for row in matrix]
    k = len(a)
    if k == 0:
        return 1
    sign = 1
    prev = 1
    for c in range(k - 1):
        if a[c][c] == 0:
            p = next((i for i in range(c + 1, k) if a[i][c] != 0), None)
            if p is None:
                return 0
            a[c], a[p] = a[p], a[c]
            sign = -sign
        for i in range(c + 1, k):
            for j in range(c + 1, k):
                a[i][j] = (a[i][j] * a[c][c] - a[i][c] * a[c][j]) // prev
        prev = a[c][c]
    return sign * a[k - 1][k - 1]


def inverse(matrix: Sequence[Sequence]) -> Tuple[Tuple[Fraction, ...], ...]:
    k = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(k)]
         for i, row in enumerate(matrix)]
    for c in range(k):
        p = next((i for i in range(c, k) if a[i][c] != 0), None)
        if p is None:
            raise LatticeError("singular matrix")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for i in range(k):
            if i != c and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return tuple(tuple(row[k:]) for row in a)


def matmul(a, b):
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def transpose(a):
    return tuple(zip(*a))


def gram(rows, ambient=None) -> Tuple[Tuple, ...]:
    """Gram matrix ``rows · ambient · rowsᵗ`` (``ambient`` defaults to identity)."""
    rows = _as_rows(rows) if not isinstance(rows, tuple) else rows
    if ambient is None:
        return tuple(tuple(sum(x * y for x, y in zip(u, v)) for v in rows) for u in rows)
    gr = matmul(rows, ambient)
    return tuple(tuple(sum(x * y for x, y in zip(u, v)) for v in rows) for u in gr)


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class IntegerBasis:
    """r linearly independent integer row vectors in Z^n."""

    rows: Rows

    @classmethod
    def of(cls, m) -> "IntegerBasis":
        rows = _as_rows(m)
        if not rows or not rows[0]:
            raise LatticeError("empty basis")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise LatticeError("ragged rows")
        if len(rows) > n:
            raise LatticeError("not full rank")
        return cls(rows)

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def tolist(self):
        return [list(r) for r in self.rows]


@dataclass(frozen=True)
class RationalGram:
    """Exact symmetric positive-definite matrix of inner products."""

    entries: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        e = self.entries
        k = len(e)
        if any(len(row) != k for row in e):
            raise LatticeError("Gram matrix must be square")
        for i in range(k):
            for j in range(i):
                if e[i][j] != e[j][i]:
                    raise LatticeError("Gram matrix must be symmetric")
        for m in range(1, k + 1):
            if det([row[:m] for row in e[:m]]) <= 0:
                raise LatticeError("Gram matrix is not positive definite")

    @classmethod
    def of(cls, m) -> "RationalGram":
        if isinstance(m, RationalGram):
            return m
        return cls(tuple(tuple(Fraction(x) for x in row) for row in m))

    @classmethod
    def identity(cls, k: int) -> "RationalGram":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k)))

    @property
    def k(self) -> int:
        return len(self.entries)

    def det(self) -> Fraction:
        return det(self.entries)

    def is_identity(self) -> bool:
        return all(x == (i == j) for i, row in enumerate(self.entries) for j, x in enumerate(row))


@dataclass(frozen=True)
class PrimitiveLattice:
    """A primitive lattice, keyed by its row-style HNF basis."""

    basis: IntegerBasis
    covol_sq: Fraction

    @classmethod
    def from_rows(cls, m, ambient: Optional[RationalGram] = None) -> "PrimitiveLattice":
        b = hnf_canonicalize(m)
        if not is_primitive(b):
            raise LatticeError("basis does not span a primitive lattice")
        return cls(b, covol_sq(b, ambient))

    @property
    def r(self) -> int:
        return self.basis.r

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def rows(self) -> Rows:
        return self.basis.rows

    def __lt__(self, other: "PrimitiveLattice") -> bool:
        return self.basis.rows < other.basis.rows


# ---------------------------------------------------------------- HNF

def _hnf(rows: Sequence[Sequence[int]]) -> Rows:
    a = [list(r) for r in rows]
    m = len(a)
    n = len(a[0])
    pr = 0
    for col in range(n):
        if pr == m:
            break
        while True:
            best = -1
            for i in range(pr, m):
                v = a[i][col]
                if v and (best < 0 or abs(v) < abs(a[best][col])):
                    best = i
            if best < 0:
                break
            if best != pr:
                a[pr], a[best] = a[best], a[pr]
            p = a[pr][col]
            prow = a[pr]
            clean = True
            for i in range(pr + 1, m):
                v = a[i][col]
                if v:
                    q = v // p
                    row = a[i]
                    for j in range(col, n):
                        row[j] -= q * prow[j]
                    if row[col]:
                        clean = False
            if clean:
                break
        if best < 0 and a[pr][col] == 0:
            continue
        if a[pr][col] < 0:
            a[pr] = [-x for x in a[pr]]
        p = a[pr][col]
        prow = a[pr]
        for i in range(pr):
            v = a[i][col]
            if v < 0 or v >= p:
                q = v // p
                row = a[i]
                for j in range(col, n):
                    row[j] -= q * prow[j]
        pr += 1
    if pr < m:
        raise LatticeError("not full rank")
    return tuple(tuple(r) for r in a)


def hnf_canonicalize(m) -> IntegerBasis:
    """Row-style Hermite normal form: positive pivots, entries above pivots in [0, pivot)."""
    return IntegerBasis(_hnf(_as_rows(m)))


def sign_normalize(v: Sequence[int]) -> Row:
    """Representative of ±v whose first nonzero coordinate is positive."""
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


# ---------------------------------------------------------------- primitivity

def _maximal_minors(rows: Rows):
    r = len(rows)
    for cols in combinations(range(len(rows[0])), r):
        yield int_det([[row[c] for c in cols] for row in rows])


def is_primitive(m) -> bool:
    """True iff the gcd of all r×r minors is 1."""
    rows = _as_rows(m)
    g = 0
    for d in _maximal_minors(rows):
        g = gcd(g, d)
        if g == 1:
            return True
    if g == 0:
        raise LatticeError("not full rank")
    return False


def covol_sq(m, ambient: Optional[RationalGram] = None) -> Fraction:
    """Exact det(B G Bᵗ); G is the ambient Gram (identity by default)."""
    rows = _as_rows(m)
    if ambient is None or ambient.is_identity():
        return Fraction(int_det(gram(rows)))
    return det(gram(rows, ambient.entries))


# ---------------------------------------------------------------- completion / kernel

def _column_reduce(rows: Rows):
    """Unimodular V' (n×n) with V'·Bᵗ = E in row echelon form.

    Returns (E, V') with E having the nonzero rows first.
    """
    r = len(rows)
    n = len(rows[0])
    a = [[rows[j][i] for j in range(r)] + [int(i == k) for k in range(n)] for i in range(n)]
    pr = 0
    for col in range(r):
        while True:
            best = -1
            for i in range(pr, n):
                v = a[i][col]
                if v and (best < 0 or abs(v) < abs(a[best][col])):
                    best = i
            if best < 0:
                break
            a[pr], a[best] = a[best], a[pr]
            p = a[pr][col]
            clean = True
            for i in range(pr + 1, n):
                v = a[i][col]
                if v:
                    q = v // p
                    a[i] = [x - q * y for x, y in zip(a[i], a[pr])]
                    if a[i][col]:
                        clean = False
            if clean:
                break
        if best >= 0 or a[pr][col]:
            pr += 1
    if pr < r:
        raise LatticeError("not full rank")
    e = [row[:r] for row in a]
    v = [row[r:] for row in a]
    return e, v


def complete_basis(m) -> Rows:
    """Integer rows C such that (B; C) is a unimodular basis of Z^n.

    B must be primitive.
    """
    rows = _as_rows(m)
    r = len(rows)
    n = len(rows[0])
    if r == n:
        return ()
    e, v = _column_reduce(rows)
    top = int_det([row[:r] for row in e[:r]])
    if abs(top) != 1:
        raise LatticeError("basis is not primitive")
    vinv = inverse(v)
    out = []
    for i in range(r, n):
        col = [vinv[k][i] for k in range(n)]
        out.append(tuple(int(x) for x in col))
    return tuple(out)


def integer_kernel(m) -> Rows:
    """Basis (rows) of {x in Z^n : B x = 0}."""
    rows = _as_rows(m)
    e, v = _column_reduce(rows)
    return tuple(tuple(v[i]) for i in range(len(rows), len(rows[0])))


def orthogonal_complement(p) -> PrimitiveLattice:
    """The primitive lattice Z^n ∩ span(p)^⊥."""
    rows = _as_rows(p)
    if len(rows) == len(rows[0]):
        raise LatticeError("complement is zero")
    k = hnf_canonicalize(integer_kernel(rows))
    return PrimitiveLattice(k, covol_sq(k))


def projected_gram(base: Rows, extra: Rows, ambient=None) -> Tuple[Tuple[Fraction, ...], ...]:
    """Gram of ``extra`` projected orthogonally to span(``base``).

    ``C G Cᵗ − (C G Bᵗ)(B G Bᵗ)⁻¹(B G Cᵗ)``.
    """
    if not base:
        return tuple(tuple(Fraction(x) for x in row) for row in gram(extra, ambient))
    both = tuple(base) + tuple(extra)
    g = gram(both, ambient)
    r = len(base)
    gbb = [row[:r] for row in g[:r]]
    gbc = [row[r:] for row in g[:r]]
    gcc = [row[r:] for row in g[r:]]
    inv = inverse(gbb)
    tmp = matmul(inv, gbc)
    k = len(extra)
    return tuple(
        tuple(Fraction(gcc[i][j]) - sum(gbc[a][i] * tmp[a][j] for a in range(r)) for j in range(k))
        for i in range(k)
    )


def solve_in_basis(rows: Rows, basis: Rows) -> Rows:
    """Integer coordinates of each row of ``rows`` in terms of ``basis``."""
    gb = gram(basis)
    inv = inverse(gb)
    out = []
    for v in rows:
        rhs = [sum(x * y for x, y in zip(v, b)) for b in basis]
        coeffs = [sum(inv[i][j] * rhs[j] for j in range(len(basis))) for i in range(len(basis))]
        if any(c.denominator != 1 for c in coeffs):
            raise LatticeError("vector is not in the lattice")
        coeffs = tuple(int(c) for c in coeffs)
        if any(sum(c * b[t] for c, b in zip(coeffs, basis)) != v[t] for t in range(len(v))):
            raise LatticeError("vector is not in the span")
        out.append(coeffs)
    return tuple(out)


def combine(coeffs: Sequence[Sequence[int]], basis: Rows) -> Rows:
    n = len(basis[0])
    return tuple(
        tuple(sum(c * b[t] for c, b in zip(cs, basis)) for t in range(n)) for cs in coeffs
    )


# ---------------------------------------------------------------- flags

@dataclass(frozen=True)
class FlagChain:
    """{0} < lattices[0] < ... < lattices[-1] = Z^n with rank jumps ``partition``."""

    partition: Tuple[int, ...]
    lattices: Tuple[PrimitiveLattice, ...]

    @property
    def n(self) -> int:
        return sum(self.partition)

    @property
    def covols_sq(self) -> Tuple[Fraction, ...]:
        return tuple(lat.covol_sq for lat in self.lattices)

    @property
    def ranks(self) -> Tuple[int, ...]:
        out, acc = [], 0
        for d in self.partition:
            acc += d
            out.append(acc)
        return tuple(out)

    @classmethod
    def from_bases(cls, partition: Sequence[int], bases: Sequence) -> "FlagChain":
        """Build from the bases of Λ^(1)..Λ^(ℓ−1); Z^n is appended if absent."""
        partition = tuple(int(d) for d in partition)
        n = sum(partition)
        bases = list(bases)
        if len(bases) == len(partition) - 1:
            bases.append([[int(i == j) for j in range(n)] for i in range(n)])
        flag = cls(partition, tuple(PrimitiveLattice.from_rows(b) for b in bases))
        flag.validate()
        return flag

    def key(self) -> Tuple[Rows, ...]:
        return tuple(lat.rows for lat in self.lattices)

    def validate(self) -> None:
        if any(d < 1 for d in self.partition):
            raise LatticeError("partition parts must be positive")
        if len(self.lattices) != len(self.partition):
            raise LatticeError("one lattice per partition block expected")
        n = self.n
        for lat, rank in zip(self.lattices, self.ranks):
            if lat.n != n or lat.r != rank:
                raise LatticeError("lattice ranks do not match partition")
            if not is_primitive(lat.basis):
                raise LatticeError("flag member is not primitive")
        last = self.lattices[-1].rows
        if last != tuple(tuple(int(i == j) for j in range(n)) for i in range(n)):
            raise LatticeError("last member must be Z^n")
        for small, big in zip(self.lattices, self.lattices[1:]):
            solve_in_basis(small.rows, big.rows)

    def __lt__(self, other: "FlagChain") -> bool:
        return self.key() < other.key()


def quotient_factor_gram(f: FlagChain, j: int) -> RationalGram:
    """Exact Gram of the factor lattice Λ^(j)/Λ^(j−1) (1-based j)."""
    if not 1 <= j <= len(f.partition):
        raise LatticeError("index out of range")
    big = f.lattices[j - 1].rows
    if j == 1:
        return RationalGram.of(gram(big))
    small = f.lattices[j - 2].rows
    coords = solve_in_basis(small, big)
    extra = combine(complete_basis(coords), big)
    return RationalGram(projected_gram(small, extra))
