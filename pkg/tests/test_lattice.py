from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flagcount.lattice import (
    FlagChain,
    IntegerBasis,
    LatticeError,
    PrimitiveLattice,
    RationalGram,
    complete_basis,
    covol_sq,
    det,
    hnf_canonicalize,
    int_det,
    is_primitive,
    matmul,
    orthogonal_complement,
    quotient_factor_gram,
    solve_in_basis,
)

from strategies import full_rank_rows, unimodular


# ---------------------------------------------------------------- HNF

@pytest.mark.parametrize(
    "rows, expected",
    [
        ([[0, 1], [1, 0]], [[1, 0], [0, 1]]),
        ([[2, 4]], [[2, 4]]),
        ([[1, 2], [3, 4]], [[1, 0], [0, 2]]),
        ([[-3, 0, 6]], [[3, 0, -6]]),
    ],
)
def test_hnf_examples(rows, expected):
    assert hnf_canonicalize(rows).tolist() == expected


def test_hnf_rejects_rank_deficient():
    with pytest.raises(LatticeError, match="not full rank"):
        hnf_canonicalize([[1, 2], [2, 4]])


def _is_hnf(rows):
    prev = -1
    for i, row in enumerate(rows):
        piv = next(j for j, x in enumerate(row) if x)
        if piv <= prev or row[piv] <= 0:
            return False
        for k in range(i):
            if not 0 <= rows[k][piv] < row[piv]:
                return False
        prev = piv
    return True


@given(st.integers(1, 3).flatmap(lambda r: st.integers(r, 4).flatmap(
    lambda n: st.tuples(full_rank_rows(r, n), unimodular(r)))))
def test_hnf_is_canonical_under_row_mixing(data):
    rows, u = data
    h = hnf_canonicalize(rows)
    assert _is_hnf(h.rows)
    assert hnf_canonicalize(h.rows) == h
    assert hnf_canonicalize(matmul(u, rows)) == h
    # same span: each basis expresses the other integrally
    solve_in_basis(tuple(map(tuple, rows)), h.rows)
    solve_in_basis(h.rows, tuple(map(tuple, rows)))


# ---------------------------------------------------------------- primitivity

@pytest.mark.parametrize(
    "rows, expected",
    [([[2, 4]], False), ([[2, 3]], True), ([[1, 0, 0], [0, 2, 0]], False), ([[1, 1, 0], [0, 1, 1]], True)],
)
def test_is_primitive_examples(rows, expected):
    assert is_primitive(rows) is expected


def _primitive_by_definition(rows, radius):
    """span_R ∩ Z^n = span_Z, checked on box vectors (enough: see the comment below)."""
    n = len(rows[0])
    h = hnf_canonicalize(rows).rows
    for v in itertools.product(range(-radius, radius + 1), repeat=n):
        coeffs = _real_coords(v, h)
        if coeffs is None:
            continue
        if any(c.denominator != 1 for c in coeffs):
            return False
    return True


def _real_coords(v, basis):
    g = [[sum(a * b for a, b in zip(x, y)) for y in basis] for x in basis]
    rhs = [sum(a * b for a, b in zip(v, x)) for x in basis]
    from flagcount.lattice import inverse

    inv = inverse(g)
    c = [sum(inv[i][j] * rhs[j] for j in range(len(basis))) for i in range(len(basis))]
    recon = [sum(ci * b[t] for ci, b in zip(c, basis)) for t in range(len(v))]
    return c if recon == [Fraction(x) for x in v] else None


@given(st.integers(1, 2).flatmap(lambda r: st.integers(r, 3).flatmap(lambda n: full_rank_rows(r, n))))
def test_is_primitive_matches_definition(rows):
    # If the lattice is not primitive, some point of span_R ∩ Z^n lies in the
    # fundamental parallelepiped of the basis, whose coordinates are bounded
    # by the sum of |entries| of the rows (at most 3·r <= 6 here).
    assert is_primitive(rows) == _primitive_by_definition(rows, 6)


# ---------------------------------------------------------------- covolume

@pytest.mark.parametrize(
    "rows, expected",
    [([[3, 4]], 25), ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 1), ([[1, 0, 0], [0, 1, 1]], 2)],
)
def test_covol_sq_examples(rows, expected):
    assert covol_sq(rows) == expected


@given(st.integers(1, 3).flatmap(lambda r: st.tuples(full_rank_rows(r, 3), unimodular(r),
                                                      st.permutations(range(3)),
                                                      st.lists(st.sampled_from([1, -1]), min_size=3, max_size=3))))
def test_covol_sq_invariances(data):
    rows, u, perm, signs = data
    c = covol_sq(rows)
    assert covol_sq(matmul(u, rows)) == c
    permuted = [[signs[k] * row[perm[k]] for k in range(3)] for row in rows]
    assert covol_sq(permuted) == c


def test_covol_sq_with_ambient_gram():
    g = RationalGram.of([[2, 1], [1, 3]])
    assert covol_sq([[1, 0]], g) == 2
    assert covol_sq([[1, 0], [0, 1]], g) == 5


# ---------------------------------------------------------------- complements

def test_orthogonal_complement_examples():
    p = PrimitiveLattice.from_rows([[1, 0, 0]])
    assert orthogonal_complement(p).rows == ((0, 1, 0), (0, 0, 1))
    q = PrimitiveLattice.from_rows([[1, 2]])
    comp = orthogonal_complement(q)
    assert comp.rows == ((2, -1),)
    assert comp.covol_sq == q.covol_sq == 5
    assert orthogonal_complement(comp) == q


def test_orthogonal_complement_of_full_lattice():
    with pytest.raises(LatticeError, match="complement is zero"):
        orthogonal_complement(PrimitiveLattice.from_rows([[1, 0], [0, 1]]))


def test_complement_duality_exhaustive_n3():
    from flagcount.enumeration import enumerate_primitive_sublattices

    ident = RationalGram.identity(3)
    for r in (1, 2):
        for p in enumerate_primitive_sublattices(ident, r, 25):
            q = orthogonal_complement(p)
            assert q.covol_sq == p.covol_sq
            assert q.r == 3 - r
            assert orthogonal_complement(q) == p
            assert all(sum(a * b for a, b in zip(u, v)) == 0 for u in p.rows for v in q.rows)


@given(st.integers(1, 3).flatmap(lambda r: full_rank_rows(r, 4)))
def test_complete_basis_is_unimodular(rows):
    if not is_primitive(rows):
        with pytest.raises(LatticeError):
            complete_basis(rows)
        return
    full = [list(r) for r in rows] + [list(r) for r in complete_basis(rows)]
    assert abs(int_det(full)) == 1


# ---------------------------------------------------------------- factor Grams and flags

def test_quotient_factor_gram_examples():
    f = FlagChain.from_bases((1, 1), [[[1, 0]]])
    assert quotient_factor_gram(f, 2).entries == ((Fraction(1),),)
    f = FlagChain.from_bases((1, 1), [[[1, 2]]])
    assert quotient_factor_gram(f, 2).entries == ((Fraction(1, 5),),)
    assert quotient_factor_gram(f, 1).entries == ((Fraction(5),),)
    with pytest.raises(LatticeError):
        quotient_factor_gram(f, 3)


@st.composite
def flags_from_unimodular(draw, partition):
    n = sum(partition)
    u = draw(unimodular(n, steps=10))
    bases, acc = [], 0
    for d in partition[:-1]:
        acc += d
        bases.append(u[:acc])
    return FlagChain.from_bases(partition, bases)


@given(st.sampled_from([(1, 1), (1, 2), (2, 1), (1, 1, 1), (2, 2), (1, 2, 1), (1, 1, 1, 1)]).flatmap(flags_from_unimodular))
def test_factor_gram_multiplicativity(f):
    f.validate()
    covs = (Fraction(1),) + f.covols_sq
    total = Fraction(1)
    for j in range(1, len(f.partition) + 1):
        d = quotient_factor_gram(f, j).det()
        assert d == covs[j] / covs[j - 1]
        total *= d
    assert total == 1


def test_flag_validation_rejects_bad_chains():
    with pytest.raises(LatticeError):
        FlagChain.from_bases((1, 1), [[[2, 0]]])
    with pytest.raises(LatticeError):
        # first member has rank 2, partition asks for 1
        FlagChain.from_bases((1, 2), [[[1, 1, 0], [0, 0, 1]]])
    with pytest.raises(LatticeError):
        # (0,0,1) is not inside span{(1,0,0),(0,1,0)}
        FlagChain.from_bases((1, 1, 1), [[[0, 0, 1]], [[1, 0, 0], [0, 1, 0]]])


def test_rational_gram_validation():
    with pytest.raises(ValueError):
        RationalGram.of([[1, 2], [2, 1]])
    with pytest.raises(ValueError):
        RationalGram.of([[1, 0], [1, 1]])
    assert RationalGram.identity(3).is_identity()
    assert det([[Fraction(1, 2), 0], [0, 4]]) == 2
