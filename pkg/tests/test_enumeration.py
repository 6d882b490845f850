from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flagcount.enumeration import (
    EnumerationJob,
    HeightKind,
    brute_force_flags,
    brute_force_primitive_sublattices,
    count_flags,
    count_primitive_sublattices,
    dual_flag,
    enumerate_flags,
    enumerate_primitive_sublattices,
    enumerate_superlattices,
    height_ac,
    height_inf,
)
from flagcount.lattice import FlagChain, LatticeError, PrimitiveLattice, RationalGram

I2, I3 = RationalGram.identity(2), RationalGram.identity(3)


def spans(lattices):
    return [lat.rows for lat in lattices]


# ---------------------------------------------------------------- sublattices

def test_rank1_in_z2_examples():
    got = spans(enumerate_primitive_sublattices(I2, 1, 4))
    assert got == [((0, 1),), ((1, -1),), ((1, 0),), ((1, 1),)]
    assert sorted(spans(enumerate_primitive_sublattices(I2, 1, 1))) == [((0, 1),), ((1, 0),)]


def test_output_is_sorted_by_hnf():
    out = enumerate_primitive_sublattices(I3, 2, 10)
    assert spans(out) == sorted(spans(out))
    assert len(set(spans(out))) == len(out)


def test_coordinate_planes():
    out = enumerate_primitive_sublattices(I3, 2, 1)
    assert sorted(spans(out)) == sorted([((1, 0, 0), (0, 1, 0)), ((1, 0, 0), (0, 0, 1)), ((0, 1, 0), (0, 0, 1))])


def test_full_rank_and_errors():
    assert spans(enumerate_primitive_sublattices(I2, 2, 1)) == [((1, 0), (0, 1))]
    with pytest.raises(LatticeError):
        enumerate_primitive_sublattices(I2, 3, 4)
    with pytest.raises(ValueError):
        enumerate_primitive_sublattices([[1, 2], [2, 1]], 1, 4)


def test_brute_force_examples():
    assert len(brute_force_primitive_sublattices(I2, 1, 4, 2)) == 4
    assert len(brute_force_primitive_sublattices(I2, 1, 2, 2)) == 4
    assert spans(brute_force_primitive_sublattices(RationalGram.identity(1), 1, 1, 1)) == [((1,),)]


@pytest.mark.parametrize("n, r", [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])
@pytest.mark.parametrize("bound", [1, 3, 8, 16])
def test_oracle_equivalence_identity(n, r, bound):
    # A reduced basis b1, b2 of a rank-2 lattice has |b1|²|b2|² <= (4/3)·covol²
    # and |b1| >= 1, so every vector of it has |b2|² <= 21 and coordinates <= 4.
    radius = 4 if r <= 2 else 2
    if r == 3:
        bound = min(bound, 3)
    ident = RationalGram.identity(n)
    fast = enumerate_primitive_sublattices(ident, r, bound)
    assert fast == brute_force_primitive_sublattices(ident, r, bound, radius)
    assert count_primitive_sublattices(ident, r, bound) == len(fast)


@st.composite
def small_grams(draw, k):
    a = np.array(draw(st.lists(st.lists(st.integers(-1, 1), min_size=k, max_size=k), min_size=k, max_size=k)))
    g = a @ a.T + np.eye(k, dtype=int)
    scale = draw(st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(3, 2)]))
    return [[Fraction(int(x)) * scale for x in row] for row in g]


@settings(max_examples=15)
@given(st.integers(2, 3).flatmap(lambda k: st.tuples(small_grams(k), st.integers(1, 2), st.integers(1, 8))))
def test_oracle_equivalence_random_gram(data):
    g, r, bound = data
    k = len(g)
    mu = float(np.linalg.eigvalsh(np.array(g, dtype=float)).min())
    # every vector of a reduced basis has Q <= (4/3)·bound/λ₁² <= (4/3)·bound/μ, so |x|∞ <= sqrt(that/μ)
    radius = math.isqrt(int(4 * bound / (3 * mu * mu)) + 1) + 1
    fast = enumerate_primitive_sublattices(g, r, bound)
    assert fast == brute_force_primitive_sublattices(g, r, bound, radius)


@given(st.integers(1, 12), st.integers(1, 12))
def test_monotone_in_bound(b1, b2):
    lo, hi = sorted((b1, b2))
    small = set(spans(enumerate_primitive_sublattices(I3, 1, lo)))
    big = set(spans(enumerate_primitive_sublattices(I3, 1, hi)))
    assert small <= big


# ---------------------------------------------------------------- superlattices

def test_superlattice_examples():
    base = PrimitiveLattice.from_rows([[1, 0]])
    assert spans(enumerate_superlattices(base, 2, 1)) == [((1, 0), (0, 1))]
    base = PrimitiveLattice.from_rows([[1, 0, 0]])
    got = sorted(spans(enumerate_superlattices(base, 2, 4)))
    want = sorted(PrimitiveLattice.from_rows([[1, 0, 0], v]).rows for v in [(0, 1, 0), (0, 0, 1), (0, 1, 1), (0, 1, -1)])
    assert got == want
    p = PrimitiveLattice.from_rows([[1, 2, 3]])
    assert enumerate_superlattices(p, 1, 14) == [p]
    assert enumerate_superlattices(p, 1, 13) == []
    with pytest.raises(LatticeError):
        enumerate_superlattices(p, 4, 100)


@pytest.mark.parametrize("base_rows", [[[1, 0, 0]], [[1, 1, 0]], [[1, 2, 2]], [[1, 0, 0, 0], [0, 1, 1, 0]]])
def test_superlattices_match_filtered_sublattices(base_rows):
    base = PrimitiveLattice.from_rows(base_rows)
    n = base.n
    ident = RationalGram.identity(n)
    bound = 4 * base.covol_sq
    from flagcount.lattice import solve_in_basis

    def contains(big):
        try:
            solve_in_basis(base.rows, big.rows)
            return True
        except LatticeError:
            return False

    want = [lat for lat in enumerate_primitive_sublattices(ident, base.r + 1, bound) if contains(lat)]
    assert enumerate_superlattices(base, base.r + 1, bound) == want


# ---------------------------------------------------------------- heights

def test_height_examples():
    coord = FlagChain.from_bases((1, 1, 1), [[[1, 0, 0]], [[1, 0, 0], [0, 1, 0]]])
    assert height_inf(coord) == 1 and height_ac(coord) == 1
    f = FlagChain.from_bases((1, 1), [[[1, 1]]])
    assert height_inf(f) == 2
    assert height_ac(f) == 4
    g = FlagChain.from_bases((1, 1, 1), [[[1, 2, 0]], [[1, 2, 0], [0, 0, 1]]])
    assert height_inf(g) == 5
    h = FlagChain(g.partition, (PrimitiveLattice(g.lattices[0].basis, Fraction(2)),
                                PrimitiveLattice(g.lattices[1].basis, Fraction(3)), g.lattices[2]))
    assert height_ac(h) == 36


# ---------------------------------------------------------------- flags

def _job(part, height, bound_sq):
    return EnumerationJob.make(part, height, bound_sq=bound_sq)


def test_flag_examples():
    assert len(list(enumerate_flags(_job((1, 1), "inf", 4)))) == 4
    assert len(list(enumerate_flags(_job((1, 1), "ac", 4)))) == 4
    assert len(list(enumerate_flags(_job((1, 1), "inf", 1)))) == 2
    # height 1: exactly the coordinate flags, n!/(d1!...dl!) of them
    assert count_flags(_job((1, 1, 1), "inf", 1)) == 6
    assert count_flags(_job((1, 2, 1), "ac", 1)) == 12
    assert count_flags(_job((3,), "inf", 1)) == 1


def test_job_validation():
    with pytest.raises(ValueError):
        EnumerationJob.make((1, 0), "inf", X=2)
    with pytest.raises(ValueError):
        EnumerationJob.make((1, 1), "inf", bound_sq=Fraction(1, 2))
    with pytest.raises(ValueError):
        EnumerationJob.make((1, 1), "sup", X=2)


CASES = [((1, 1), "inf", 30), ((1, 1), "ac", 60), ((1, 2), "inf", 9), ((2, 1), "inf", 9),
         ((1, 2), "ac", 40), ((2, 1), "ac", 40), ((1, 1, 1), "inf", 6), ((1, 1, 1), "ac", 40)]


@pytest.mark.parametrize("part, height, bound", CASES)
def test_flags_match_brute_force_both_orders(part, height, bound):
    job = _job(part, height, bound)
    bottom = list(enumerate_flags(job, order="bottom-up"))
    top = list(enumerate_flags(job, order="top-down"))
    # In Z³ every member here has covol² <= 9 (INF bound, or forced by the AC
    # budget), so a reduced basis has |b|² <= (4/3)·9 = 12: radius 3 suffices.
    # In Z² covol² <= 30 gives coordinates <= 5.
    oracle = brute_force_flags(job, 3 if sum(part) == 3 else 6)
    assert bottom == top == oracle
    assert bottom == sorted(bottom, key=FlagChain.key)
    assert count_flags(job, order="bottom-up") == count_flags(job, order="top-down") == len(bottom)
    for f in bottom:
        f.validate()
        h = height_inf(f) if job.height is HeightKind.INF else height_ac(f)
        assert h <= job.bound_sq


@pytest.mark.parametrize("part", [(1, 3), (2, 2), (1, 1, 2), (2, 1, 1), (1, 2, 1)])
@pytest.mark.parametrize("height, bound", [("inf", 4), ("ac", 16)])
def test_orders_agree_in_four_dimensions(part, height, bound):
    job = _job(part, height, bound)
    assert list(enumerate_flags(job, order="bottom-up")) == list(enumerate_flags(job, order="top-down"))


def test_ell2_anticanonical_is_power_of_sup():
    for f in enumerate_flags(_job((1, 2), "inf", 20)):
        assert height_ac(f) == height_inf(f) ** 3


@pytest.mark.parametrize("part", [(1, 2), (1, 1, 1), (1, 3), (2, 2), (1, 1, 2)])
@pytest.mark.parametrize("height", ["inf", "ac"])
def test_duality_bijection(part, height):
    bound = 12 if height == "inf" else 60
    job = _job(part, height, bound)
    rev = _job(tuple(reversed(part)), height, bound)
    flags = list(enumerate_flags(job))
    duals = [dual_flag(f) for f in flags]
    assert sorted(duals, key=FlagChain.key) == list(enumerate_flags(rev))
    for f, g in zip(flags, duals):
        assert height_inf(g) == height_inf(f)
        assert height_ac(g) == height_ac(f)
        assert dual_flag(g) == f


def test_workers_give_identical_output():
    job = _job((1, 2), "inf", 60)
    single = list(enumerate_flags(job))
    assert list(enumerate_flags(job, workers=2)) == single
    assert count_flags(job, workers=2) == len(single)
    job = _job((1, 1, 1), "ac", 400)
    assert list(enumerate_flags(job, workers=2)) == list(enumerate_flags(job))


def test_unknown_order_rejected():
    with pytest.raises(ValueError):
        count_flags(_job((1, 1), "inf", 4), order="sideways")
