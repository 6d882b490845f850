"""Iwasawa coordinates, rank-2 shapes and subspace directions of flags."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .lattice import FlagChain, RationalGram, quotient_factor_gram


@dataclass(frozen=True)
class IwasawaTriple:
    k: np.ndarray
    a: np.ndarray  # diagonal entries
    n_upper: np.ndarray

    def product(self) -> np.ndarray:
        return self.k @ np.diag(self.a) @ self.n_upper


def iwasawa_decompose(g, det_tol: float = 1e-9) -> IwasawaTriple:
    """g = k · diag(a) · n_upper with k orthogonal, a > 0, n_upper unipotent.

    Householder QR followed by flipping signs so the triangular diagonal is positive.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("square matrix expected")
    d = np.linalg.det(g)
    if abs(d - 1.0) > det_tol:
        raise ValueError(f"determinant must be 1, got {d:.3g}")
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    if np.any(signs == 0) or np.min(np.abs(np.diag(r))) < 1e-12 * max(1.0, np.abs(r).max()):
        raise ValueError("matrix is numerically singular")
    q = q * signs
    r = signs[:, None] * r
    a = np.diag(r).copy()
    return IwasawaTriple(q, a, r / a[:, None])


@dataclass(frozen=True)
class RefinedCoordinates:
    t: Tuple[float, ...]
    s_blocks: Tuple[Tuple[float, ...], ...]

    def block_covols(self) -> List[float]:
        """covol(Λ^(j)) for j = 1..ℓ−1."""
        return [math.exp(x) for x in self.t]


def refined_coordinates(g, partition: Sequence[int]) -> RefinedCoordinates:
    """Log covolumes of the column-spanned flag and the within-block shape parameters.

    t_j is the log covolume of the first D_j columns. Inside block j, s_i
    measures how the first i Gram–Schmidt lengths deviate from the block's
    average scale: exp(i·(t_j − t_{j−1})/d_j − s_i/2) is the covolume of the
    first i columns of the block in the factor lattice.
    """
    partition = tuple(int(d) for d in partition)
    g = np.asarray(g, dtype=float)
    if sum(partition) != g.shape[0]:
        raise ValueError("partition does not match matrix size")
    tri = iwasawa_decompose(g)
    loga = np.log(tri.a)
    t_all = [0.0]
    s_blocks = []
    start = 0
    for d in partition:
        t_prev = t_all[-1]
        block = loga[start:start + d]
        t_here = t_prev + float(np.sum(block))
        avg = (t_here - t_prev) / d
        partial = np.cumsum(block)
        s_blocks.append(tuple(float(2 * ((i + 1) * avg - partial[i])) for i in range(d - 1)))
        t_all.append(t_here)
        start += d
    return RefinedCoordinates(tuple(t_all[1:-1]), tuple(s_blocks))


# ---------------------------------------------------------------- rank-2 shapes

@dataclass(frozen=True)
class ShapePoint2:
    """Point x + iy of the modular fundamental domain, stored exactly as (x, y²)."""

    x_exact: Fraction
    y_sq: Fraction

    @property
    def x(self) -> float:
        return float(self.x_exact)

    @property
    def y(self) -> float:
        return math.sqrt(self.y_sq)

    def as_list(self) -> List[float]:
        return [self.x, self.y]


def _reduce_form(a: Fraction, b: Fraction, c: Fraction):
    """Gauss reduction of a·x² + 2b·xy + c·y²: −a < 2b <= a <= c, b >= 0 if a == c."""
    while True:
        m = math.ceil(b / a - Fraction(1, 2))
        if m:
            c = c - 2 * m * b + m * m * a
            b = b - m * a
        if c < a:
            a, b, c = c, -b, a
            continue
        break
    if a == c and b < 0:
        b = -b
    return a, b, c


def shape2_reduce(gr) -> ShapePoint2:
    """Shape of a rank-2 lattice from its Gram matrix.

    Uses the boundary convention −1/2 < x <= 1/2, and x >= 0 on the unit arc.
    """
    g = RationalGram.of(gr)
    if g.k != 2:
        raise ValueError("2x2 Gram matrix expected")
    a, b, c = _reduce_form(g.entries[0][0], g.entries[0][1], g.entries[1][1])
    return ShapePoint2(b / a, (a * c - b * b) / (a * a))


@dataclass(frozen=True)
class BlockShape:
    """Shape of one block of a flag: rank-1 (trivial), rank-2, or a normalized Gram."""

    rank: int
    point: Optional[ShapePoint2] = None
    normalized_gram: Optional[Tuple[Tuple[float, ...], ...]] = None

    @property
    def canonical(self) -> bool:
        return self.rank <= 2

    def as_json(self):
        if self.rank == 1:
            return None
        if self.point is not None:
            return self.point.as_list()
        return {"gram": [list(r) for r in self.normalized_gram], "canonical": False}


def shape_vector(f: FlagChain) -> List[BlockShape]:
    out = []
    for j, d in enumerate(f.partition, start=1):
        if d == 1:
            out.append(BlockShape(1))
            continue
        g = quotient_factor_gram(f, j)
        if d == 2:
            out.append(BlockShape(2, point=shape2_reduce(g)))
            continue
        arr = np.array([[float(x) for x in row] for row in g.entries])
        arr /= np.linalg.det(arr) ** (1.0 / d)
        out.append(BlockShape(d, normalized_gram=tuple(tuple(float(x) for x in row) for row in arr)))
    return out


# ---------------------------------------------------------------- directions

@dataclass(frozen=True)
class Direction:
    frame: np.ndarray  # orthonormal rows spanning the subspace
    projection: np.ndarray
    unit: Optional[np.ndarray] = None  # rank 1 only, first nonzero coordinate positive

    def as_json(self):
        if self.unit is not None:
            return [float(x) for x in self.unit]
        return [[float(x) for x in row] for row in self.frame]


def _canonical_unit(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    for x in v:
        if abs(x) > 1e-15:
            return v if x > 0 else -v
    return v


def subspace_direction(rows) -> Direction:
    b = np.asarray(rows, dtype=float)
    q, r = np.linalg.qr(b.T)
    q = q * np.sign(np.diag(r))
    frame = q.T
    proj = frame.T @ frame
    unit = _canonical_unit(b[0]) if b.shape[0] == 1 else None
    return Direction(frame, proj, unit)


def direction(f: FlagChain) -> List[Direction]:
    """Directions of Λ^(1), ..., Λ^(ℓ−1).

    Frames come from the Hermite normal form basis, so equal lattices give
    identical frames; projection matrices compare subspaces basis-free.
    """
    return [subspace_direction(lat.rows) for lat in f.lattices[:-1]]
