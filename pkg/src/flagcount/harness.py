"""Comparing empirical flag counts and distributions with predictions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from statistics import NormalDist
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from .enumeration import EnumerationJob, HeightKind, count_flags
from .predictions import main_term


@dataclass(frozen=True)
class CountRecord:
    X: float
    count: int
    predicted: float
    ratio: float

    @classmethod
    def make(cls, X, count: int, predicted: float) -> "CountRecord":
        if count < 0:
            raise ValueError("count must be non-negative")
        ratio = count / predicted if predicted > 0 else math.nan
        return cls(float(X), int(count), float(predicted), ratio)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    max_residual: float


def fit_exponent(records: Sequence[CountRecord]) -> ExponentFit:
    """Least-squares slope of log(count) against log(X)."""
    xs = [r.X for r in records]
    if len(records) < 3 or len(set(xs)) < len(xs):
        raise ValueError("need at least 3 records with distinct X")
    if any(r.count <= 0 or r.X <= 0 for r in records):
        raise ValueError("counts and X must be positive")
    lx = np.log(np.array(xs, dtype=float))
    ly = np.log(np.array([r.count for r in records], dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return ExponentFit(float(slope), float(intercept), float(np.max(np.abs(resid))))


def ratio_table(partition: Sequence[int], height, Xs: Sequence, order: str = "auto",
                workers: int = 1, counter: Optional[Callable] = None) -> List[CountRecord]:
    """Count flags at each X and pair the count with the predicted main term."""
    xs = list(Xs)
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("Xs must be strictly increasing")
    height = HeightKind.parse(height)
    out = []
    for X in xs:
        job = EnumerationJob.make(partition, height, bound_sq=Fraction(X) ** 2)
        n = counter(job) if counter else count_flags(job, order=order, workers=workers)
        out.append(CountRecord.make(X, n, float(main_term(partition, height, X))))
    return out


# ---------------------------------------------------------------- χ²

def chi_square_threshold_99(dof: int) -> float:
    """99th percentile of χ²(dof) by the Wilson–Hilferty cube approximation.

    Relative error is below 0.5% for dof >= 3 (21.70 vs the tabulated 21.67 at 9).
    """
    if dof < 1:
        raise ValueError("dof must be >= 1")
    z = NormalDist().inv_cdf(0.99)
    c = 2.0 / (9.0 * dof)
    return dof * (1.0 - c + z * math.sqrt(c)) ** 3


@dataclass
class CellPartition:
    cells: List[Tuple[str, float]]
    classifier: Callable[[object], int]

    def __post_init__(self):
        masses = [m for _, m in self.cells]
        if any(m <= 0 for m in masses):
            raise ValueError("cell masses must be positive")
        if abs(sum(masses) - 1.0) > 1e-9:
            raise ValueError(f"cell masses sum to {sum(masses)!r}, not 1")

    @property
    def masses(self) -> List[float]:
        return [m for _, m in self.cells]

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    threshold_99: float
    observed: List[int]
    expected: List[float]

    @property
    def passed(self) -> bool:
        return self.statistic < self.threshold_99

    def contributions(self) -> List[float]:
        return [(o - e) ** 2 / e for o, e in zip(self.observed, self.expected)]


class CellsTooFine(ValueError):
    pass


def chi_square_uniform(cells: CellPartition, observations: Sequence[int]) -> ChiSquare:
    """Pearson statistic of cell counts against the cell masses."""
    k = len(cells)
    counts = [0] * k
    for i in observations:
        counts[i] += 1
    total = sum(counts)
    expected = [total * m for m in cells.masses]
    if min(expected) < 5:
        raise CellsTooFine("cells too fine: an expected cell count is below 5")
    stat = sum((o - e) ** 2 / e for o, e in zip(counts, expected))
    return ChiSquare(stat, chi_square_threshold_99(k - 1), counts, expected)


# ---------------------------------------------------------------- modular domain cells

def _upper_mass(x_lo: float, x_hi: float, y_level: float) -> float:
    """Unnormalized ∫∫ dx dy / y² over {x_lo <= x <= x_hi, y >= y_level} ∩ F₂."""
    if y_level == math.inf:
        return 0.0

    def integrand(x):
        return 1.0 / max(y_level, math.sqrt(1.0 - x * x))

    pts = [p for p in (-math.sqrt(max(0.0, 1 - y_level ** 2)), math.sqrt(max(0.0, 1 - y_level ** 2)))
           if x_lo < p < x_hi]
    val, _ = integrate.quad(integrand, x_lo, x_hi, points=pts or None, epsabs=1e-14, epsrel=1e-13)
    return val


def fundamental_domain_area() -> float:
    return _upper_mass(-0.5, 0.5, 0.0)


def _equal_mass_levels(bands: int) -> List[float]:
    """y-levels splitting F₂ into ``bands`` horizontal bands of equal measure."""
    total = fundamental_domain_area()
    levels = []
    for i in range(1, bands):
        target = total * (bands - i) / bands
        lo, hi = math.sqrt(3) / 2, 1e6
        levels.append(optimize.brentq(lambda y: _upper_mass(-0.5, 0.5, y) - target, lo, hi,
                                      xtol=1e-14))
    return levels


def modular_cells(k: int, y_levels: Optional[Sequence[float]] = None,
                  x_split: Optional[float] = None) -> CellPartition:
    """Partition of the modular fundamental domain into cells of known hyperbolic mass.

    By default the domain is cut into horizontal bands of equal mass (k odd)
    or k/2 such bands each split at |x| = 1/4 (k even). Explicit ``y_levels``
    override the band edges, and ``x_split`` the |x| cut (None or 0: no split).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if y_levels is None:
        if x_split is None:
            x_split = 0.25 if k % 2 == 0 and k > 2 else 0.0
        bands = k // 2 if x_split else k
        y_levels = _equal_mass_levels(bands)
    else:
        x_split = x_split or 0.0
        bands = len(y_levels) + 1
        if bands * (2 if x_split else 1) != k:
            raise ValueError("k does not match y_levels and x_split")
    edges = [0.0] + sorted(float(y) for y in y_levels) + [math.inf]
    xs = [(0.0, x_split), (x_split, 0.5)] if x_split else [(0.0, 0.5)]
    total = fundamental_domain_area()
    cells = []
    for lo, hi in zip(edges, edges[1:]):
        for a, b in xs:
            m = 2 * (_upper_mass(a, b, lo) - _upper_mass(a, b, hi)) / total
            cells.append((f"y in [{lo:.6g}, {hi:.6g}), |x| in [{a:g}, {b:g})", m))

    def classify(point) -> int:
        x, y = (point.x, point.y) if hasattr(point, "x") else point
        band = sum(1 for e in edges[1:-1] if y >= e)
        if not x_split:
            return band
        return 2 * band + (1 if abs(x) >= x_split else 0)

    return CellPartition(cells, classify)


# ---------------------------------------------------------------- sphere cells

def sphere_cap_cells(n: int, k: int) -> CellPartition:
    """Cells of equal uniform measure on unit vectors modulo ±.

    n = 3: bands in |z| of width 1/k (a band's area is proportional to its height).
    n = 2: arcs of the angle modulo π of length π/k.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if n == 3:
        cells = [(f"|z| in [{i}/{k}, {i + 1}/{k})", 1.0 / k) for i in range(k)]

        def classify(v) -> int:
            v = np.asarray(v, dtype=float)
            z = abs(v[2]) / np.linalg.norm(v)
            return min(int(z * k), k - 1)
    elif n == 2:
        cells = [(f"angle mod pi in [{i}/{k}, {i + 1}/{k}) pi", 1.0 / k) for i in range(k)]

        def classify(v) -> int:
            theta = math.atan2(float(v[1]), float(v[0])) % math.pi
            return min(int(theta / math.pi * k), k - 1)
    else:
        raise ValueError("sphere cells are only implemented for n = 2, 3")
    return CellPartition(cells, classify)
