"""Leading constants, height-set volumes and main terms for flag counts.

Constants are evaluated with mpmath at ``DPS`` decimal digits and returned as
``mpmath.mpf``; callers that want floats convert explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import mpmath
from scipy import integrate

from .enumeration import HeightKind

DPS = 40


def _check_partition(p: Sequence[int]) -> Tuple[int, ...]:
    p = tuple(int(d) for d in p)
    if not p or any(d < 1 for d in p):
        raise ValueError("partition parts must be positive integers")
    return p


def _multinomial(p: Sequence[int]) -> int:
    out = math.factorial(sum(p))
    for d in p:
        out //= math.factorial(d)
    return out


def ball_volume(i: int) -> mpmath.mpf:
    """Lebesgue volume of the unit ball in R^i."""
    if i < 1:
        raise ValueError("dimension must be >= 1")
    with mpmath.workdps(DPS):
        half = mpmath.mpf(i) / 2
        return mpmath.pi ** half / mpmath.gamma(half + 1)


def zeta_value(k: int, terms: int = 30, corrections: int = 20) -> mpmath.mpf:
    """ζ(k) by a partial sum plus an Euler–Maclaurin tail.

    With 30 terms and 20 Bernoulli corrections the truncation error is far
    below 10^-40 for every k >= 2.
    """
    if k < 2:
        raise ValueError("zeta_value needs k >= 2")
    with mpmath.workdps(DPS + 10):
        s = mpmath.mpf(k)
        big_n = mpmath.mpf(terms)
        total = mpmath.fsum(mpmath.mpf(j) ** (-s) for j in range(1, terms))
        total += big_n ** (1 - s) / (s - 1) + big_n ** (-s) / 2
        rising = s  # s(s+1)...(s+2j-2)
        for j in range(1, corrections + 1):
            term = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * rising * big_n ** (-s - 2 * j + 1)
            total += term
            rising *= (s + 2 * j - 1) * (s + 2 * j)
    with mpmath.workdps(DPS):
        return +total


def _zeta_prod(lo: int, hi: int) -> mpmath.mpf:
    out = mpmath.mpf(1)
    for i in range(lo, hi + 1):
        out *= zeta_value(i)
    return out


def _ball_prod(lo: int, hi: int) -> mpmath.mpf:
    out = mpmath.mpf(1)
    for i in range(lo, hi + 1):
        out *= ball_volume(i)
    return out


def schmidt_constant(d: int, n: int) -> mpmath.mpf:
    """Leading constant for primitive rank-d sublattices of Z^n counted by covolume."""
    if not 1 <= d < n:
        raise ValueError("need 1 <= d < n")
    with mpmath.workdps(DPS):
        num = _zeta_prod(2, d) * _ball_prod(n - d + 1, n)
        den = _zeta_prod(n - d + 1, n) * _ball_prod(1, d)
        return mpmath.mpf(math.comb(n, d)) / n * num / den


def orientation_index(d: int) -> int:
    return 1 if d % 2 else 2


@dataclass
class SpaceMasses:
    mass_L: List[mpmath.mpf]
    mass_X: List[mpmath.mpf]
    mass_Gr: mpmath.mpf
    mass_P: mpmath.mpf


def space_masses(p: Sequence[int]) -> SpaceMasses:
    """Total masses of the block spaces, the oriented flag Grassmannian and the product."""
    p = _check_partition(p)
    n = sum(p)
    ell = len(p)
    with mpmath.workdps(DPS):
        mass_l = [_zeta_prod(2, d) for d in p]
        mass_x = []
        for d in p:
            den = mpmath.mpf(1)
            for i in range(1, d + 1):
                den *= i * ball_volume(i)
            mass_x.append(2 * orientation_index(d) * _zeta_prod(2, d) / den)
        vol_ratio = _ball_prod(1, n)
        for d in p:
            vol_ratio /= _ball_prod(1, d)
        mass_gr = mpmath.mpf(2) ** (ell - 1) * _multinomial(p) * vol_ratio
        mass_p = mass_gr
        for m in mass_l:
            mass_p *= m
        return SpaceMasses(mass_l, mass_x, mass_gr, mass_p)


def _exponent_product(p: Sequence[int]) -> int:
    out = 1
    for a, b in zip(p, p[1:]):
        out *= a + b
    return out


def flag_constant(p: Sequence[int]) -> mpmath.mpf:
    """Leading constant of the flag count, assembled from the space masses."""
    p = _check_partition(p)
    n = sum(p)
    ell = len(p)
    with mpmath.workdps(DPS):
        m = space_masses(p)
        return m.mass_P / (mpmath.mpf(2) ** (ell - 1) * _exponent_product(p) * _zeta_prod(2, n))


def flag_constant_literal(p: Sequence[int]) -> mpmath.mpf:
    """The closed-form constant term by term as it is usually printed.

    Kept for comparison only; it disagrees with :func:`flag_constant`.
    """
    p = _check_partition(p)
    n = sum(p)
    ell = len(p)
    with mpmath.workdps(DPS):
        out = mpmath.mpf(_multinomial(p)) / (mpmath.mpf(2) ** (ell - 1) * _exponent_product(p))
        for d in p[:-1]:
            out *= _zeta_prod(2, d) / _ball_prod(1, d)
        out /= _zeta_prod(2, p[-1])
        out *= _ball_prod(p[-1] + 1, n)
        return out


def discrepancy_report(max_n: int = 5) -> List[Dict]:
    """Rows comparing the literal and compositional constants (and the rank-d constant)."""
    rows = []
    with mpmath.workdps(DPS):
        for n in range(2, max_n + 1):
            for d in range(1, n):
                p = (d, n - d)
                comp = flag_constant(p)
                lit = flag_constant_literal(p)
                rows.append({
                    "partition": list(p),
                    "compositional": mpmath.nstr(comp, 20),
                    "literal": mpmath.nstr(lit, 20),
                    "rank_d_constant": mpmath.nstr(schmidt_constant(d, n), 20),
                    "literal_over_compositional": mpmath.nstr(lit / comp, 20),
                })
        for p in [(1, 1, 1), (1, 1, 2), (1, 2, 1), (2, 1, 1), (1, 1, 1, 1)]:
            comp = flag_constant(p)
            lit = flag_constant_literal(p)
            rows.append({
                "partition": list(p),
                "compositional": mpmath.nstr(comp, 20),
                "literal": mpmath.nstr(lit, 20),
                "rank_d_constant": None,
                "literal_over_compositional": mpmath.nstr(lit / comp, 20),
            })
    return rows


def height_exponent(p: Sequence[int], height) -> int:
    p = _check_partition(p)
    if HeightKind.parse(height) is HeightKind.AC:
        return 1
    return 2 * sum(p) - p[0] - p[-1]


def log_poly_coeffs(p: Sequence[int]) -> List[mpmath.mpf]:
    """Coefficients a_j of Σ a_j (log X)^j in the anticanonical main term."""
    ell = len(_check_partition(p))
    if ell < 2:
        return []
    return [mpmath.mpf((-1) ** (ell - 2 - j)) / mpmath.factorial(j) for j in range(ell - 1)]


def _to_mpf(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


@dataclass
class Prediction:
    partition: Tuple[int, ...]
    height: HeightKind
    exponent: int
    coefficient: mpmath.mpf
    log_poly: List[mpmath.mpf] = field(default_factory=list)

    def at(self, X) -> mpmath.mpf:
        if X < 1:
            raise ValueError("X must be >= 1")
        with mpmath.workdps(DPS):
            X = _to_mpf(X)
            if self.height is HeightKind.INF:
                return self.coefficient * X ** self.exponent
            lx = mpmath.log(X)
            return self.coefficient * X * mpmath.fsum(a * lx ** j for j, a in enumerate(self.log_poly))

    def as_dict(self, X=None) -> Dict:
        out = {
            "partition": list(self.partition),
            "height": self.height.value,
            "exponent": self.exponent,
            "coefficient": float(self.coefficient),
            "log_poly_coeffs": [float(a) for a in self.log_poly],
        }
        if X is not None:
            out["X"] = float(X)
            out["main_term"] = float(self.at(X))
        return out


def predict(p: Sequence[int], height) -> Prediction:
    p = _check_partition(p)
    height = HeightKind.parse(height)
    log_poly = log_poly_coeffs(p) if height is HeightKind.AC else []
    return Prediction(p, height, height_exponent(p, height), flag_constant(p), log_poly)


def main_term(p: Sequence[int], height, X) -> mpmath.mpf:
    """Predicted leading count of flags with height <= X."""
    return predict(p, height).at(X)


def f_closed(m: int, T: float) -> float:
    """Volume of {x >= 0, Σx <= T} weighted by exp(Σx), closed form."""
    if m < 1 or T < 0:
        raise ValueError("need m >= 1 and T >= 0")
    s = sum((-1) ** (m - i - 1) * T ** i / math.factorial(i) for i in range(m))
    return math.exp(T) * s + (-1) ** m


def f_quadrature(m: int, T: float, tol: float = 1e-12) -> float:
    """Same quantity by nested adaptive quadrature: f_m(T) = ∫_0^T e^x f_{m−1}(T − x) dx."""
    if m < 1 or T < 0:
        raise ValueError("need m >= 1 and T >= 0")

    def inner(x, depth):
        if depth == 0:
            return 1.0
        val, _ = integrate.quad(lambda y: math.exp(y) * inner(x - y, depth - 1), 0.0, x,
                                epsabs=tol, epsrel=tol, limit=200)
        return val

    return inner(T, m)


def aprime_volume(p: Sequence[int], T: float, height) -> float:
    """Measure of the height set {heights <= e^T} in the torus coordinates."""
    p = _check_partition(p)
    if T < 0:
        raise ValueError("T must be >= 0")
    exps = [a + b for a, b in zip(p, p[1:])]
    if HeightKind.parse(height) is HeightKind.INF:
        out = 1.0
        for e in exps:
            out *= math.expm1(e * T) / e
        return out
    if not exps:
        return 1.0
    return f_closed(len(exps), T) / math.prod(exps)
