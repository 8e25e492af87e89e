"""Nearest-neighbour gap distribution on the circle and its Taylor sandwich."""

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List

import numpy as np

from .sequence import Mod1Sequence


def circular_gaps(seq: Mod1Sequence) -> List[int]:
    """The N gaps between sorted neighbours, wraparound included, as numerators.

    They sum to exactly ``2**precision``.
    """
    u = sorted(seq.numerators)
    gaps = [u[i + 1] - u[i] for i in range(len(u) - 1)]
    gaps.append(u[0] + seq.scale - u[-1])
    return gaps


def _to_fraction(s) -> Fraction:
    return s if isinstance(s, Fraction) else Fraction(s)


def gap_cdf(seq: Mod1Sequence, s) -> float:
    """P_N(s): fraction of circular gaps strictly smaller than s/N."""
    N = seq.N
    if N < 2:
        raise ValueError("gap statistics need N >= 2")
    s = _to_fraction(s)
    if s <= 0:
        raise ValueError("s must be positive")
    # gap/2^P < s/N  <=>  gap * N * den < num * 2^P
    num, den = s.numerator, s.denominator
    bound = num * seq.scale
    hits = sum(1 for g in circular_gaps(seq) if g * N * den < bound)
    return hits / N


def gap_cdf_grid(seq: Mod1Sequence, s_grid) -> np.ndarray:
    """gap_cdf over many s, sharing one sort."""
    N = seq.N
    scaled = sorted(g * N for g in circular_gaps(seq))
    out = []
    for s in s_grid:
        s = _to_fraction(s)
        if s <= 0:
            raise ValueError("s must be positive")
        bound = s * seq.scale
        out.append(bisect.bisect_left(scaled, bound) / N)
    return np.array(out)


def taylor_sandwich_exact(s, K: int):
    """Exact rational partial sums (lower uses 2K terms, upper 2K-1 terms)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    s = _to_fraction(s)
    if s <= 0:
        raise ValueError("s must be positive")
    partial = Fraction(0)
    term = Fraction(1)
    upper = None
    for k in range(1, 2 * K + 1):
        term = term * s / k
        partial += term if k % 2 else -term
        if k == 2 * K - 1:
            upper = partial
    return partial, upper


def taylor_sandwich(s, K: int):
    """(sum_{k<=2K}, sum_{k<=2K-1}) of (-1)^{k+1} s^k / k!, bracketing 1 - exp(-s)."""
    lower, upper = taylor_sandwich_exact(s, K)
    return float(lower), float(upper)


@dataclass
class GapReport:
    N: int
    K: int
    s_grid: List[float]
    p_values: List[float]
    lower: List[float]
    upper: List[float]
    exp_ref: List[float]

    def rows(self):
        return list(zip(self.s_grid, self.p_values, self.lower, self.upper, self.exp_ref))


def parse_grid(text: str) -> List[Fraction]:
    """``"start:stop:step"`` (inclusive stop) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (Fraction(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int((stop - start) / step + Fraction(1, 10**9))
        return [start + i * step for i in range(n + 1)]
    return [Fraction(p) for p in text.split(",") if p.strip()]


def gap_report(seq: Mod1Sequence, s_grid, K: int = 3) -> GapReport:
    s_grid = [_to_fraction(s) for s in s_grid]
    p = gap_cdf_grid(seq, s_grid)
    lows, ups = zip(*(taylor_sandwich(s, K) for s in s_grid)) if s_grid else ((), ())
    return GapReport(
        N=seq.N,
        K=K,
        s_grid=[float(s) for s in s_grid],
        p_values=[float(x) for x in p],
        lower=list(lows),
        upper=list(ups),
        exp_ref=[-math.expm1(-float(s)) for s in s_grid],
    )
