"""ell-point correlation sums R_ell^N for product test functions.

Points are compared in exact fixed-point arithmetic. For an indicator factor
[lo, hi] the condition lo <= N * delta <= hi on a circle difference delta
becomes an integer window on the signed numerator of delta, so the naive and
windowed algorithms agree tuple for tuple, not just up to rounding.
"""

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import zeta

from ._parallel import pmap, split
from .errors import ResourceError
from .sequence import Mod1Sequence

MAX_ELL = 6
DEFAULT_TUPLE_BUDGET = 20_000_000


@dataclass(frozen=True)
class IndicatorInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if not self.lo < self.hi:
            raise ValueError(f"indicator needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def integral(self) -> Fraction:
        return self.hi - self.lo

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return ((x >= self.lo) & (x <= self.hi)).astype(float)


@dataclass(frozen=True)
class FejerBump:
    """f(x) = A (sin(pi A x) / (pi A x))^2, whose transform is max(0, 1 - |t|/A)."""

    width: Fraction

    def __post_init__(self):
        object.__setattr__(self, "width", Fraction(self.width))
        if self.width <= 0:
            raise ValueError("Fejer width must be positive")

    @property
    def integral(self) -> Fraction:
        return Fraction(1)

    def __call__(self, x):
        A = float(self.width)
        return A * np.sinc(A * np.asarray(x, dtype=float)) ** 2

    def fourier(self, t):
        t = np.asarray(t, dtype=float)
        return np.maximum(0.0, 1.0 - np.abs(t) / float(self.width))


Factor = Union[IndicatorInterval, FejerBump]


@dataclass(frozen=True)
class TestFunction:
    factors: Tuple[Factor, ...]
    scale: Fraction = Fraction(1)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "scale", Fraction(self.scale))
        if not self.factors:
            raise ValueError("a test function needs at least one factor")

    @property
    def arity(self) -> int:
        return len(self.factors)

    @property
    def expectation(self) -> Fraction:
        out = self.scale
        for fac in self.factors:
            out *= fac.integral
        return out

    @property
    def is_indicator(self) -> bool:
        return all(isinstance(f, IndicatorInterval) for f in self.factors)

    @property
    def is_fejer(self) -> bool:
        return all(isinstance(f, FejerBump) for f in self.factors)

    def scaled(self, c) -> "TestFunction":
        return TestFunction(self.factors, self.scale * Fraction(c))


def indicator_box(intervals) -> TestFunction:
    return TestFunction(tuple(IndicatorInterval(lo, hi) for lo, hi in intervals))


def fejer(width, arity: int) -> TestFunction:
    return TestFunction(tuple(FejerBump(width) for _ in range(arity)))


def parse_support(text: str) -> TestFunction:
    """Parse ``"a1,b1;a2,b2;..."`` into an indicator box."""
    intervals = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            lo, hi = (Fraction(s.strip()) for s in part.split(","))
        except ValueError:
            raise ValueError(f"bad interval {part!r}; expected 'lo,hi'") from None
        intervals.append((lo, hi))
    return indicator_box(intervals)


def poisson_reference(f: TestFunction) -> Fraction:
    """The Poissonian limit: the integral of f."""
    return f.expectation


@dataclass
class CorrelationResult:
    ell: int
    N: int
    value: float
    tuple_count: Optional[int]
    expectation: float
    tail_bound: float = 0.0
    extra: dict = field(default_factory=dict)


def _check_args(seq: Mod1Sequence, ell: int, f: TestFunction):
    N = seq.N
    if not 2 <= ell <= MAX_ELL:
        raise ValueError(f"ell must lie in [2, {MAX_ELL}], got {ell}")
    if N < ell:
        raise ValueError(f"need N >= ell, got N={N}, ell={ell}")
    if f.arity != ell - 1:
        raise ValueError(f"test function has arity {f.arity}, expected {ell - 1}")
    half = Fraction(N, 2)
    for fac in f.factors:
        if isinstance(fac, IndicatorInterval):
            if not (-half < fac.lo and fac.hi < half):
                raise ValueError(
                    f"indicator support [{fac.lo}, {fac.hi}] must lie inside "
                    f"(-N/2, N/2) = ({-half}, {half}); wider supports wrap around"
                )


def _windows(f: TestFunction, N: int, precision: int):
    """Integer bounds [Dlo, Dhi] on the signed numerator of a circle difference."""
    scale = 1 << precision
    out = []
    for fac in f.factors:
        lo = fac.lo * scale / N
        hi = fac.hi * scale / N
        out.append((math.ceil(lo), math.floor(hi)))
    return out


def _signed(diff: int, precision: int) -> int:
    half = 1 << (precision - 1)
    return ((diff + half) % (1 << precision)) - half


# ---------------------------------------------------------------------------
# naive reference
# ---------------------------------------------------------------------------


def _pair_relation(seq: Mod1Sequence, window):
    """adj[a] = indices b != a with signed(v_a - v_b) inside the window."""
    dlo, dhi = window
    v = seq.numerators
    P = seq.precision
    N = len(v)
    if P == 64:
        arr = np.array(v, dtype=np.uint64)
        diff = (arr[:, None] - arr[None, :]).view(np.int64)
        mask = (diff >= dlo) & (diff <= dhi)
        np.fill_diagonal(mask, False)
        return [np.flatnonzero(row).tolist() for row in mask]
    adj = []
    for a in range(N):
        va = v[a]
        adj.append([b for b in range(N) if b != a and dlo <= _signed(va - v[b], P) <= dhi])
    return adj


def _count_chains(adjs, starts):
    """Number of index chains n_1 -> ... -> n_ell with all n_i distinct."""
    depth = len(adjs)
    total = 0

    def extend(chain, level):
        nonlocal total
        last = chain[-1]
        if level == depth - 1:
            for nxt in adjs[level][last]:
                if nxt not in chain:
                    total += 1
            return
        for nxt in adjs[level][last]:
            if nxt not in chain:
                chain.append(nxt)
                extend(chain, level + 1)
                chain.pop()

    for s in starts:
        extend([s], 0)
    return total


def _periodized_fejer(delta, width: Fraction, N: int, K: int):
    """sum_{|k|<=K} f(N(delta+k)) plus the tail, for delta in [-1/2, 1/2).

    When A*N is an integer sin^2(pi A N (delta+k)) does not depend on k and the
    tail is a pair of Hurwitz zeta values; it is added exactly and the
    returned bound is 0. Otherwise the tail is bounded by 2/(pi^2 A N^2 (K-1/2)).
    """
    A = float(width)
    delta = np.asarray(delta, dtype=float)
    total = np.zeros_like(delta)
    for k in range(-K, K + 1):
        total += A * np.sinc(A * N * (delta + k)) ** 2
    AN = width * N
    if AN.denominator == 1:
        s2 = np.sin(np.pi * A * N * delta) ** 2
        tail = s2 / (np.pi**2 * A * N * N) * (zeta(2, K + 1 + delta) + zeta(2, K + 1 - delta))
        return total + tail, 0.0
    return total, 2.0 / (np.pi**2 * A * N * N * (K - 0.5))


def fejer_k_range(f: TestFunction, N: int, n_tuples: int, tolerance: float) -> int:
    """Smallest K whose propagated truncation bound is within tolerance."""
    K = 16
    while _fejer_tail_total(f, N, n_tuples, K) > tolerance:
        K *= 2
        if K > 1 << 40:
            break
    return K


def _fejer_tail_total(f, N, n_tuples, K):
    tails, gmax = [], []
    for fac in f.factors:
        A = float(fac.width)
        if (fac.width * N).denominator == 1:
            tails.append(0.0)
        else:
            tails.append(2.0 / (math.pi**2 * A * N * N * (K - 0.5)))
        gmax.append(A + 1.0 / (A * N * N))
    per_tuple = 0.0
    for i, t in enumerate(tails):
        others = math.prod(g for j, g in enumerate(gmax) if j != i)
        per_tuple += t * others
    return float(abs(f.scale)) * n_tuples / N * per_tuple


def distinct_tuple_count(N: int, ell: int) -> int:
    return math.perm(N, ell)


def _contract_distinct(mats):
    """sum over distinct (n_1..n_ell) of prod_i M_i[n_i, n_{i+1}]."""
    ell = len(mats) + 1
    N = mats[0].shape[0]
    letters = "abcdefg"[:ell]
    expr = ",".join(letters[i] + letters[i + 1] for i in range(ell - 1)) + "->" + letters
    T = np.einsum(expr, *mats)
    grids = np.indices((N,) * ell, sparse=True)
    mask = np.ones((1,) * ell, dtype=bool)
    for i in range(ell):
        for j in range(i + 1, ell):
            mask = mask & (grids[i] != grids[j])
    return float(np.sum(T * mask))


def r_ell_naive(
    seq: Mod1Sequence,
    ell: int,
    f: TestFunction,
    tolerance: float = 1e-10,
    max_k: int = 4096,
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> CorrelationResult:
    """Reference evaluation of R_ell^N by exhaustive pair comparison.

    Indicator factors: every ordered pair is tested against every factor's
    window, then distinct chains are counted. Fejer factors: the full
    distinct-tuple tensor is summed with a periodized kernel; ``tolerance``
    caps the certified k-truncation error.
    """
    _check_args(seq, ell, f)
    N = seq.N
    if f.is_indicator:
        windows = _windows(f, N, seq.precision)
        adjs = [_pair_relation(seq, w) for w in windows]
        count = _count_chains(adjs, range(N))
        value = float(f.scale * Fraction(count, N))
        return CorrelationResult(ell, N, value, count, float(f.expectation))
    if not f.is_fejer:
        raise ValueError("mixed indicator/Fejer test functions are not supported")
    if N**ell > budget:
        raise ResourceError(
            f"Fejer naive evaluation needs N^ell = {N**ell} tuple cells (budget {budget})",
            estimated_cost=N**ell,
            budget=budget,
        )
    n_tuples = distinct_tuple_count(N, ell)
    K = fejer_k_range(f, N, n_tuples, tolerance)
    if K > max_k:
        raise ValueError(
            f"k-truncation needs |k| <= {K} to reach tolerance {tolerance:g} (max_k={max_k})"
        )
    P = seq.precision
    if P == 64:
        arr = np.array(seq.numerators, dtype=np.uint64)
        delta = (arr[:, None] - arr[None, :]).view(np.int64) / 2.0**64
    else:
        v = seq.numerators
        delta = np.array(
            [[_signed(a - b, P) / 2.0**P for b in v] for a in v], dtype=float
        )
    mats = []
    for fac in f.factors:
        G, _ = _periodized_fejer(delta, fac.width, N, K)
        mats.append(G)
    tail = _fejer_tail_total(f, N, n_tuples, K)
    total = _contract_distinct(mats)
    value = float(f.scale) * total / N
    return CorrelationResult(ell, N, value, None, float(f.expectation), tail_bound=tail)


# ---------------------------------------------------------------------------
# sorted-window algorithm
# ---------------------------------------------------------------------------


def _window_job(args):
    sorted_vals, sorted_idx, values, windows, precision, start, stop = args
    mod = 1 << precision
    n_vals = len(sorted_vals)
    depth = len(windows)
    total = 0

    def candidates(x, window):
        dlo, dhi = window
        lo = (x - dhi) % mod
        hi = lo + (dhi - dlo)
        if hi < mod:
            i, j = bisect_left(sorted_vals, lo), bisect_right(sorted_vals, hi)
            return sorted_idx[i:j]
        i = bisect_left(sorted_vals, lo)
        j = bisect_right(sorted_vals, hi - mod)
        return sorted_idx[i:n_vals] + sorted_idx[:j]

    def extend(chain, level):
        nonlocal total
        cands = candidates(values[chain[-1]], windows[level])
        if level == depth - 1:
            for c in cands:
                if c not in chain:
                    total += 1
            return
        for c in cands:
            if c not in chain:
                chain.append(c)
                extend(chain, level + 1)
                chain.pop()

    for s in range(start, stop):
        extend([s], 0)
    return total


def r_ell_windowed(
    seq: Mod1Sequence, ell: int, f: TestFunction, workers: int = 1
) -> CorrelationResult:
    """R_ell^N for indicator boxes via sorted circular windows.

    Points are sorted once; each chain is extended by binary-searching the arc
    of points whose scaled difference to the chain end lies in the next
    factor's interval. Index distinctness is enforced across the whole chain.
    """
    _check_args(seq, ell, f)
    if not f.is_indicator:
        raise ValueError("the windowed algorithm handles indicator factors only")
    N = seq.N
    values = list(seq.numerators)
    order = sorted(range(N), key=values.__getitem__)
    sorted_vals = [values[i] for i in order]
    windows = _windows(f, N, seq.precision)
    jobs = [
        (sorted_vals, order, values, windows, seq.precision, a, b)
        for a, b in split(N, workers)
    ]
    count = sum(pmap(_window_job, jobs, workers))
    value = float(f.scale * Fraction(count, N))
    return CorrelationResult(ell, N, value, count, float(f.expectation))


def r_ell(seq: Mod1Sequence, ell: int, f: TestFunction, workers: int = 1) -> CorrelationResult:
    """Fast path when available, naive otherwise."""
    if f.is_indicator:
        return r_ell_windowed(seq, ell, f, workers=workers)
    return r_ell_naive(seq, ell, f)

