"""Frequency-side view of the correlation sums.

With a Fejer-type test function the transform has compact support, so the
frequency expansion of R_ell^N is a finite sum and can be checked against the
direct (real-space) evaluation exactly, up to floating-point roundoff.

A chain frequency a = (a_1..a_{ell-1}) attached to the consecutive differences
x(n_i) - x(n_{i+1}) corresponds to the zero-sum coefficient vector

    b = (a_1, a_2 - a_1, ..., a_{ell-1} - a_{ell-2}, -a_{ell-1}),

since sum_i a_i (x_i - x_{i+1}) = sum_i b_i x_i. The phase is e(alpha Q_b(n)).
"""

import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from ._parallel import pmap
from .correlation import TestFunction, distinct_tuple_count, r_ell, r_ell_naive
from .counting import is_dth_power, max_matching_size
from .errors import ResourceError
from .sequence import Mod1Sequence, frac_fixed, generate, sample_alpha

DEFAULT_FREQUENCY_BUDGET = 5_000_000


# ---------------------------------------------------------------------------
# frequency sets
# ---------------------------------------------------------------------------


def chain_to_zero_sum(a) -> Tuple[int, ...]:
    a = tuple(a)
    b = [a[0]]
    for i in range(1, len(a)):
        b.append(a[i] - a[i - 1])
    b.append(-a[-1])
    return tuple(b)


def zero_sum_to_chain(b) -> Tuple[int, ...]:
    out, acc = [], 0
    for v in b[:-1]:
        acc += v
        out.append(acc)
    return tuple(out)


@dataclass(frozen=True)
class FrequencySet:
    """Zero-sum vectors (a_1..a_ell), a_ell = -(a_1+...+a_{ell-1}), |a_i| <= cutoff for i < ell.

    With ``m`` set, only vectors with all coordinates nonzero and m(a) == m are
    members (m(a) computed on the full ell-vector at degree ``d``).
    """

    ell: int
    cutoff: int
    d: Optional[int] = None
    m: Optional[int] = None

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        c = self.cutoff
        for head in product(range(-c, c + 1), repeat=self.ell - 1):
            if not any(head):
                continue
            vec = head + (-sum(head),)
            if self.m is not None:
                if 0 in vec or _m_cached(vec, self.d) != self.m:
                    continue
            yield vec

    def size_bound(self) -> int:
        return (2 * self.cutoff + 1) ** (self.ell - 1) - 1

    def count(self) -> int:
        if self.m is None:
            return self.size_bound()
        return count_frequency_set(self.ell, self.cutoff, self.d, self.m)


@lru_cache(maxsize=1 << 20)
def _power_pair(u: int, v: int, d: int) -> bool:
    return is_dth_power(-u * v, d)


def _m_cached(vec, d) -> int:
    k = len(vec)
    edges = [(i, j) for i in range(k) for j in range(i + 1, k) if _power_pair(vec[i], vec[j], d)]
    if not edges:
        return 0
    return max_matching_size(k, edges)


def build_frequency_set(
    ell: int,
    cutoff: int,
    d: Optional[int] = None,
    m: Optional[int] = None,
    budget: int = DEFAULT_FREQUENCY_BUDGET,
) -> FrequencySet:
    if ell < 2:
        raise ValueError("ell must be >= 2")
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    if m is not None and d is None:
        raise ValueError("an m filter needs the degree d")
    fs = FrequencySet(ell, cutoff, d, m)
    if fs.size_bound() > budget:
        raise ResourceError(
            f"frequency set ell={ell}, cutoff={cutoff} has {fs.size_bound()} candidates "
            f"(budget {budget})",
            estimated_cost=fs.size_bound(),
            budget=budget,
        )
    return fs


def _power_partners(d: int, u_max: int, v_max: int) -> Dict[int, List[int]]:
    """u -> all v (0 < |v| <= v_max) with -u v a d-th power, for 0 < |u| <= u_max."""
    out: Dict[int, List[int]] = {}
    t_max = 1
    while (t_max + 1) ** d <= u_max * v_max:
        t_max += 1
    for u in range(-u_max, u_max + 1):
        if u == 0:
            continue
        vs = set()
        for t in range(-t_max, t_max + 1):
            if t == 0:
                continue
            p = t**d
            if p % u == 0:
                v = -p // u
                if 0 < abs(v) <= v_max:
                    vs.add(v)
        if vs:
            out[u] = sorted(vs)
    return out


def _count_nonzero_zero_sum(ell: int, c: int) -> int:
    """#{(a_1..a_{ell-1}) in ([-c,c]\\0)^{ell-1} : sum != 0}."""
    dist = {0: 1}
    for _ in range(ell - 1):
        nxt = defaultdict(int)
        for s, k in dist.items():
            for v in range(-c, c + 1):
                if v:
                    nxt[s + v] += k
        dist = nxt
    return (2 * c) ** (ell - 1) - dist.get(0, 0)


def count_frequency_set(ell: int, cutoff: int, d: int, m: int) -> int:
    """|A_ell(cutoff, m)| without scanning the whole box.

    Vectors with m >= 1 contain a d-th power pair, and such pairs are rare, so
    they are generated from the pairs outward; m = 0 is the complement.
    """
    c = cutoff
    big = (ell - 1) * c
    partners = _power_partners(d, big, big)
    found = set()
    last = ell - 1
    for i in range(ell):
        for j in range(i + 1, ell):
            for u, vs in partners.items():
                if i < last and abs(u) > c:
                    continue
                for v in vs:
                    if j < last and abs(v) > c:
                        continue
                    free = [k for k in range(last) if k not in (i, j)]
                    if j < last:
                        # a_i, a_j fixed; the other free heads range over the box
                        for rest in product(range(-c, c + 1), repeat=len(free)):
                            head = [0] * last
                            head[i], head[j] = u, v
                            for k, val in zip(free, rest):
                                head[k] = val
                            found.add(tuple(head))
                    else:
                        # a_i and the closing coordinate fixed: one free head is solved for
                        if not free:
                            head = [0] * last
                            head[i] = u
                            if -u == v:
                                found.add(tuple(head))
                            continue
                        solve, loose = free[-1], free[:-1]
                        for rest in product(range(-c, c + 1), repeat=len(loose)):
                            head = [0] * last
                            head[i] = u
                            for k, val in zip(loose, rest):
                                head[k] = val
                            x = -v - sum(head)
                            if -c <= x <= c:
                                head[solve] = x
                                found.add(tuple(head))
    by_m = defaultdict(int)
    for head in found:
        vec = head + (-sum(head),)
        if 0 in vec:
            continue
        by_m[_m_cached(vec, d)] += 1
    if m >= 1:
        return by_m.get(m, 0)
    return _count_nonzero_zero_sum(ell, c) - sum(by_m.values())


# ---------------------------------------------------------------------------
# Poisson summation identity
# ---------------------------------------------------------------------------


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def _mobius(partition) -> int:
    out = 1
    for block in partition:
        k = len(block)
        out *= (-1) ** (k - 1) * math.factorial(k - 1)
    return out


def _power_sums(seq: Mod1Sequence, C: int) -> np.ndarray:
    """P[c + C] = sum_n e(c x_n) for |c| <= C, with c x_n reduced mod 1 exactly."""
    P = seq.precision
    mod = 1 << P
    out = np.empty(2 * C + 1, dtype=complex)
    for c in range(-C, C + 1):
        ph = np.array([((c * v) % mod) / mod for v in seq.numerators])
        out[c + C] = np.sum(np.exp(2j * np.pi * ph))
    return out


def distinct_exponential_sums(seq: Mod1Sequence, b_rows: np.ndarray) -> np.ndarray:
    """sum over distinct (n_1..n_ell) of e(sum_i b_i x(n_i)) for each row b.

    Uses Moebius inversion over set partitions: the distinct sum is
    sum_pi mu(pi) prod_{blocks} P(sum of b over the block).
    """
    ell = b_rows.shape[1]
    C = int(np.abs(b_rows).sum(axis=1).max()) if len(b_rows) else 0
    table = _power_sums(seq, C)
    total = np.zeros(len(b_rows), dtype=complex)
    for part in _set_partitions(list(range(ell))):
        term = np.full(len(b_rows), complex(_mobius(part)))
        for block in part:
            cs = b_rows[:, block].sum(axis=1)
            term = term * table[cs + C]
        total += term
    return total


@dataclass
class IdentityCheck:
    lhs: float
    rhs: float
    abs_diff: float
    tail_bound: float
    tolerance: float
    n_frequencies: int

    @property
    def passed(self) -> bool:
        return self.abs_diff <= self.tolerance + self.tail_bound

    def to_dict(self):
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_diff": self.abs_diff,
            "tail_bound": self.tail_bound,
            "tolerance": self.tolerance,
            "n_frequencies": self.n_frequencies,
            "passed": self.passed,
        }


def fourier_side(seq: Mod1Sequence, ell: int, f: TestFunction):
    """E[f] * (distinct fraction) + N^-ell sum_{a != 0} fhat(a/N) e(alpha Q_b(n)).

    Returns ``(value, number of nonzero frequencies)``.
    """
    N = seq.N
    ranges = []
    for fac in f.factors:
        top = math.ceil(fac.width * N) - 1  # fhat(a/N) > 0 iff |a| < A N
        ranges.append(np.arange(-top, top + 1))
    grids = np.meshgrid(*ranges, indexing="ij")
    a_rows = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    a_rows = a_rows[np.any(a_rows != 0, axis=1)]
    weight = np.ones(len(a_rows))
    for i, fac in enumerate(f.factors):
        weight *= fac.fourier(a_rows[:, i] / N)
    b_rows = np.concatenate(
        [a_rows[:, :1], np.diff(a_rows, axis=1), -a_rows[:, -1:]], axis=1
    )
    sums = distinct_exponential_sums(seq, b_rows) if len(a_rows) else np.zeros(0)
    scale = float(f.scale)
    zero_term = float(f.expectation) * distinct_tuple_count(N, ell) / N**ell
    freq_term = scale * float(np.real(np.sum(weight * sums))) / N**ell
    return zero_term + freq_term, len(a_rows)


def poisson_identity_check(
    seq: Mod1Sequence, ell: int, f: TestFunction, tolerance: float = 1e-8
) -> IdentityCheck:
    """Compare the direct correlation sum with its finite frequency expansion."""
    if not f.is_fejer:
        raise ValueError("the identity check needs Fejer factors (compactly supported transform)")
    if ell > 4 or seq.N > 60:
        raise ValueError("identity check is limited to ell <= 4 and N <= 60")
    lhs = r_ell_naive(seq, ell, f, tolerance=tolerance)
    if lhs.tail_bound > tolerance:
        raise ValueError(f"k-truncation tail {lhs.tail_bound:g} exceeds tolerance {tolerance:g}")
    rhs, n_freq = fourier_side(seq, ell, f)
    return IdentityCheck(
        lhs=lhs.value,
        rhs=rhs,
        abs_diff=abs(lhs.value - rhs),
        tail_bound=lhs.tail_bound,
        tolerance=tolerance,
        n_frequencies=n_freq,
    )


# ---------------------------------------------------------------------------
# coefficient tables
# ---------------------------------------------------------------------------


@dataclass
class CoefficientTable:
    N: int
    ell: int
    d: int
    entries: Dict[int, float]
    restrict_nonzero: bool
    degree_bound: int
    expectation_term: float = 0.0

    @property
    def convention(self) -> str:
        return "all coefficients nonzero" if self.restrict_nonzero else "all nonzero chain frequencies"

    def evaluate(self, alpha, precision: int = 64) -> complex:
        """sum_u c_u e(alpha u), reducing alpha*u mod 1 exactly."""
        total = 0j
        scale = 1 << precision
        for u, c in self.entries.items():
            total += c * np.exp(2j * np.pi * frac_fixed(alpha, u, precision) / scale)
        return total


def coefficient_table(
    N: int,
    d: int,
    f: TestFunction,
    restrict_nonzero: bool = False,
    budget: int = DEFAULT_FREQUENCY_BUDGET,
) -> CoefficientTable:
    """c_{u,N} = N^-ell sum*_n sum_{a != 0} fhat(a/N) 1(Q_b(n) = u).

    ``restrict_nonzero`` keeps only frequencies whose zero-sum vector b has no
    zero coordinate.
    """
    if not f.is_fejer:
        raise ValueError("coefficient tables need Fejer factors")
    ell = f.arity + 1
    heads = []
    for a in product(*(range(-(math.ceil(fac.width * N) - 1), math.ceil(fac.width * N)) for fac in f.factors)):
        if not any(a):
            continue
        b = chain_to_zero_sum(a)
        if restrict_nonzero and 0 in b:
            continue
        w = 1.0
        for fac, ai in zip(f.factors, a):
            w *= float(fac.fourier(ai / N))
        if w:
            heads.append((b, w))
    cost = distinct_tuple_count(N, ell) * len(heads)
    if cost > budget:
        raise ResourceError(
            f"coefficient table needs {cost} (tuple, frequency) pairs (budget {budget})",
            estimated_cost=cost,
            budget=budget,
        )
    powers = [n**d for n in range(1, N + 1)]
    acc = defaultdict(float)
    for tup in permutations(range(N), ell):
        pw = [powers[i] for i in tup]
        for b, w in heads:
            acc[sum(bi * p for bi, p in zip(b, pw))] += w
    norm = float(f.scale) / N**ell
    entries = {u: w * norm for u, w in acc.items()}
    bound = max((abs(u) for u in entries), default=0)
    return CoefficientTable(
        N=N,
        ell=ell,
        d=d,
        entries=entries,
        restrict_nonzero=restrict_nonzero,
        degree_bound=bound,
        expectation_term=float(f.expectation) * distinct_tuple_count(N, ell) / N**ell,
    )


# ---------------------------------------------------------------------------
# Monte Carlo over alpha
# ---------------------------------------------------------------------------


class MeanEstimate(NamedTuple):
    mean: float
    stderr: float
    values: List[float]


class VarianceEstimate(NamedTuple):
    second_moment: float
    mean_squared: float
    excess: float
    values: List[float]


def trial_seeds(seed: int, trials: int) -> List[int]:
    ss = np.random.SeedSequence(seed)
    return [int(s) for s in ss.generate_state(trials, dtype=np.uint64)]


def _trial(args):
    s, d, ell, f, N = args
    seq = generate(sample_alpha(s, d, N), d, N)
    return r_ell(seq, ell, f).value


def sample_correlations(
    d: int, ell: int, f: TestFunction, N: int, trials: int, seed: int, workers: int = 1
) -> List[float]:
    """R_ell^N for ``trials`` random alphas, in seed order."""
    if trials < 1:
        raise ValueError("trials must be positive")
    jobs = [(s, d, ell, f, N) for s in trial_seeds(seed, trials)]
    return pmap(_trial, jobs, workers)


def summarize_mean(values) -> MeanEstimate:
    values = [float(v) for v in values]
    k = len(values)
    mean = math.fsum(values) / k
    var = math.fsum((v - mean) ** 2 for v in values) / (k - 1) if k > 1 else 0.0
    return MeanEstimate(mean, math.sqrt(var / k), values)


def summarize_variance(values) -> VarianceEstimate:
    values = [float(v) for v in values]
    k = len(values)
    mean = math.fsum(values) / k
    excess = math.fsum((v - mean) ** 2 for v in values) / k
    return VarianceEstimate(excess + mean * mean, mean * mean, excess, values)


def expectation_mc(
    d: int, ell: int, f: TestFunction, N: int, trials: int, seed: int, workers: int = 1
) -> MeanEstimate:
    """Sample mean and standard error of R_ell^N over random alpha."""
    if trials < 30:
        raise ValueError("expectation_mc needs at least 30 trials")
    return summarize_mean(sample_correlations(d, ell, f, N, trials, seed, workers))


def variance_mc(
    d: int, ell: int, f: TestFunction, N: int, trials: int, seed: int, workers: int = 1
) -> VarianceEstimate:
    """Second moment, squared mean and their difference for R_ell^N over alpha."""
    if trials < 30:
        raise ValueError("variance_mc needs at least 30 trials")
    return summarize_variance(sample_correlations(d, ell, f, N, trials, seed, workers))
