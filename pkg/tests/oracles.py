"""Slow, literal reference implementations used only by the tests."""

from fractions import Fraction
from itertools import permutations, product


def brute_force_indicator(seq, ell, f):
    """Weighted count over all distinct ordered tuples and all k in [-2, 2]^(ell-1)."""
    xs = seq.as_fractions()
    N = seq.N
    count = 0
    for tup in permutations(range(N), ell):
        weight = 1
        for i, fac in enumerate(f.factors):
            diff = xs[tup[i]] - xs[tup[i + 1]]
            weight *= sum(1 for k in range(-2, 3) if fac.lo <= N * (diff + k) <= fac.hi)
            if not weight:
                break
        count += weight
    return count


def points_by_full_scan(a, d, B):
    """Projective points of height <= B as canonical primitive tuples, no symmetry tricks."""
    from math import gcd

    out = set()
    for x in product(range(-B, B + 1), repeat=len(a)):
        if not any(x):
            continue
        if sum(c * v**d for c, v in zip(a, x)) != 0:
            continue
        g = 0
        for v in x:
            g = gcd(g, v)
        if g != 1:
            continue
        first = next(v for v in x if v)
        if first < 0:
            continue
        out.add(x)
    return out


def matching_by_recursion(n, edges):
    """Maximum matching size by trying each edge for the lowest free vertex."""
    adj = {i: set() for i in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)

    def best(free):
        if not free:
            return 0
        v = min(free)
        rest = free - {v}
        top = best(rest)
        for w in adj[v] & rest:
            top = max(top, 1 + best(rest - {w}))
        return top

    return best(frozenset(range(n)))


def exact_fraction_gap_cdf(values, s):
    """P_N(s) from Fraction values with circular gaps."""
    xs = sorted(Fraction(v) % 1 for v in values)
    N = len(xs)
    gaps = [xs[i + 1] - xs[i] for i in range(N - 1)] + [xs[0] + 1 - xs[-1]]
    return sum(1 for g in gaps if g < Fraction(s) / N) / N
