"""Exact point counts on diagonal hypersurfaces a_0 x_0^d + ... + a_n x_n^d = 0.

Points are primitive integer vectors with the first nonzero coordinate
positive, so each rational point of the projective hypersurface is counted
once. All sums are exact Python integers.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import Dict, List, Optional, Tuple

import mpmath
import numpy as np

from . import exponents
from ._parallel import pmap, split
from .errors import ResourceError

MAX_MATCHING_VERTICES = 14
DEFAULT_WORK_BUDGET = 20_000_000


def iroot(z: int, d: int) -> int:
    """floor(z ** (1/d)) for z >= 0, by integer Newton iteration."""
    if z < 0:
        raise ValueError("iroot needs z >= 0")
    if z < 2:
        return z
    x = 1 << -(-z.bit_length() // d)  # 2^ceil(bits/d) >= true root
    while True:
        y = ((d - 1) * x + z // x ** (d - 1)) // d
        if y >= x:
            return x
        x = y


def is_dth_power(z: int, d: int) -> bool:
    """True iff z = t^d for some integer t (negative z only for odd d)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if z < 0:
        if d % 2 == 0:
            return False
        z = -z
    r = iroot(z, d)
    return r**d == z


def dth_roots(z: int, d: int) -> List[int]:
    """All integers t with t^d == z."""
    if z == 0:
        return [0]
    if not is_dth_power(z, d):
        return []
    r = iroot(abs(z), d)
    if d % 2 == 0:
        return [r, -r]
    return [r if z > 0 else -r]


@dataclass(frozen=True)
class DiagonalForm:
    a: Tuple[int, ...]
    d: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        if len(self.a) < 2:
            raise ValueError("a diagonal form needs at least two coefficients (n >= 1)")
        if any(x == 0 for x in self.a):
            raise ValueError("coefficients must be nonzero")
        if self.d < 2:
            raise ValueError(f"degree must be >= 2, got {self.d}")

    @property
    def n(self) -> int:
        return len(self.a) - 1

    def __call__(self, x) -> int:
        return sum(ai * xi**self.d for ai, xi in zip(self.a, x))

    def scaled(self, c: int) -> "DiagonalForm":
        return DiagonalForm(tuple(c * x for x in self.a), self.d)


@dataclass(frozen=True, order=True)
class ProjectivePoint:
    coords: Tuple[int, ...]

    def __post_init__(self):
        c = self.coords
        if not any(c):
            raise ValueError("the zero vector is not a projective point")
        if math.gcd(*c) != 1:
            raise ValueError(f"{c} is not primitive")
        if next(x for x in c if x) < 0:
            raise ValueError(f"{c} does not have canonical sign")

    @property
    def height(self) -> int:
        return max(abs(x) for x in self.coords)


def _canonical(x) -> bool:
    """Nonzero, primitive, first nonzero coordinate positive."""
    first = next((v for v in x if v), 0)
    return first > 0 and math.gcd(*x) == 1


# ---------------------------------------------------------------------------
# m(a): maximum matching on the d-th power pair graph
# ---------------------------------------------------------------------------


def power_pair_graph(a, d) -> List[Tuple[int, int]]:
    """Edges (i, j), i < j, with -a_i a_j a perfect d-th power."""
    return [
        (i, j)
        for i, j in combinations(range(len(a)), 2)
        if is_dth_power(-a[i] * a[j], d)
    ]


def max_matching_size(n_vertices: int, edges) -> int:
    """Exhaustive maximum matching: branch on the lowest free vertex."""
    if n_vertices > MAX_MATCHING_VERTICES:
        raise ValueError(
            f"exhaustive matching is limited to {MAX_MATCHING_VERTICES} vertices, "
            f"got {n_vertices}"
        )
    nbrs = [0] * n_vertices
    for i, j in edges:
        nbrs[i] |= 1 << j
        nbrs[j] |= 1 << i

    @lru_cache(maxsize=None)
    def best(free: int) -> int:
        if not free:
            return 0
        i = (free & -free).bit_length() - 1
        rest = free & ~(1 << i)
        out = best(rest)  # leave i unmatched
        cand = nbrs[i] & rest
        while cand:
            j_bit = cand & -cand
            out = max(out, 1 + best(rest & ~j_bit))
            cand ^= j_bit
        return out

    return best((1 << n_vertices) - 1)


def m_of(form: DiagonalForm) -> int:
    """Largest number of disjoint index pairs with -a_i a_j a d-th power."""
    return max_matching_size(len(form.a), power_pair_graph(form.a, form.d))


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def _coordinate_groups(coef, d, B):
    """term value -> coordinates producing it; for even d, +x and -x share a term."""
    groups = defaultdict(list)
    if d % 2 == 0:
        for x in range(B + 1):
            groups[coef * x**d].extend([x] if x == 0 else [x, -x])
    else:
        for x in range(-B, B + 1):
            groups[coef * x**d].append(x)
    return list(groups.items())


def _half_sums(coefs, d, B):
    """partial sum -> list of per-coordinate coordinate lists."""
    out = defaultdict(list)
    for combo in product(*(_coordinate_groups(c, d, B) for c in coefs)):
        out[sum(t for t, _ in combo)].append(tuple(xs for _, xs in combo))
    return out


def _join_job(args):
    left_keys, left_map, right_map = args
    found = []
    for key in left_keys:
        rights = right_map.get(-key)
        if not rights:
            continue
        for lgroup in left_map[key]:
            for rgroup in rights:
                for x in product(*lgroup, *rgroup):
                    if _canonical(x):
                        found.append(x)
    return found


def mitm_cost(n_coords: int, B: int) -> int:
    h = -(-n_coords // 2)
    return (2 * B + 1) ** h + (2 * B + 1) ** (n_coords - h)


def enumerate_points(
    form: DiagonalForm, B: int, budget: int = DEFAULT_WORK_BUDGET, workers: int = 1
) -> List[ProjectivePoint]:
    """All points of height <= B, by meet-in-the-middle on exact partial sums.

    Coordinates are split ceil((n+1)/2) / floor((n+1)/2). Each half is tabulated
    as partial sum -> assignments; a full solution is a pair of assignments whose
    sums cancel. Only primitive, sign-canonical vectors are kept.
    """
    if B < 1:
        raise ValueError("height bound B must be >= 1")
    k = len(form.a)
    cost = mitm_cost(k, B)
    if cost > budget:
        raise ResourceError(
            f"meet-in-the-middle at B={B}, n={form.n} needs about {cost} half-assignments "
            f"(budget {budget})",
            estimated_cost=cost,
            budget=budget,
        )
    h = -(-k // 2)
    left = _half_sums(form.a[:h], form.d, B)
    right = _half_sums(form.a[h:], form.d, B)
    keys = sorted(left)
    jobs = [(keys[s:t], {kk: left[kk] for kk in keys[s:t]}, right) for s, t in split(len(keys), workers)]
    found = [x for part in pmap(_join_job, jobs, workers) for x in part]
    return [ProjectivePoint(x) for x in sorted(set(found))]


def naive_cost(n_coords: int, B: int) -> int:
    return (2 * B + 1) ** n_coords


def enumerate_points_naive(
    form: DiagonalForm, B: int, budget: int = DEFAULT_WORK_BUDGET
) -> List[ProjectivePoint]:
    """Every vector of [-B, B]^{n+1} evaluated directly."""
    if B < 1:
        raise ValueError("height bound B must be >= 1")
    k = len(form.a)
    cost = naive_cost(k, B)
    if cost > budget:
        raise ResourceError(
            f"naive enumeration at B={B}, n={form.n} needs {cost} vectors (budget {budget})",
            estimated_cost=cost,
            budget=budget,
        )
    xs = np.arange(-B, B + 1)
    bound = sum(abs(c) for c in form.a) * B**form.d
    if bound < 2**62:
        total = np.zeros((1,) * k, dtype=np.int64)
        for i, c in enumerate(form.a):
            shape = [1] * k
            shape[i] = -1
            total = total + (c * xs.astype(np.int64) ** form.d).reshape(shape)
        hits = np.argwhere(total == 0) - B
        cands = (tuple(int(v) for v in row) for row in hits)
    else:
        cands = (x for x in product(range(-B, B + 1), repeat=k) if form(x) == 0)
    return [ProjectivePoint(x) for x in sorted(x for x in cands if _canonical(x))]


# ---------------------------------------------------------------------------
# stratification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Stratum:
    in_W: bool
    zero_pair_only: bool
    partition: Tuple[Tuple[int, ...], ...]
    binary_pairs: int
    singletons: int
    has_vanishing_subsum: bool


def _terms(form, coords):
    return [a * x**form.d for a, x in zip(form.a, coords)]


def minimal_partition(terms) -> Tuple[Tuple[int, ...], ...]:
    """Greedy split into vanishing parts, smallest size first, then lexicographic.

    Each extracted part has no proper vanishing subset, since every smaller
    candidate was tried before it.
    """
    remaining = list(range(len(terms)))
    parts = []
    while remaining:
        chosen = None
        for size in range(1, len(remaining)):
            for sub in combinations(remaining, size):
                if sum(terms[i] for i in sub) == 0:
                    chosen = sub
                    break
            if chosen:
                break
        if chosen is None:
            parts.append(tuple(remaining))
            break
        parts.append(chosen)
        remaining = [i for i in remaining if i not in chosen]
    return tuple(parts)


def classify_point(form: DiagonalForm, p) -> Stratum:
    coords = p.coords if isinstance(p, ProjectivePoint) else tuple(p)
    terms = _terms(form, coords)
    if sum(terms) != 0:
        raise ValueError(f"{coords} is not on the hypersurface")
    k = len(terms)
    pairs = [(i, j) for i, j in combinations(range(k), 2) if terms[i] + terms[j] == 0]
    in_W = bool(pairs)
    zero_pair_only = in_W and all(coords[i] == 0 and coords[j] == 0 for i, j in pairs)
    # a proper vanishing subsum exists exactly when the minimal partition splits;
    # a zero coordinate is a vanishing subsum of size one
    partition = minimal_partition(terms)
    vanishing = len(partition) > 1
    return Stratum(
        in_W=in_W,
        zero_pair_only=zero_pair_only,
        partition=partition,
        binary_pairs=sum(1 for part in partition if len(part) == 2),
        singletons=sum(1 for part in partition if len(part) == 1),
        has_vanishing_subsum=vanishing,
    )


@dataclass
class StratifiedCount:
    B: int
    total: int
    in_W: int
    in_W_zero_pair_only: int
    no_vanishing_subsum: int
    by_binary_pairs: Dict[int, int]
    other_subsum: int
    m: int
    exponents: Dict[str, Optional[str]] = field(default_factory=dict)
    log_B: Dict[str, Optional[float]] = field(default_factory=dict)
    points: List[ProjectivePoint] = field(default_factory=list, repr=False)

    def strata_sum(self) -> int:
        return self.no_vanishing_subsum + sum(self.by_binary_pairs.values()) + self.other_subsum

    def to_dict(self):
        return {
            "B": self.B,
            "total": self.total,
            "m": self.m,
            "strata": {
                "in_W": self.in_W,
                "in_W_zero_pair_only": self.in_W_zero_pair_only,
                "no_vanishing_subsum": self.no_vanishing_subsum,
                "by_binary_pairs": {str(s): c for s, c in sorted(self.by_binary_pairs.items())},
                "other_subsum": self.other_subsum,
            },
            "exponents": dict(self.exponents),
            "log_B": dict(self.log_B),
        }


def _log_B(count, B):
    if count <= 0 or B <= 1:
        return None
    return math.log(count) / math.log(B)


def count_report(
    form: DiagonalForm,
    B: int,
    naive: bool = False,
    budget: int = DEFAULT_WORK_BUDGET,
    workers: int = 1,
) -> StratifiedCount:
    """Enumerate, classify and aggregate; attach m(a) and the reference exponents."""
    if naive:
        pts = enumerate_points_naive(form, B, budget)
    else:
        pts = enumerate_points(form, B, budget, workers)
    by_pairs: Dict[int, int] = defaultdict(int)
    in_W = zero_only = free = other = 0
    for p in pts:
        st = classify_point(form, p)
        in_W += st.in_W
        zero_only += st.zero_pair_only
        if not st.has_vanishing_subsum:
            free += 1
        elif st.binary_pairs:
            by_pairs[st.binary_pairs] += 1
        else:
            other += 1
    m = m_of(form)
    n, d = form.n, form.d
    expo: Dict[str, Optional[str]] = {"phi": None, "subsum_free_exponent": None}
    if n >= 2 and d > n:
        phi, _ = exponents.phi_of(m, d, n)
        expo["phi"] = mpmath.nstr(phi, 20)
        expo["subsum_free_exponent"] = mpmath.nstr(
            exponents.subsum_free_exponent(d, n), 20
        )
    by_pairs = dict(sorted(by_pairs.items()))
    log_b = {
        "total": _log_B(len(pts), B),
        "no_vanishing_subsum": _log_B(free, B),
        "other_subsum": _log_B(other, B),
    }
    for s, c in by_pairs.items():
        log_b[f"binary_pairs_{s}"] = _log_B(c, B)
    return StratifiedCount(
        B=B,
        total=len(pts),
        in_W=in_W,
        in_W_zero_pair_only=zero_only,
        no_vanishing_subsum=free,
        by_binary_pairs=by_pairs,
        other_subsum=other,
        m=m,
        exponents=expo,
        log_B=log_b,
        points=pts,
    )


# ---------------------------------------------------------------------------
# binary equation a x^d = b y^d
# ---------------------------------------------------------------------------


def two_var_count(a: int, b: int, d: int, B: int):
    """#{|x|, |y| <= B : a x^d = b y^d} by the coprime factorisation argument.

    After dividing out gcd(a, b), a nonzero solution splits as x = x1 x2,
    y = y1 y2 with x1^d = t b, y1^d = t a for a sign t, and x2^d = y2^d.
    Returns ``(count, count <= 8B + 1)``.
    """
    if a == 0 or b == 0:
        raise ValueError("a and b must be nonzero")
    if d < 2 or B < 1:
        raise ValueError("need d >= 2 and B >= 1")
    g = math.gcd(a, b)
    a1, b1 = a // g, b // g
    sols = set()
    for t in (1, -1):
        for x1 in dth_roots(t * b1, d):
            for y1 in dth_roots(t * a1, d):
                for x2 in range(-(B // abs(x1)), B // abs(x1) + 1):
                    if x2 == 0:
                        continue
                    for y2 in {x2, -x2} if d % 2 == 0 else {x2}:
                        x, y = x1 * x2, y1 * y2
                        if abs(y) <= B:
                            sols.add((x, y))
    count = 1 + len(sols)  # (0, 0)
    return count, count <= 8 * B + 1


def two_var_count_bruteforce(a: int, b: int, d: int, B: int) -> int:
    lhs = [a * x**d for x in range(-B, B + 1)]
    rhs = [b * y**d for y in range(-B, B + 1)]
    return sum(1 for u in lhs for v in rhs if u == v)
