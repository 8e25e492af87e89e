"""Exponent calculus for diagonal hypersurface counts and the correlation threshold.

All real-valued quantities are evaluated in mpmath interval arithmetic, so the
numbers reported are rigorous upper bounds rather than rounded floats.
"""

from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import iv

from .errors import IndeterminateError

MAX_PRECISION = 1 << 14


@contextmanager
def _ivprec(prec):
    # the interval context has no workprec(); mpmath contexts are process-global
    saved = iv.prec
    iv.prec = prec
    try:
        yield
    finally:
        iv.prec = saved


def l_of(d: int, n: int) -> Fraction:
    """Lower bound on degrees of curves avoiding quasi-diagonal subvarieties.

    Returns ``1 + 2(d - n + 1) / (n^2 - n)`` as an exact rational.
    """
    if n < 2:
        raise ValueError(f"l_of needs n >= 2 (n^2 - n vanishes at n={n})")
    if d < 2:
        raise ValueError(f"degree must be >= 2, got {d}")
    return 1 + Fraction(2 * (d - n + 1), n * n - n)


def d_ell(ell: int) -> int:
    """(2*ell)^(4*ell) as an exact integer."""
    if ell < 2:
        raise ValueError(f"ell must be >= 2, got {ell}")
    return (2 * ell) ** (4 * ell)


@lru_cache(maxsize=8192)
def _root_terms(d, n, prec):
    # (r+1) * L^(-1/r) for r = 1..n-1; the r=1 root of L is L itself.
    L = l_of(d, n)
    with _ivprec(prec):
        Liv = iv.mpf(L.numerator) / iv.mpf(L.denominator)
        logL = iv.log(Liv)
        terms = []
        for r in range(1, n):
            if r == 1:
                terms.append(2 / Liv)
            else:
                terms.append((r + 1) * iv.exp(-logL / r))
    return tuple(terms)


def _candidate_intervals(m, d, n, prec):
    terms = _root_terms(d, n, prec)
    out = []
    with _ivprec(prec):
        for s in range(m + 1):
            total = iv.mpf(s)
            for t in terms[: max(0, n - 2 * s - 1)]:
                total = total + t
            out.append(total)
    return out


def _check_phi_args(m, d, n):
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if d <= n:
        raise ValueError(f"need d > n, got d={d}, n={n}")
    if m < 0 or 2 * m > n + 1:
        raise ValueError(f"need 0 <= m <= (n+1)/2, got m={m}, n={n}")


def _upper(x):
    with mpmath.workprec(iv.prec):
        return mpmath.mpf(x.b)


def _lower(x):
    with mpmath.workprec(iv.prec):
        return mpmath.mpf(x.a)


def phi_interval(m: int, d: int, n: int, precision: int = 128):
    """Enclosure of the counting exponent together with its argmax.

    Returns ``(interval, argmax_s)``. Ties in the max over ``s`` go to the
    smallest ``s`` whose enclosure cannot be separated from the maximum.
    """
    _check_phi_args(m, d, n)
    prec = max(precision, 53) + 16
    with _ivprec(prec):
        cands = _candidate_intervals(m, d, n, prec)
        best_lower = max(_lower(c) for c in cands)
        argmax = min(s for s, c in enumerate(cands) if _upper(c) >= best_lower)
        hi = max(_upper(c) for c in cands)
        lo = best_lower
        return iv.mpf([lo, hi]), argmax


def phi_of(m: int, d: int, n: int, precision: int = 128):
    """Upper bound for max over s in [0, m] of s + sum_{r=1}^{n-2s-1} (r+1) L^(-1/r).

    The result is an ``mpmath.mpf`` that exceeds the true value by at most
    ``2**(-precision/2)``; the second element is the argmax ``s``.
    """
    prec = precision
    tol = mpmath.mpf(2) ** (-(precision // 2))
    while True:
        enc, s = phi_interval(m, d, n, prec)
        with _ivprec(max(prec, 53) + 16):
            hi, lo = _upper(enc), _lower(enc)
        if hi - lo <= tol or prec >= MAX_PRECISION:
            return hi, s
        prec *= 2


def subsum_free_exponent(d: int, n: int, precision: int = 128):
    """Exponent sum_{r=1}^{n-1} (r+1) L^(-1/r) for points with no vanishing subsum."""
    if n < 2 or d <= n:
        raise ValueError(f"need d > n >= 2, got d={d}, n={n}")
    value, _ = phi_of(0, d, n, precision)
    return value


def poissonian_threshold(d: int, ell: int) -> bool:
    """Decide phi(0, d, ell) < 1 rigorously, widening precision as needed."""
    if not (d > ell >= 2):
        raise ValueError(f"need d > ell >= 2, got d={d}, ell={ell}")
    prec = 64
    while prec <= MAX_PRECISION:
        enc, _ = phi_interval(0, d, ell, prec)
        with _ivprec(prec + 16):
            hi, lo = _upper(enc), _lower(enc)
        if hi < 1:
            return True
        if lo >= 1:
            return False
        prec *= 2
    raise IndeterminateError(
        f"phi(0, {d}, {ell}) cannot be separated from 1 at {MAX_PRECISION} bits"
    )


@dataclass(frozen=True)
class ExponentReport:
    d: int
    n: int
    m: int
    L: Fraction
    phi: mpmath.mpf
    argmax_s: int

    def to_dict(self, digits=30):
        return {
            "d": self.d,
            "n": self.n,
            "m": self.m,
            "L": f"{self.L.numerator}/{self.L.denominator}",
            "phi": mpmath.nstr(self.phi, digits, strip_zeros=False),
            "argmax_s": self.argmax_s,
        }


def exponent_report(d: int, n: int, m: int, precision: int = 128) -> ExponentReport:
    phi, s = phi_of(m, d, n, precision)
    return ExponentReport(d=d, n=n, m=m, L=l_of(d, n), phi=phi, argmax_s=s)
