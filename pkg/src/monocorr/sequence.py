"""Fixed-point generation of x(n) = alpha * n^d mod 1.

Every value is stored as an integer numerator over ``2**precision``. For
rational (and dyadic random) alpha the reduction mod 1 is exact; for square
roots it goes through an exact integer square root, so no floating point is
involved anywhere before the final rounding.
"""

import math
import random
import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ._parallel import pmap, split
from .errors import PrecisionDeficitError

DEFAULT_PRECISION = 64
GUARD_BITS = 64
WORK_GUARD_BITS = 96


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


def required_bits(d: int, N: int) -> int:
    """Bits alpha must carry so that alpha * N^d keeps 64 fractional bits."""
    return d * ceil_log2(N) + GUARD_BITS


def required_decimal_digits(d: int, N: int) -> int:
    return math.ceil(required_bits(d, N) * math.log10(2))


@dataclass(frozen=True)
class AlphaSpec:
    """The dilation alpha.

    ``kind`` is one of ``"rational"``, ``"sqrt"``, ``"decimal"``, ``"random"``.
    Rational, decimal and random alphas are held as an exact ``Fraction`` in
    ``value``; a square root keeps its radicand in ``value``.
    """

    kind: str
    value: Fraction
    text: str = ""
    seed: Optional[int] = None
    bits: Optional[int] = None

    def __str__(self):
        if self.kind == "rational":
            return f"rat:{self.value.numerator}/{self.value.denominator}"
        if self.kind == "sqrt":
            return f"sqrt:{self.value.numerator}/{self.value.denominator}"
        if self.kind == "decimal":
            return f"dec:{self.text}"
        return f"rand:{self.seed}"


def alpha_rational(p: int, q: int = 1) -> AlphaSpec:
    if q == 0:
        raise ValueError("denominator must be nonzero")
    return AlphaSpec("rational", Fraction(p, q))


def _rational_sqrt(x: Fraction):
    a, b = x.numerator, x.denominator
    ra, rb = math.isqrt(a), math.isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None


def alpha_sqrt(p: int, q: int = 1) -> AlphaSpec:
    """sqrt(p/q); collapses to the rational kind when p/q is a rational square."""
    rad = Fraction(p, q)
    if rad <= 0:
        raise ValueError("radicand must be positive")
    root = _rational_sqrt(rad)
    if root is not None:
        return AlphaSpec("rational", root)
    return AlphaSpec("sqrt", rad)


_DECIMAL_RE = re.compile(r"^[+-]?\d*(\.\d*)?$")


def alpha_decimal(text: str) -> AlphaSpec:
    text = text.strip()
    if not text or not _DECIMAL_RE.match(text) or text in {".", "+", "-"}:
        raise ValueError(f"not a decimal number: {text!r}")
    return AlphaSpec("decimal", Fraction(Decimal(text)), text=text)


def sample_alpha(seed: int, d: int, N: int) -> AlphaSpec:
    """Uniform dyadic rational in [0, 1) with ``d*ceil(log2 N) + 64`` bits."""
    bits = required_bits(d, N)
    k = random.Random(seed).getrandbits(bits)
    return AlphaSpec("random", Fraction(k, 1 << bits), seed=seed, bits=bits)


def parse_alpha(spec: str, d: int, N: int) -> AlphaSpec:
    """Parse ``rat:p/q``, ``sqrt:p/q``, ``dec:0.123...`` or ``rand:SEED``."""
    kind, sep, payload = spec.partition(":")
    if not sep:
        raise ValueError(f"alpha spec needs a kind prefix: {spec!r}")
    if kind in ("rat", "sqrt"):
        num, _, den = payload.partition("/")
        try:
            p, q = int(num), int(den or 1)
        except ValueError:
            raise ValueError(f"bad fraction in alpha spec: {spec!r}") from None
        return alpha_rational(p, q) if kind == "rat" else alpha_sqrt(p, q)
    if kind == "dec":
        return alpha_decimal(payload)
    if kind == "rand":
        try:
            return sample_alpha(int(payload), d, N)
        except ValueError:
            raise ValueError(f"bad seed in alpha spec: {spec!r}") from None
    raise ValueError(f"unknown alpha kind {kind!r}")


def _round_shift(x: int, shift: int) -> int:
    """Round x / 2**shift to nearest, ties to even."""
    if shift <= 0:
        return x << -shift
    q, r = divmod(x, 1 << shift)
    half = 1 << (shift - 1)
    if r > half or (r == half and q & 1):
        q += 1
    return q


def _round_fraction(x: Fraction, precision: int) -> int:
    """Nearest numerator over 2**precision to x, ties to even."""
    num = x.numerator << precision
    q, r = divmod(num, x.denominator)
    twice = 2 * r
    if twice > x.denominator or (twice == x.denominator and q & 1):
        q += 1
    return q


def frac_fixed(alpha: AlphaSpec, k: int, precision: int) -> int:
    """Numerator of frac(alpha * k) over 2**precision, reduced mod 2**precision."""
    mask = (1 << precision) - 1
    if alpha.kind == "sqrt":
        rad = alpha.value
        sign = -1 if k < 0 else 1
        work = precision + WORK_GUARD_BITS
        # floor(sqrt(X / q)) == isqrt(X // q) for nonnegative integers X, q
        scaled = (rad.numerator * k * k) << (2 * work)
        floor_w = math.isqrt(scaled // rad.denominator)
        if sign < 0:
            # -y has fractional numerator 2**work - frac(y); floor rounds the other way
            floor_w = -floor_w - 1
        return _round_shift(floor_w, work - precision) & mask
    frac = (alpha.value * k) % 1
    return _round_fraction(frac, precision) & mask


def _check_alpha_precision(alpha: AlphaSpec, d: int, N: int):
    need = required_bits(d, N)
    if alpha.kind == "decimal":
        digits = len(alpha.text.partition(".")[2])
        need_digits = required_decimal_digits(d, N)
        if digits < need_digits:
            raise PrecisionDeficitError(
                f"decimal alpha has {digits} fractional digits; d={d}, N={N} "
                f"requires at least {need_digits}",
                required_digits=need_digits,
            )
    elif alpha.kind == "random" and alpha.bits is not None and alpha.bits < need:
        raise PrecisionDeficitError(
            f"random alpha carries {alpha.bits} bits; d={d}, N={N} requires {need}",
            required_digits=need,
        )


@dataclass
class Mod1Sequence:
    """A finite orbit, values as numerators over ``2**precision``."""

    numerators: Sequence[int]
    precision: int = DEFAULT_PRECISION
    alpha: Optional[AlphaSpec] = None
    d: Optional[int] = None
    _floats: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def N(self) -> int:
        return len(self.numerators)

    @property
    def scale(self) -> int:
        return 1 << self.precision

    def as_float(self) -> np.ndarray:
        if self._floats is None:
            self._floats = np.array(
                [v / self.scale for v in self.numerators], dtype=np.float64
            )
        return self._floats

    def as_fractions(self):
        return [Fraction(v, self.scale) for v in self.numerators]

    def decimal_strings(self, digits: int = 25):
        with localcontext() as ctx:
            ctx.prec = digits
            scale = Decimal(self.scale)
            return [str(Decimal(v) / scale) for v in self.numerators]

    def permuted(self, order):
        return Mod1Sequence([self.numerators[i] for i in order], self.precision)

    @classmethod
    def from_values(cls, values, precision: int = DEFAULT_PRECISION):
        """Inject arbitrary values (floats, Fractions, ints); each is reduced mod 1."""
        mask = (1 << precision) - 1
        nums = []
        for v in values:
            frac = Fraction(v) % 1
            nums.append(_round_fraction(frac, precision) & mask)
        return cls(nums, precision)


def _generate_block(args):
    alpha, d, start, stop, precision = args
    return [frac_fixed(alpha, n**d, precision) for n in range(start + 1, stop + 1)]


def generate(
    alpha: AlphaSpec, d: int, N: int, precision: int = DEFAULT_PRECISION, workers: int = 1
) -> Mod1Sequence:
    """x(n) = alpha * n^d mod 1 for n = 1..N, rounded to nearest at ``precision`` bits."""
    if d < 2:
        raise ValueError(f"degree must be >= 2, got {d}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if precision < 64:
        raise ValueError("certified precision must be at least 64 bits")
    _check_alpha_precision(alpha, d, N)
    blocks = split(N, workers)
    parts = pmap(
        _generate_block, [(alpha, d, a, b, precision) for a, b in blocks], workers
    )
    nums = [v for part in parts for v in part]
    return Mod1Sequence(nums, precision, alpha=alpha, d=d)


def uniform_points(N: int, seed: int, precision: int = DEFAULT_PRECISION) -> Mod1Sequence:
    """N i.i.d. uniform points on the circle (the Poisson baseline)."""
    rng = random.Random(seed)
    return Mod1Sequence([rng.getrandbits(precision) for _ in range(N)], precision)


def lattice(N: int, precision: int = DEFAULT_PRECISION) -> Mod1Sequence:
    """The points n/N, n = 1..N."""
    return Mod1Sequence.from_values([Fraction(n, N) for n in range(1, N + 1)], precision)
