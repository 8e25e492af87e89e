import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_force_indicator

from monocorr.correlation import (
    IndicatorInterval,
    fejer,
    indicator_box,
    parse_support,
    poisson_reference,
    r_ell,
    r_ell_naive,
    r_ell_windowed,
)
from monocorr.sequence import Mod1Sequence, generate, lattice, sample_alpha, uniform_points


def test_lattice_examples():
    seq = lattice(10)
    half = indicator_box([(Fraction(-1, 2), Fraction(1, 2))])
    assert r_ell_naive(seq, 2, half).value == 0
    wide = indicator_box([(Fraction(-3, 2), Fraction(3, 2))])
    for algo in (r_ell_naive, r_ell_windowed):
        res = algo(seq, 2, wide)
        assert res.value == 2.0 and res.tuple_count == 20
    assert brute_force_indicator(seq, 2, wide) == 20


def test_lattice_three_point_matches_naive():
    seq = lattice(30)
    box = indicator_box([(Fraction(-3, 2), Fraction(3, 2))] * 2)
    a = r_ell_naive(seq, 3, box)
    b = r_ell_windowed(seq, 3, box)
    assert a.tuple_count == b.tuple_count == brute_force_indicator(seq, 3, box)


def test_two_points_in_range_support():
    # circle differences +-0.45, scaled by N=2 to +-0.9
    seq = Mod1Sequence.from_values([Fraction(1, 10), Fraction(11, 20)])
    f = indicator_box([(Fraction(-19, 20), Fraction(19, 20))])
    assert r_ell_naive(seq, 2, f).value == 1.0
    assert r_ell_windowed(seq, 2, f).value == 1.0


def test_support_reaching_half_circle_is_refused():
    seq = Mod1Sequence.from_values([Fraction(1, 10), Fraction(6, 10)])
    f = indicator_box([(Fraction(-11, 10), Fraction(11, 10))])
    for algo in (r_ell_naive, r_ell_windowed):
        with pytest.raises(ValueError, match="inside"):
            algo(seq, 2, f)
    # the boundary itself is also refused: +-N/2 would be hit from both sides
    with pytest.raises(ValueError):
        r_ell_naive(lattice(4), 2, indicator_box([(-1, 2)]))


def test_degenerate_interval_rejected():
    with pytest.raises(ValueError):
        IndicatorInterval(0, 0)


def test_argument_checks():
    seq = lattice(5)
    f = indicator_box([(-1, 1)])
    with pytest.raises(ValueError):
        r_ell_naive(seq, 7, indicator_box([(-1, 1)] * 6))
    with pytest.raises(ValueError):
        r_ell_naive(seq, 3, f)  # arity mismatch
    with pytest.raises(ValueError):
        r_ell_naive(lattice(2), 3, indicator_box([(-Fraction(1, 2), Fraction(1, 2))] * 2))
    with pytest.raises(ValueError):
        r_ell_windowed(seq, 2, fejer(1, 1))


def test_poisson_reference():
    assert poisson_reference(indicator_box([(Fraction(-1, 2), Fraction(1, 2))])) == 1
    assert poisson_reference(indicator_box([(Fraction(-3, 2), Fraction(3, 2))])) == 3
    assert poisson_reference(fejer(Fraction(3, 2), 3)) == 1


def test_parse_support():
    f = parse_support("-1/2,1/2; -1.5,2")
    assert f.arity == 2
    assert f.expectation == Fraction(7, 2)
    with pytest.raises(ValueError):
        parse_support("1,2,3")


def _random_box(rng, ell, N):
    half = N / 2
    out = []
    for _ in range(ell - 1):
        width = rng.uniform(0.2, min(4.0, N / 2))
        lo = rng.uniform(-half + 0.01, half - 0.01 - width)
        out.append((Fraction(lo).limit_denominator(1000), Fraction(lo + width).limit_denominator(1000)))
    return indicator_box(out)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(6, 14))
def test_windowed_matches_brute_force_small(seed, ell, N):
    rng = random.Random(seed)
    d = rng.choice([2, 3, 5])
    seq = generate(sample_alpha(seed, d, N), d, N)
    f = _random_box(rng, ell, N)
    want = brute_force_indicator(seq, ell, f)
    assert r_ell_windowed(seq, ell, f).tuple_count == want
    assert r_ell_naive(seq, ell, f).tuple_count == want


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_permutation_invariance(seed, ell):
    rng = random.Random(seed)
    N = rng.randint(20, 120)
    seq = generate(sample_alpha(seed, 3, N), 3, N)
    f = _random_box(rng, ell, N)
    order = list(range(N))
    rng.shuffle(order)
    shuffled = seq.permuted(order)
    assert r_ell_windowed(seq, ell, f).tuple_count == r_ell_windowed(shuffled, ell, f).tuple_count
    assert r_ell_naive(seq, ell, f).tuple_count == r_ell_naive(shuffled, ell, f).tuple_count


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_monotone_in_support(seed):
    rng = random.Random(seed)
    N = 80
    seq = generate(sample_alpha(seed, 2, N), 2, N)
    lo = Fraction(rng.randint(-30, 0), 10)
    hi = Fraction(rng.randint(1, 30), 10)
    grow = Fraction(rng.randint(0, 50), 10)
    small = r_ell_windowed(seq, 3, indicator_box([(lo, hi), (-1, 1)])).value
    big = r_ell_windowed(seq, 3, indicator_box([(lo - grow, hi), (-1, 1 + grow)])).value
    assert big >= small


def test_distinct_indices_with_colliding_values():
    # rational alpha repeats values; tuples must still use distinct n
    seq = generate(sample_alpha(0, 2, 3), 2, 3)
    coll = Mod1Sequence(list(seq.numerators) + list(seq.numerators), seq.precision)
    f = indicator_box([(Fraction(-1, 10), Fraction(1, 10))])
    res = r_ell_windowed(coll, 2, f)
    assert res.tuple_count == brute_force_indicator(coll, 2, f) == 6


def test_scaled_function_scales_value():
    seq = generate(sample_alpha(3, 3, 200), 3, 200)
    f = indicator_box([(-1, 1)])
    base = r_ell(seq, 2, f).value
    assert r_ell(seq, 2, f.scaled(3)).value == pytest.approx(3 * base, rel=1e-15)


def test_workers_identical():
    seq = generate(sample_alpha(11, 5, 600), 5, 600)
    f = indicator_box([(-2, 2), (-1, 3)])
    assert r_ell_windowed(seq, 3, f, workers=1).tuple_count == r_ell_windowed(seq, 3, f, workers=3).tuple_count


def test_fejer_naive_against_direct_k_sum():
    # direct periodized evaluation with a very wide k range as the oracle
    N, A = 9, Fraction(2, 3)  # A*N not an integer, so the certified tail path is used
    seq = generate(sample_alpha(5, 2, N), 2, N)
    res = r_ell_naive(seq, 2, fejer(A, 1), tolerance=1e-6, max_k=1 << 20)
    x = seq.as_float()
    total = 0.0
    ks = np.arange(-200000, 200001)
    for i in range(N):
        for j in range(N):
            if i != j:
                delta = x[i] - x[j]
                total += float(np.sum(float(A) * np.sinc(float(A) * N * (delta + ks)) ** 2))
    assert abs(res.value - total / N) <= res.tail_bound + 1e-6
    assert res.tail_bound <= 1e-6


def test_fejer_exact_tail_when_AN_integer():
    N = 10
    seq = generate(sample_alpha(8, 3, N), 3, N)
    res = r_ell_naive(seq, 2, fejer(Fraction(1, 2), 1))
    assert res.tail_bound == 0.0


def test_fejer_refuses_when_k_range_exceeds_cap():
    seq = generate(sample_alpha(1, 2, 7), 2, 7)
    with pytest.raises(ValueError, match="k"):
        r_ell_naive(seq, 2, fejer(Fraction(1, 3), 1), tolerance=1e-14, max_k=64)


def test_statistical_sanity_uniform_points():
    f = indicator_box([(Fraction(-1, 2), Fraction(1, 2))])
    hits = sum(abs(r_ell(uniform_points(2000, s), 2, f).value - 1) <= 0.1 for s in range(100))
    assert hits >= 95
