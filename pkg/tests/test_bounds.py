"""Closed-form bound evaluators: pinned values, relations, domain gaps."""

import math
from fractions import Fraction

import pytest

from polyvault import attack, bounds, gf2m

from conftest import make_pair, seeded


def close_log2(bv):
    if bv.exact is None or bv.exact == 0:
        return True
    return abs(bv.log2_value - (math.log2(bv.exact.numerator) - math.log2(bv.exact.denominator))) < 1e-9


def test_single_record_bound_values():
    bound, baseline = bounds.single_record_bound(16, 2, 1)
    assert bound.exact == Fraction(16, 120)
    assert baseline.exact == Fraction(2, 16)
    # k = t collapses to one over the number of possible sets
    bound_kt, _ = bounds.single_record_bound(16, 4, 4)
    assert bound_kt.exact == Fraction(1, math.comb(16, 4))
    assert close_log2(bound) and close_log2(baseline)


def test_single_record_bound_factorial_approximation():
    bound, _ = bounds.single_record_bound(1 << 16, 24, 9)
    approx = Fraction(math.factorial(24), (1 << 16) ** 9)
    ratio = bound.exact / approx
    assert Fraction(1, 2) < ratio < 2  # the stated approximation quality
    assert abs(float(ratio) - 1.00422) < 1e-3  # and what it actually is


def test_leakage_bound_values():
    q = 1 << 16
    # identical sets: same leakage as a single record, (t-k) field words
    assert bounds.leakage_bound(q, 24, 24, 9, 0).exact == 15 * 16
    assert bounds.leakage_bound(q, 24, 24, 9, 8).exact == 23 * 16
    assert bounds.leakage_bound(q, 24, 24, 9, 28).exact == 30 * 16
    with pytest.raises(ValueError):
        bounds.leakage_bound(q, 24, 24, 9, 7)  # parity mismatch
    with pytest.raises(ValueError):
        bounds.leakage_bound(16, 10, 10, 2, 20)  # union would exceed q


def test_leakage_bound_monotone_in_difference():
    q = 1 << 16
    vals = [bounds.leakage_bound(q, 24, 24, 9, d).exact for d in range(0, 30, 2)]
    assert vals == sorted(vals)
    assert len(set(vals)) > 1


def test_full_recovery_upper_bound_values():
    # omega = t = s reduces to the single-record bound
    for q, t, k in ((256, 8, 3), (1 << 12, 20, 6)):
        upper = bounds.full_recovery_upper_bound(q, t, t, k, t)
        single, _ = bounds.single_record_bound(q, t, k)
        assert upper.exact == single.exact
    u = bounds.full_recovery_upper_bound(256, 8, 8, 4, 6)
    denom = math.comb(256, 6) * math.comb(250, 2) * math.comb(248, 2)
    assert u.exact == Fraction(256**8, denom)
    assert abs(u.log2_value - (-4.251351838)) < 1e-6


def test_full_recovery_upper_bound_monotone_in_k():
    vals = [
        bounds.full_recovery_upper_bound(256, 10, 8, k, 7).exact for k in range(1, 9)
    ]
    for lo, hi in zip(vals[1:], vals):
        assert lo <= hi


def test_full_recovery_lower_bound_values():
    # no guessing needed anywhere in the window [ceil((t+k)/2), t-k]
    assert bounds.full_recovery_lower_bound(256, 20, 20, 4, 13).exact == 1
    assert bounds.full_recovery_lower_bound(256, 20, 20, 4, 12).exact == 1
    assert bounds.full_recovery_lower_bound(256, 20, 20, 4, 16).exact == 1
    got = bounds.full_recovery_lower_bound(16, 8, 8, 4, 7)
    assert got.exact == Fraction(35, 560)
    assert close_log2(got)


def test_lower_bound_never_exceeds_upper_bound():
    q = 16
    checked = 0
    for t in range(2, 9):
        for s in range(1, t + 1):
            for k in range(1, s + 1):
                for omega in range(max(0, t + s - q), s + 1):
                    lo = bounds.full_recovery_lower_bound(q, t, s, k, omega)
                    hi = bounds.full_recovery_upper_bound(q, t, s, k, omega)
                    assert lo.exact <= max(hi.exact, 1)
                    checked += 1
    assert checked > 500


def test_lower_bound_matches_common_guess_arithmetic():
    # h = 0, m = k - (t - omega) pure-overlap-guess regime
    got = bounds.full_recovery_lower_bound(256, 10, 10, 3, 8)
    assert got.exact == Fraction(math.comb(8, 1), math.comb(256, 1))


def test_partial_intersection_bound():
    inter, _ = bounds.partial_bounds(256, 10, 10, 4, 7)
    assert inter is not None
    assert inter.exact == Fraction(140737488355328, 4237603134765)
    # absent at or below t - k
    assert bounds.partial_bounds(256, 10, 10, 4, 6)[0] is None
    assert bounds.partial_bounds(256, 10, 10, 4, 3)[0] is None
    # one-set specialization evaluates exactly
    one_set, _ = bounds.partial_bounds(16, 6, 6, 2, 6)
    assert one_set.exact == Fraction(131072, 5005)


def test_partial_intersection_bound_scales_inverse_q():
    prev = None
    for q_bits in range(12, 22):
        val = bounds.partial_bounds(1 << q_bits, 10, 10, 4, 7)[0].exact
        if prev is not None:
            assert abs(float(val / prev) - 0.5) < 0.01
        prev = val


def test_partial_difference_bound_cases():
    _, mid = bounds.partial_bounds(256, 10, 10, 4, 6)
    assert mid.case == "mid-overlap"
    assert mid.exact == Fraction(
        79228162514264337593543950336, 324022825928326163625
    )
    _, eqk = bounds.partial_bounds(256, 10, 10, 4, 4)
    assert eqk.case == "overlap-equals-k"
    assert eqk.exact == Fraction(
        633825300114114700748351602688, 8336160591893000955
    )
    _, small = bounds.partial_bounds(256, 10, 10, 4, 2)
    assert small.case == "small-overlap"
    assert small.exact == Fraction(
        375143448029141296161328359786151936, 3214386165884621944058535
    )
    # acknowledged gap: k < omega < t - k with 2*omega >= t + k
    _, gap = bounds.partial_bounds(256, 18, 18, 2, 6)
    assert gap is None


def test_validation_errors():
    with pytest.raises(ValueError):
        bounds.single_record_bound(16, 20, 3)  # t > q
    with pytest.raises(ValueError):
        bounds.full_recovery_lower_bound(16, 8, 9, 3, 4)  # s > t
    with pytest.raises(ValueError):
        bounds.full_recovery_lower_bound(16, 8, 8, 0, 4)  # k < 1
    with pytest.raises(ValueError):
        bounds.full_recovery_upper_bound(16, 8, 8, 3, 9)  # omega > s
    with pytest.raises(ValueError):
        bounds.full_recovery_upper_bound(16, 12, 12, 3, 2)  # union over q


def test_upper_bound_dominates_measured_rate():
    # Monte-Carlo full recovery never beats the ceiling
    rng = seeded(95)
    q, t, s, k, omega = 16, 6, 6, 3, 5
    gf = gf2m.field(4)
    hits = 0
    n = 500
    for _ in range(n):
        set_a, set_b, rec_a, rec_b = make_pair(gf, t, s, k, omega, rng)
        out = attack.full_recovery(rec_a, rec_b, omega, rng)
        if out == attack.FullRecoveryOutput(set_a, set_b):
            hits += 1
    upper = bounds.full_recovery_upper_bound(q, t, s, k, omega)
    assert hits / n <= float(upper.exact)


def test_crossover_overlap_guessing_rate():
    # at 2*omega = t + k - 1 exactly one difference element per side must
    # be guessed, so the rate is (t-omega)(s-omega)/q^2: below the 1/q
    # decay of the scan's output rate by a constant times q
    t, s, k = 10, 10, 3
    omega = (t + k - 1) // 2
    for q_bits in (8, 10, 12, 14, 16):
        q = 1 << q_bits
        val = bounds.full_recovery_lower_bound(q, t, s, k, omega)
        assert val.exact == Fraction((t - omega) * (s - omega), q * q)
        assert float(val.exact) * q <= (t - omega) * (s - omega)
