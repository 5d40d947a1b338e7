"""Closed-form security bounds for improved fuzzy vault records.

Everything here is exact big-rational arithmetic; probabilities are
reported as log2 values alongside the exact fraction.  The formulas tie
record parameters (field size q, set sizes t >= s, secret bound k,
overlap omega) to attacker success probabilities and entropy loss, and
mirror what the Monte-Carlo harness measures.

Conventions: q is the field order (a power of two here, though nothing
below requires it), d = t + s - 2*omega is the set difference.  Where a
parameter combination is outside the range a formula covers, the
evaluator returns None rather than extrapolating; the gap is real and
intentionally surfaced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb


@dataclass(frozen=True)
class BoundValue:
    """A bound with its exact rational value when one exists.

    log2_value is the binary logarithm of the bound (or the bound itself
    in bits, for the leakage quantity).  case labels which formula regime
    produced the value when several exist.
    """

    log2_value: float
    exact: Fraction | None = None
    case: str | None = None


def _log2_fraction(fr: Fraction) -> float:
    if fr == 0:
        return float("-inf")
    return math.log2(fr.numerator) - math.log2(fr.denominator)


def _from_fraction(fr: Fraction, case: str | None = None) -> BoundValue:
    return BoundValue(_log2_fraction(fr), fr, case)


def _validate(q, t, s, k, omega=None) -> None:
    if not 1 <= k <= s <= t <= q:
        raise ValueError("need 1 <= k <= s <= t <= q")
    if omega is not None:
        if not 0 <= omega <= s:
            raise ValueError("need 0 <= omega <= s")
        # the union of the two sets must fit in the field
        if t + s - omega > q:
            raise ValueError("no instances: t + s - omega exceeds q")


def single_record_bound(q, t, k):
    """Limit on recovering the feature set from one record, plus the
    baseline rate of guessing k of its elements outright.

    Returns (bound, baseline) as BoundValues.
    """
    _validate(q, t, t, k)
    bound = Fraction(q ** (t - k), comb(q, t))
    baseline = Fraction(comb(t, k), comb(q, k))
    return _from_fraction(bound), _from_fraction(baseline)


def leakage_bound(q, t, s, k, d):
    """Entropy loss (bits) of publishing two records at set difference d."""
    _validate(q, t, s, k)
    if (d - (t + s)) % 2 != 0:
        raise ValueError("set difference d must have the parity of t+s")
    _validate(q, t, s, k, (t + s - d) // 2)
    words = min(t + s - 2 * k, t - k + d)
    if q & (q - 1) == 0:
        exact = Fraction(words * (q.bit_length() - 1))
        return BoundValue(float(exact), exact)
    return BoundValue(words * math.log2(q), None)


def full_recovery_upper_bound(q, t, s, k, omega):
    """Ceiling on any attack recovering both feature sets."""
    _validate(q, t, s, k, omega)
    expo = min(t + s - 2 * k, 2 * t + s - 2 * omega - k)
    denom = comb(q, omega) * comb(q - omega, t - omega) * comb(q - t, s - omega)
    return _from_fraction(Fraction(q**expo, denom))


def full_recovery_lower_bound(q, t, s, k, omega):
    """Success rate the guessing attack achieves at a correct overlap
    hypothesis; h difference guesses per side, m overlap guesses."""
    _validate(q, t, s, k, omega)
    h = max(0, (t + k + 1) // 2 - omega)
    m = max(0, k - (t - omega))
    num = comb(t - omega, h) * comb(s - omega, h) * comb(omega, m)
    den = comb(q, h) ** 2 * comb(q, m)
    return _from_fraction(Fraction(num, den))


def partial_bounds(q, t, s, k, omega):
    """Limits on extracting single elements from a record pair.

    Returns (intersection_bound, difference_bound); either is None where
    no formula applies.  The difference bound reports which of its three
    case formulas was used.
    """
    _validate(q, t, s, k, omega)
    intersection = None
    if omega > t - k:
        intersection = _from_fraction(
            Fraction(
                q ** (t - k) * comb(q, k - 1),
                comb(q, t) * comb(t - 1, k - 1),
            )
        )
    difference = _difference_bound(q, t, s, k, omega)
    return intersection, difference


def _difference_bound(q, t, s, k, omega):
    lead = q ** (t + s - 2 * k)
    if t - k <= omega and 2 * omega < t + k:
        h = (t + k + 1) // 2 - omega
        num = 2 * lead * comb(q, 2 * h - 1) * comb(q, k - t + omega)
        den = (
            comb(t - omega, h - 1)
            * comb(s - omega, h)
            * comb(omega, k - s + omega)
            * comb(q, t + s - omega)
        )
        if den == 0:
            return None
        return _from_fraction(Fraction(num, den), case="mid-overlap")
    if omega == k:
        num = 2 * lead * comb(q, k - 1) * (t - k + 1)
        den = comb(q, t + s - k) * k
        return _from_fraction(Fraction(num, den), case="overlap-equals-k")
    if omega < k:
        num = 2 * lead * comb(q, omega) * comb(q, k - omega - 1) * comb(q, k - omega)
        den = (
            comb(q, t + s - omega)
            * comb(t - omega - 1, k - omega - 1)
            * comb(s - omega, k - omega)
        )
        if den == 0:
            return None
        return _from_fraction(Fraction(num, den), case="small-overlap")
    return None
