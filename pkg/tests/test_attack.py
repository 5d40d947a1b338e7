"""Record-linkage attack paths: partial, full, driver, baselines, oracles."""

import math
import random

import pytest

from polyvault import attack, bounds, gf2m, poly, vault

from conftest import make_pair, seeded


GF = gf2m.field(8)


def consistent_with(rec, pts) -> bool:
    chi = poly.char_poly(rec.record_field(), sorted(pts))
    return chi[rec.k :] == rec.as_polynomial()[rec.k :]


# -- partial recovery --------------------------------------------------------


def test_partial_recovery_guaranteed_regime():
    rng = seeded(60)
    for t, s, k, omega in ((10, 8, 3, 9), (10, 8, 3, 7), (12, 12, 5, 9), (6, 6, 1, 4)):
        threshold = -(-(t + k) // 2)
        assert omega >= threshold  # sanity on chosen params
        for _ in range(20):
            set_a, set_b, rec_a, rec_b = make_pair(GF, t, s, k, omega, rng)
            out = attack.partial_recovery(rec_a, rec_b, rng)
            assert isinstance(out, attack.PartialRecoveryOutput)
            assert out.omega_star == omega
            assert out.diff_a == set_a - set_b
            assert out.diff_b == set_b - set_a


def test_partial_recovery_argument_order():
    rng = seeded(61)
    set_a, set_b, rec_a, rec_b = make_pair(GF, 10, 8, 3, 8, rng)
    fwd = attack.partial_recovery(rec_a, rec_b, rng)
    rev = attack.partial_recovery(rec_b, rec_a, rng)
    assert fwd.diff_a == rev.diff_b == set_a - set_b
    assert fwd.diff_b == rev.diff_a == set_b - set_a
    assert fwd.omega_star == rev.omega_star == 8


def test_partial_recovery_deterministic_variant():
    rng = seeded(62)
    set_a, set_b, rec_a, rec_b = make_pair(GF, 10, 10, 3, 8, rng, variant="deterministic")
    out = attack.partial_recovery(rec_a, rec_b, rng)
    assert out.diff_a == set_a - set_b and out.diff_b == set_b - set_a
    # a deterministic and a probabilistic record mix fine: only upper
    # coefficients enter the scan
    rec_mixed, _ = vault.enroll_probabilistic(GF, sorted(set_b), 3, rng)
    out2 = attack.partial_recovery(rec_a, rec_mixed, rng)
    assert out2.diff_a == set_a - set_b and out2.diff_b == set_b - set_a


def test_partial_recovery_identical_records():
    rng = seeded(63)
    pts = GF.rand_distinct(8, rng)
    rec, _ = vault.enroll_probabilistic(GF, pts, 3, rng)
    out = attack.partial_recovery(rec, rec, rng)
    assert out == attack.Failure(attack.FailureReason.NO_QUALIFYING_INDEX)
    # same set, fresh secret: the difference of the records has low degree
    rec2, _ = vault.enroll_probabilistic(GF, pts, 3, rng)
    out2 = attack.partial_recovery(rec, rec2, rng)
    assert out2 == attack.PartialRecoveryOutput(8, frozenset(), frozenset())


def test_partial_recovery_is_deterministic():
    rng = seeded(64)
    _, _, rec_a, rec_b = make_pair(GF, 10, 8, 3, 5, rng)
    assert attack.partial_recovery(rec_a, rec_b) == attack.partial_recovery(
        rec_a, rec_b
    )


def test_partial_recovery_low_overlap_mostly_fails():
    rng = seeded(65)
    reasons = set()
    n_outputs = 0
    for _ in range(200):
        _, _, rec_a, rec_b = make_pair(GF, 10, 10, 3, 4, rng)
        out = attack.partial_recovery(rec_a, rec_b, rng)
        if isinstance(out, attack.Failure):
            reasons.add(out.reason)
        else:
            n_outputs += 1
            # spurious or not, the degree bookkeeping must hold
            assert out.omega_star == 10 - len(out.diff_a) == 10 - len(out.diff_b)
            assert attack.verify_shared_factor_identity(rec_a, rec_b, out)
    assert n_outputs <= 4  # roughly a 1/q event
    assert reasons <= {
        attack.FailureReason.NO_QUALIFYING_INDEX,
        attack.FailureReason.REMAINDER_TOO_LARGE,
        attack.FailureReason.NOT_SPLITTING,
    }
    assert len(reasons) >= 2


def test_partial_recovery_record_compatibility_checks():
    rng = seeded(66)
    _, _, rec_a, _ = make_pair(GF, 8, 8, 3, 4, rng)
    other_field, _ = vault.enroll_probabilistic(
        gf2m.field(4), list(range(8)), 3, rng
    )
    with pytest.raises(vault.VaultError):
        attack.partial_recovery(rec_a, other_field)
    other_k, _ = vault.enroll_probabilistic(GF, GF.rand_distinct(8, rng), 2, rng)
    with pytest.raises(vault.VaultError):
        attack.partial_recovery(rec_a, other_k)


def test_shared_factor_identity_accepts_and_rejects():
    rng = seeded(67)
    for t, s, k, omega in ((10, 8, 3, 8), (12, 10, 5, 9), (10, 10, 3, 10)):
        set_a, set_b, rec_a, rec_b = make_pair(GF, t, s, k, omega, rng)
        out = attack.partial_recovery(rec_a, rec_b, rng)
        assert attack.verify_shared_factor_identity(rec_a, rec_b, out)
        # argument order must not matter given the matching output
        swapped = attack.PartialRecoveryOutput(out.omega_star, out.diff_b, out.diff_a)
        assert attack.verify_shared_factor_identity(rec_b, rec_a, swapped)
        if out.diff_a:
            # move one element between the difference sets: same sizes,
            # wrong content
            moved = next(iter(out.diff_a))
            repl = next(x for x in range(GF.q) if x not in set_a | set_b)
            tampered = attack.PartialRecoveryOutput(
                out.omega_star,
                (out.diff_a - {moved}) | {repl},
                out.diff_b,
            )
            assert not attack.verify_shared_factor_identity(rec_a, rec_b, tampered)


def test_reduce_and_extend_record_slices():
    rng = seeded(68)
    for _ in range(50):
        k = rng.randrange(1, 4)
        pts = GF.rand_distinct(8, rng)
        chi = poly.char_poly(GF, pts)
        upper = chi[k:]
        x = pts[0]
        reduced = attack.reduce_record(GF, upper, x)
        rest = poly.char_poly(GF, sorted(set(pts) - {x}))
        assert reduced == rest[k - 1 :]
        assert attack.extend_record(GF, reduced, x) == upper[: len(upper)]
        # extending by a fresh element shifts the slice start up by one
        y = GF.rand_distinct(1, rng, exclude=pts)[0]
        grown = attack.extend_record(GF, upper, y)
        assert grown == poly.char_poly(GF, sorted(pts) + [y])[k + 1 :]
        assert attack.reduce_record(GF, grown, y) == upper


# -- full recovery -----------------------------------------------------------


def test_full_recovery_no_guess_regime():
    # omega high enough that no guessing at all is needed: deterministic
    rng = seeded(70)
    for _ in range(30):
        set_a, set_b, rec_a, rec_b = make_pair(GF, 10, 10, 3, 7, rng)
        out = attack.full_recovery(rec_a, rec_b, 7, rng)
        assert out == attack.FullRecoveryOutput(set_a, set_b)


def test_full_recovery_self_corrects_hypothesis():
    # stating omega too low is harmless while h stays 0: the scan reports
    # the true overlap and the common-guess count adjusts
    rng = seeded(71)
    for _ in range(30):
        set_a, set_b, rec_a, rec_b = make_pair(GF, 10, 10, 2, 8, rng)
        out = attack.full_recovery(rec_a, rec_b, 7, rng)
        assert out == attack.FullRecoveryOutput(set_a, set_b)


def test_full_recovery_common_guess_rate():
    # t - omega^* < k: the attack must guess need = k - (t - omega) common
    # elements; success rate is binom(omega, need) / binom(q, need)
    rng = seeded(72)
    n, hits = 3000, 0
    for _ in range(n):
        set_a, set_b, rec_a, rec_b = make_pair(GF, 10, 10, 3, 8, rng)
        out = attack.full_recovery(rec_a, rec_b, 8, rng)
        if isinstance(out, attack.FullRecoveryOutput):
            assert out == attack.FullRecoveryOutput(set_a, set_b)
            hits += 1
    expect = 8 / 256
    assert abs(hits / n - expect) < 5 * math.sqrt(expect * (1 - expect) / n)


def test_full_recovery_difference_guess_rate():
    # omega below the threshold: h elements of each difference set must be
    # guessed before the scan can qualify
    rng = seeded(73)
    gf = gf2m.field(4)
    t = s = 8
    k, omega = 4, 5
    h = max(0, (t + k + 1) // 2 - omega)
    assert 0 < h < k
    rate = bounds.full_recovery_lower_bound(16, t, s, k, omega)
    n, hits, spurious = 6000, 0, 0
    for _ in range(n):
        set_a, set_b, rec_a, rec_b = make_pair(gf, t, s, k, omega, rng)
        out = attack.full_recovery(rec_a, rec_b, omega, rng)
        if isinstance(out, attack.FullRecoveryOutput):
            if out.set_a == set_a and out.set_b == set_b:
                hits += 1
            else:
                # spurious successes happen in a field this small; they
                # still open the first record
                assert consistent_with(rec_a, out.set_a)
                spurious += 1
    p = float(rate.exact)
    assert hits > 0
    assert abs(hits / n - p) < 5 * math.sqrt(p * (1 - p) / n) + 0.3 * p
    assert spurious < n * 0.05


def test_full_recovery_guess_overflow():
    rng = seeded(74)
    _, _, rec_a, rec_b = make_pair(gf2m.field(4), 8, 8, 4, 2, rng)
    with pytest.raises(attack.GuessOverflowError):
        attack.full_recovery(rec_a, rec_b, 2, rng)


def test_full_recovery_verifier_hook():
    rng = seeded(75)
    set_a, set_b, rec_a, rec_b = make_pair(GF, 10, 10, 3, 7, rng)
    seen = []

    def spy(a, b):
        seen.append((a, b))
        return True

    out = attack.full_recovery(rec_a, rec_b, 7, rng, verifier=spy)
    assert out == attack.FullRecoveryOutput(set_a, set_b)
    assert seen == [(set_a, set_b)]
    rejected = attack.full_recovery(rec_a, rec_b, 7, rng, verifier=lambda a, b: False)
    assert rejected == attack.Failure(attack.FailureReason.VERIFIER_REJECTED)


# -- driver ------------------------------------------------------------------


def test_driver_finds_pair_quickly_at_high_overlap():
    rng = seeded(76)
    set_a, set_b, rec_a, rec_b = make_pair(GF, 10, 10, 3, 7, rng)
    out = attack.brute_force_driver(rec_a, rec_b, 9, 7, 500, rng)
    assert out == attack.FullRecoveryOutput(set_a, set_b)


def test_driver_walks_down_to_true_level():
    rng = seeded(77)
    gf = gf2m.field(4)
    set_a, set_b, rec_a, rec_b = make_pair(gf, 10, 10, 3, 9, rng)
    out = attack.brute_force_driver(rec_a, rec_b, 10, 7, 50, rng)
    assert out == attack.FullRecoveryOutput(set_a, set_b)


def test_driver_exhausts_budget_on_hopeless_instance():
    rng = seeded(78)
    _, _, rec_a, rec_b = make_pair(GF, 10, 10, 3, 0, rng)
    out = attack.brute_force_driver(rec_a, rec_b, 9, 7, 30, rng)
    assert isinstance(out, attack.Exhausted)
    assert 1 <= out.attempts <= 30


def test_driver_direct_guess_fallback():
    # levels with h >= k guess points outright; the budget is then spent
    # exactly, and any returned pair opens both records
    rng = seeded(79)
    gf = gf2m.field(4)
    set_a, set_b, rec_a, rec_b = make_pair(gf, 6, 6, 2, 3, rng)
    out = attack.brute_force_driver(rec_a, rec_b, 3, 0, 400, rng)
    if isinstance(out, attack.FullRecoveryOutput):
        assert consistent_with(rec_a, out.set_a)
        assert consistent_with(rec_b, out.set_b)
    else:
        assert out.attempts == 400


def test_driver_verifier_rejection_exhausts():
    rng = seeded(80)
    _, _, rec_a, rec_b = make_pair(GF, 10, 10, 3, 9, rng)
    out = attack.brute_force_driver(
        rec_a, rec_b, 9, 7, 50, rng, verifier=lambda a, b: False
    )
    assert out == attack.Exhausted(50)


def test_driver_verifier_acceptance():
    rng = seeded(81)
    gf = gf2m.field(4)
    set_a, set_b, rec_a, rec_b = make_pair(gf, 10, 10, 3, 9, rng)
    out = attack.brute_force_driver(
        rec_a, rec_b, 9, 7, 50, rng, verifier=lambda a, b: (a, b) == (set_a, set_b)
    )
    assert out == attack.FullRecoveryOutput(set_a, set_b)


def test_driver_argument_validation():
    rng = seeded(82)
    _, _, rec_a, rec_b = make_pair(GF, 8, 8, 3, 4, rng)
    with pytest.raises(vault.VaultError):
        attack.brute_force_driver(rec_a, rec_b, 3, 7, 10, rng)


# -- single record baseline --------------------------------------------------


def test_single_record_attack_succeeds_on_small_field():
    rng = seeded(83)
    gf = gf2m.field(4)
    pts = gf.rand_distinct(4, rng)
    rec, _ = vault.enroll_probabilistic(gf, pts, 2, rng)
    out = attack.single_record_attack(rec, rng, budget=3000)
    assert isinstance(out, frozenset)
    assert consistent_with(rec, out)


def test_single_record_attack_exhausts():
    rng = seeded(84)
    pts = GF.rand_distinct(24, rng)
    rec, _ = vault.enroll_probabilistic(GF, pts, 9, rng)
    out = attack.single_record_attack(rec, rng, budget=5)
    assert out == attack.Exhausted(5)


# -- blending countermeasure -------------------------------------------------


def test_blending_breaks_linkage_that_plain_records_leak():
    rng = seeded(85)
    base = GF.rand_distinct(6, rng)
    # plain records with identical feature sets link immediately
    plain_a, _ = vault.enroll_probabilistic(GF, base, 2, rng)
    plain_b, _ = vault.enroll_probabilistic(GF, base, 2, rng)
    out = attack.partial_recovery(plain_a, plain_b, rng)
    assert out == attack.PartialRecoveryOutput(6, frozenset(), frozenset())
    # blended records of the same sets stay unlinkable: the effective
    # overlap (embedded features only) sits far below the threshold
    # (t + blend + k) / 2
    linked = 0
    for _ in range(20):
        rec_a, _ = vault.enroll_blended(GF, base, 2, 8, 2, rng)
        rec_b, _ = vault.enroll_blended(GF, base, 2, 8, 2, rng)
        got = attack.partial_recovery(rec_a, rec_b, rng)
        if isinstance(got, attack.PartialRecoveryOutput):
            ext = rec_a.record_field()
            emb = {ext.embed_from(GF, x) for x in base}
            if got.omega_star >= 6 and got.diff_a | got.diff_b and emb.isdisjoint(
                got.diff_a | got.diff_b
            ):
                linked += 1
    assert linked == 0


# -- oracles -----------------------------------------------------------------


def test_exhaustive_oracle_contains_truth_and_only_consistent_pairs():
    rng = seeded(86)
    gf = gf2m.field(4)
    set_a, set_b, rec_a, rec_b = make_pair(gf, 3, 3, 1, 2, rng)
    pairs = attack.exhaustive_oracle(rec_a, rec_b)
    assert (set_a, set_b) in pairs
    for a, b in pairs:
        assert consistent_with(rec_a, a) and consistent_with(rec_b, b)
    swapped = attack.exhaustive_oracle(rec_b, rec_a)
    assert swapped == {(b, a) for a, b in pairs}


def test_exhaustive_oracle_caps():
    rng = seeded(87)
    _, _, rec_a, rec_b = make_pair(GF, 6, 6, 2, 3, rng)
    with pytest.raises(attack.CapExceeded):
        attack.exhaustive_oracle(rec_a, rec_b)  # q = 256 over the field limit
    gf = gf2m.field(6)
    _, _, small_a, small_b = make_pair(gf, 6, 6, 2, 3, rng)
    with pytest.raises(attack.CapExceeded):
        attack.exhaustive_oracle(small_a, small_b, cap=10)


def test_anchored_oracle_matches_filtered_exhaustive():
    rng = seeded(88)
    gf = gf2m.field(4)
    for t, s, k, omega in ((4, 4, 2, 3), (5, 4, 2, 3), (4, 4, 3, 3)):
        set_a, set_b, rec_a, rec_b = make_pair(gf, t, s, k, omega, rng)
        out = attack.partial_recovery(rec_a, rec_b, rng)
        if not isinstance(out, attack.PartialRecoveryOutput):
            continue
        anchored = set(attack.anchored_oracle(rec_a, rec_b, out))
        filtered = {
            (a, b)
            for a, b in attack.exhaustive_oracle(rec_a, rec_b)
            if a - b == out.diff_a and b - a == out.diff_b
        }
        assert anchored == filtered
        if omega >= -(-(t + k) // 2):
            # guaranteed regime: the output is exact, so the real pair
            # must be among the anchored reconstructions
            assert out.diff_a == set_a - set_b and out.diff_b == set_b - set_a
            assert (set_a, set_b) in anchored


def test_anchored_oracle_degenerate_no_constraints():
    # k = t = s leaves no linear constraints: every monic overlap factor of
    # degree omega is a candidate, and the splitting filter picks subsets
    rng = seeded(89)
    gf = gf2m.field(4)
    pts = gf.rand_distinct(3, rng)
    rec_a, _ = vault.enroll_probabilistic(gf, pts, 3, rng)
    rec_b, _ = vault.enroll_probabilistic(gf, pts, 3, rng)
    out = attack.PartialRecoveryOutput(3, frozenset(), frozenset())
    anchored = set(attack.anchored_oracle(rec_a, rec_b, out))
    expected = {
        (frozenset(c), frozenset(c))
        for c in __import__("itertools").combinations(range(gf.q), 3)
    }
    assert anchored == expected


def test_anchored_oracle_cap_and_validation():
    rng = seeded(90)
    gf = gf2m.field(4)
    pts = gf.rand_distinct(4, rng)
    rec_a, _ = vault.enroll_probabilistic(gf, pts, 4, rng)
    rec_b, _ = vault.enroll_probabilistic(gf, pts, 4, rng)
    out = attack.PartialRecoveryOutput(4, frozenset(), frozenset())
    with pytest.raises(attack.CapExceeded):
        attack.anchored_oracle(rec_a, rec_b, out, cap=100)
    bad = attack.PartialRecoveryOutput(3, frozenset(), frozenset())
    with pytest.raises(vault.VaultError):
        attack.anchored_oracle(rec_a, rec_b, bad)


def test_anchored_oracle_respects_argument_order():
    rng = seeded(91)
    gf = gf2m.field(4)
    set_a, set_b, rec_a, rec_b = make_pair(gf, 6, 5, 2, 4, rng)
    out = attack.partial_recovery(rec_a, rec_b, rng)
    assert isinstance(out, attack.PartialRecoveryOutput)
    rev = attack.PartialRecoveryOutput(out.omega_star, out.diff_b, out.diff_a)
    fwd_pairs = set(attack.anchored_oracle(rec_a, rec_b, out))
    rev_pairs = set(attack.anchored_oracle(rec_b, rec_a, rev))
    assert rev_pairs == {(b, a) for a, b in fwd_pairs}
