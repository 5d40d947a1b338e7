"""Record-multiplicity attacks on improved fuzzy vault records.

The central observation: two records V and W built from feature sets A and
B expose char_poly(A) and char_poly(B) above index k, so an extended
Euclidean trace of (V, W) surfaces a row whose cofactors are scalar
multiples of char_poly(A minus B) and char_poly(B minus A) whenever the
overlap is large enough.  Everything else here is scaffolding around that
row: guessing machinery to push borderline instances over the threshold,
set reassembly, a budgeted retry driver, and two oracles used to validate
attack outputs against ground truth on small instances.

partial_recovery and full_recovery are pure functions of (records, rng);
the driver only adds bookkeeping.  A fast compiled scan is used when the
field has log tables; a reference implementation in plain Python is kept
for wide fields and for cross-checking.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass

from . import _kernels, bounds, gf2m, poly
from .vault import VaultError, VaultRecord


class FailureReason(enum.Enum):
    """Distinguished ways an attack run can come up empty."""

    NO_QUALIFYING_INDEX = "no-qualifying-index"
    REMAINDER_TOO_LARGE = "remainder-too-large"
    NOT_SPLITTING = "non-splitting"
    UNLOCK_FAILED = "unlock-failed"
    VERIFIER_REJECTED = "verifier-rejected"
    ASSEMBLY_MISMATCH = "assembly-mismatch"


_REASON_BY_STATUS = {
    _kernels.NO_QUALIFYING_INDEX: FailureReason.NO_QUALIFYING_INDEX,
    _kernels.REMAINDER_TOO_LARGE: FailureReason.REMAINDER_TOO_LARGE,
    _kernels.FIRST_NOT_SPLITTING: FailureReason.NOT_SPLITTING,
    _kernels.SECOND_NOT_SPLITTING: FailureReason.NOT_SPLITTING,
}


@dataclass(frozen=True)
class Failure:
    reason: FailureReason


@dataclass(frozen=True)
class PartialRecoveryOutput:
    """Candidate overlap size and difference sets.

    omega_star = t - |diff_a| = s - |diff_b| always holds; nothing else is
    guaranteed for spurious outputs.
    """

    omega_star: int
    diff_a: frozenset
    diff_b: frozenset


@dataclass(frozen=True)
class FullRecoveryOutput:
    set_a: frozenset
    set_b: frozenset


@dataclass(frozen=True)
class Exhausted:
    attempts: int


class GuessOverflowError(VaultError):
    """The overlap hypothesis would require guessing k or more elements."""


class CapExceeded(VaultError):
    """An oracle enumeration would exceed its configured size cap."""


# ---------------------------------------------------------------------------
# partial recovery


def _partial_reference(gf, v, w, k):
    """Plain-Python scan over the full Euclidean trace.

    Returns (status, omega_star, diff_a, diff_b) in the same encoding as
    the compiled kernel; used for wide fields and cross-validation.
    """
    qualifying = []
    for row in poly.traced_eea(gf, v, w):
        if not poly.is_zero(row.r) and poly.degree(row.r) < poly.degree(row.q_cof) + k:
            qualifying.append(row)
    if not qualifying:
        return _kernels.NO_QUALIFYING_INDEX, 0, None, None
    best_deg = min(poly.degree(row.q_cof) for row in qualifying)
    ties = [row for row in qualifying if poly.degree(row.q_cof) == best_deg]
    # cofactor degrees strictly increase with the row index, so the
    # minimum is attained exactly once
    assert len(ties) == 1, "qualifying cofactor degree minimizer is not unique"
    row = ties[0]
    qm = poly.monic(gf, row.q_cof)
    omega_star = poly.degree(v) - poly.degree(qm)
    if poly.degree(poly.mod(gf, v, qm)) >= k:
        return _kernels.REMAINDER_TOO_LARGE, omega_star, None, None
    roots_a = poly.roots_if_splits(gf, qm)
    if roots_a is None:
        return _kernels.FIRST_NOT_SPLITTING, omega_star, None, None
    pm = poly.monic(gf, row.p)
    roots_b = poly.roots_if_splits(gf, pm)
    if roots_b is None:
        return _kernels.SECOND_NOT_SPLITTING, omega_star, frozenset(roots_a), None
    return _kernels.OK, omega_star, frozenset(roots_a), frozenset(roots_b)


def partial_recovery_on_polys(gf, v, w, k, seed=0, reference=False):
    """Scan two monic dense polynomials with deg v >= deg w >= k.

    Low-level entry point shared by the record API, the full-recovery
    reduction step and the experiment harness.
    """
    if reference or not _kernels.AVAILABLE or gf.m > gf2m._TABLE_LIMIT:
        return _partial_reference(gf, v, w, k)
    return _kernels.run_attack(gf, v, w, k, seed)


def _record_pair_context(v_rec: VaultRecord, w_rec: VaultRecord):
    gf = v_rec.record_field()
    if w_rec.record_field() != gf:
        raise VaultError("records live in different fields")
    if v_rec.k != w_rec.k:
        raise VaultError("records use different secret degree bounds")
    v = v_rec.as_polynomial()
    w = w_rec.as_polynomial()
    swapped = len(v) < len(w)
    if swapped:
        v, w = w, v
    return gf, v, w, v_rec.k, swapped


def partial_recovery(v_rec: VaultRecord, w_rec: VaultRecord, rng=None, reference=False):
    """Recover candidate difference sets from two records.

    Returns PartialRecoveryOutput or Failure.  When the true overlap
    omega is at least ceil((t+k)/2) the output is exactly
    (omega, A minus B, B minus A); below that threshold outputs are rare
    and usually wrong, which is the whole record-linkage story.
    """
    gf, v, w, k, swapped = _record_pair_context(v_rec, w_rec)
    seed = rng.getrandbits(64) if rng is not None else 0x517CC1B7
    status, omega_star, da, db = partial_recovery_on_polys(gf, v, w, k, seed)
    if reference:
        status, omega_star, da, db = _partial_reference(gf, v, w, k)
    if status != _kernels.OK:
        return Failure(_REASON_BY_STATUS[status])
    if swapped:
        da, db = db, da
    return PartialRecoveryOutput(omega_star, da, db)


def verify_shared_factor_identity(v_rec, w_rec, output: PartialRecoveryOutput) -> bool:
    """Exact factorization check every output must satisfy.

    Asks whether some single quotient chi and low parts of degree < k give
    V = low_a + chi * char_poly(diff_a) and W = low_b + chi * char_poly(diff_b)
    simultaneously.  Holds for spurious outputs too.
    """
    gf, v, w, k, swapped = _record_pair_context(v_rec, w_rec)
    da, db = output.diff_a, output.diff_b
    if swapped:
        da, db = db, da
    chi_a = poly.char_poly(gf, sorted(da))
    chi_b = poly.char_poly(gf, sorted(db))
    quot_a, rem_a = poly.divmod_poly(gf, v, chi_a)
    quot_b, rem_b = poly.divmod_poly(gf, w, chi_b)
    if poly.degree(rem_a) >= k or poly.degree(rem_b) >= k:
        return False
    # The quotient is only pinned down above index k - deg(divisor): adding c
    # with deg(c * divisor) < k to it perturbs the low part without leaving
    # the admissible family, so the two quotients need only agree past that.
    slack = k - min(poly.degree(chi_a), poly.degree(chi_b))
    return poly.degree(poly.add(quot_a, quot_b)) < slack


# ---------------------------------------------------------------------------
# record reduction (dividing out / multiplying in one linear factor at the
# published-coefficient level, no knowledge of the low part required)


def reduce_record(gf, upper, x):
    """Divide (X + x) out of a monic polynomial given only its upper slice.

    upper covers indices k..t ascending (leading 1 last); the result
    covers k-1..t-1 of the quotient.  Exact when x is a root of the full
    polynomial; well-defined (but meaningless) otherwise.
    """
    out = [0] * len(upper)
    out[-1] = upper[-1]
    for i in range(len(upper) - 2, -1, -1):
        out[i] = gf.add(upper[i], gf.mul(x, out[i + 1]))
    return out


def extend_record(gf, upper, x):
    """Multiply (X + x) back in at the slice level; inverse of reduce_record."""
    out = [0] * len(upper)
    out[-1] = upper[-1]
    for i in range(len(upper) - 1):
        out[i] = gf.add(upper[i], gf.mul(x, upper[i + 1]))
    return out


# ---------------------------------------------------------------------------
# full recovery


_PARTIAL_STAGE_REASONS = frozenset(
    (
        FailureReason.NO_QUALIFYING_INDEX,
        FailureReason.REMAINDER_TOO_LARGE,
        FailureReason.NOT_SPLITTING,
    )
)


def _open_with_points(gf, vpoly, pts, rng=None):
    """Interpolate through the given points and try to split the rest.

    Returns the full root set or None.  With exactly k points there is no
    verification step; splitting is the only spuriousness filter.
    """
    pairs = [(x, poly.evaluate(gf, vpoly, x)) for x in pts]
    fstar = poly.interpolate(gf, pairs)
    roots = poly.roots_if_splits(gf, poly.add(vpoly, fstar), rng)
    return None if roots is None else frozenset(roots)


def full_recovery(
    v_rec: VaultRecord,
    w_rec: VaultRecord,
    omega_prime: int,
    rng: random.Random,
    verifier=None,
    reference=False,
):
    """Recover both feature sets under an overlap hypothesis omega_prime.

    Steps: guess h = max(0, ceil((t+k)/2) - omega_prime) elements of each
    difference set and divide them out, run partial recovery on the
    reduced records with secret bound k-h, then (if the surviving
    difference candidate is too small to unlock) guess enough overlap
    elements to reach k points, unlock the larger record through
    interpolation plus verification, and reassemble the second set.

    Returns FullRecoveryOutput or Failure; raises GuessOverflowError when
    h >= k, where the reduced instance would carry no secret at all (the
    driver falls back to direct guessing in that regime).
    """
    gf, v, w, k, swapped = _record_pair_context(v_rec, w_rec)
    t = poly.degree(v)
    s = poly.degree(w)
    h = max(0, (t + k + 1) // 2 - omega_prime)
    if h >= k:
        raise GuessOverflowError(
            "overlap hypothesis %d needs %d >= k guesses" % (omega_prime, h)
        )
    vu = v[k:]
    wu = w[k:]
    guess_a: frozenset = frozenset()
    guess_b: frozenset = frozenset()
    if h > 0:
        guess_a = frozenset(gf.rand_distinct(h, rng))
        guess_b = frozenset(gf.rand_distinct(h, rng))
        for x in sorted(guess_a):
            vu = reduce_record(gf, vu, x)
        for x in sorted(guess_b):
            wu = reduce_record(gf, wu, x)
    kk = k - h
    vbar = [0] * kk + list(vu)
    wbar = [0] * kk + list(wu)
    status, omega_star, da, db = partial_recovery_on_polys(
        gf, vbar, wbar, kk, rng.getrandbits(64), reference
    )
    if status != _kernels.OK:
        return Failure(_REASON_BY_STATUS[status])
    cand_a = guess_a | da
    cand_b = guess_b | db
    omega_prime = omega_star
    need = k - (t - omega_prime)
    guessed_common: frozenset = frozenset()
    if need > 0:
        guessed_common = frozenset(gf.rand_distinct(need, rng))
    a_star = cand_a | guessed_common
    if len(a_star) < k:
        return Failure(FailureReason.UNLOCK_FAILED)
    pts = sorted(a_star)
    head, tail = pts[:k], pts[k:]
    fstar = poly.interpolate(gf, [(x, poly.evaluate(gf, v, x)) for x in head])
    for x in tail:
        if poly.evaluate(gf, fstar, x) != poly.evaluate(gf, v, x):
            return Failure(FailureReason.UNLOCK_FAILED)
    roots = poly.roots_if_splits(gf, poly.add(v, fstar), rng)
    if roots is None:
        return Failure(FailureReason.UNLOCK_FAILED)
    set_a = frozenset(roots)
    set_b = cand_b | (set_a - cand_a)
    if len(set_b) != s:
        return Failure(FailureReason.ASSEMBLY_MISMATCH)
    if swapped:
        set_a, set_b = set_b, set_a
    out = FullRecoveryOutput(set_a, set_b)
    if verifier is not None and not verifier(out.set_a, out.set_b):
        return Failure(FailureReason.VERIFIER_REJECTED)
    return out


def brute_force_driver(
    v_rec: VaultRecord,
    w_rec: VaultRecord,
    omega_start: int,
    omega_floor: int,
    budget: int,
    rng: random.Random,
    verifier=None,
):
    """Iterate full_recovery over decreasing overlap hypotheses.

    Each hypothesis level gets a retry cap of roughly the inverse of its
    success-rate lower bound (the floor level absorbs whatever budget is
    left), so the walk spends effort where a success is plausible.  Levels
    whose guess count h reaches k switch to direct guessing: sample
    min(k, omega) candidates for the overlap plus per-record extras and
    try to open both records outright.

    Returns the first accepted FullRecoveryOutput or Exhausted(attempts).
    """
    if omega_start < omega_floor:
        raise VaultError("omega_start must be at least omega_floor")
    gf, v, w, k, swapped = _record_pair_context(v_rec, w_rec)
    t = poly.degree(v)
    s = poly.degree(w)
    attempts = 0
    for omega in range(omega_start, omega_floor - 1, -1):
        if attempts >= budget:
            break
        h = max(0, (t + k + 1) // 2 - omega)
        if h >= k:
            # direct-guessing fallback; cheaper than h >= k reductions
            nc = min(k, max(omega, 0))
            while attempts < budget:
                attempts += 1
                common = gf.rand_distinct(nc, rng)
                extra_a = gf.rand_distinct(k - nc, rng, exclude=common)
                extra_b = gf.rand_distinct(k - nc, rng, exclude=common)
                set_a = _open_with_points(gf, v, common + extra_a, rng)
                if set_a is None:
                    continue
                set_b = _open_with_points(gf, w, common + extra_b, rng)
                if set_b is None:
                    continue
                out = (
                    FullRecoveryOutput(set_b, set_a)
                    if swapped
                    else FullRecoveryOutput(set_a, set_b)
                )
                if verifier is not None and not verifier(out.set_a, out.set_b):
                    continue
                return out
            break
        rate = bounds.full_recovery_lower_bound(gf.q, t, s, k, omega)
        if omega > omega_floor:
            if rate.exact is None or rate.exact == 0:
                continue
            cap = min(budget - attempts, math.ceil(1 / rate.exact))
        else:
            cap = budget - attempts
        need = k - (t - omega)
        for _ in range(cap):
            attempts += 1
            res = full_recovery(v_rec, w_rec, omega, rng, verifier)
            if isinstance(res, FullRecoveryOutput):
                return res
            if h == 0 and res.reason in _PARTIAL_STAGE_REASONS:
                # nothing random happened before the failing stage, so
                # retrying this level cannot change the outcome
                break
            if h == 0 and need <= 0:
                break
    return Exhausted(attempts)


def single_record_attack(v_rec: VaultRecord, rng: random.Random, budget: int):
    """Baseline attack: guess k elements and try to open the record."""
    gf = v_rec.record_field()
    v = v_rec.as_polynomial()
    k = v_rec.k
    for _ in range(budget):
        pts = gf.rand_distinct(k, rng)
        got = _open_with_points(gf, v, pts, rng)
        if got is not None:
            return got
    return Exhausted(budget)


# ---------------------------------------------------------------------------
# oracles


DEFAULT_ORACLE_CAP = 1 << 40
_ORACLE_FIELD_LIMIT = 1 << 6


def _matching_sets_python(gf, upper, t, k):
    """All t-subsets of the field whose characteristic polynomial matches
    the given upper coefficients (indices k..t).  Depth-first with
    incremental products, so prefixes are shared."""
    q = gf.q
    out = []
    chi_stack = [[1]]
    chosen = []

    def walk(start):
        if len(chosen) == t:
            chi = chi_stack[-1]
            if chi[k:] == upper:
                out.append(tuple(chosen))
            return
        # not enough elements left to fill the set
        for x in range(start, q - (t - len(chosen)) + 1):
            chosen.append(x)
            chi_stack.append(poly.mul(gf, chi_stack[-1], [x, 1]))
            walk(x + 1)
            chi_stack.pop()
            chosen.pop()

    walk(0)
    return out


def _matching_sets(gf, upper, t, k):
    if _kernels.AVAILABLE and gf.m <= gf2m._TABLE_LIMIT:
        return _kernels.find_matching_sets(gf, upper, t, k)
    return _matching_sets_python(gf, upper, t, k)


def exhaustive_oracle(v_rec: VaultRecord, w_rec: VaultRecord, cap=DEFAULT_ORACLE_CAP):
    """Every feature-set pair consistent with both records.

    Enumerates all candidate sets per record and returns the cross
    product; only viable on small fields, guarded by a size cap on
    binom(q,t)*binom(q,s).
    """
    gf, v, w, k, swapped = _record_pair_context(v_rec, w_rec)
    t = poly.degree(v)
    s = poly.degree(w)
    if gf.q > _ORACLE_FIELD_LIMIT:
        raise CapExceeded("exhaustive enumeration needs q <= %d" % _ORACLE_FIELD_LIMIT)
    if math.comb(gf.q, t) * math.comb(gf.q, s) > cap:
        raise CapExceeded("enumeration space exceeds cap %d" % cap)
    match_a = _matching_sets(gf, v[k:], t, k)
    match_b = _matching_sets(gf, w[k:], s, k)
    if swapped:
        match_a, match_b = match_b, match_a
    return set(
        (frozenset(a), frozenset(b)) for a in match_a for b in match_b
    )


def _solve_gf_linear(gf, rows, rhs, n_unknowns):
    """Gauss-Jordan over the field; returns (particular, nullspace_basis)
    or None when inconsistent.  rows are dense coefficient lists."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(n_unknowns):
        piv = None
        for i in range(r, len(aug)):
            if aug[i][col]:
                piv = i
                break
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = gf.inv(aug[r][col])
        aug[r] = [gf.mul(inv, c) for c in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][col]:
                f = aug[i][col]
                aug[i] = [gf.add(a, gf.mul(f, b)) for a, b in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    for i in range(r, len(aug)):
        if aug[i][-1]:
            return None
    particular = [0] * n_unknowns
    for i, col in enumerate(pivots):
        particular[col] = aug[i][-1]
    free_cols = [c for c in range(n_unknowns) if c not in pivots]
    basis = []
    for fc in free_cols:
        vec = [0] * n_unknowns
        vec[fc] = 1
        for i, col in enumerate(pivots):
            vec[col] = aug[i][fc]
        basis.append(vec)
    return particular, basis


def anchored_oracle(
    v_rec: VaultRecord,
    w_rec: VaultRecord,
    output: PartialRecoveryOutput,
    cap=4096,
):
    """All real feature-set pairs that would produce the given output.

    Fixes the difference sets to the output's and solves for the shared
    overlap factor: a monic polynomial u of degree omega_star whose
    products with both difference characteristic polynomials match the
    records above index k.  Solutions that split into distinct roots
    disjoint from the difference sets yield (A, B) = (roots(u) + diff_a,
    roots(u) + diff_b).  Usable at field sizes far beyond the exhaustive
    oracle because the search collapses to a linear solve.
    """
    gf, v, w, k, swapped = _record_pair_context(v_rec, w_rec)
    da, db = output.diff_a, output.diff_b
    if swapped:
        da, db = db, da
    t = poly.degree(v)
    s = poly.degree(w)
    omega = output.omega_star
    if len(da) != t - omega or len(db) != s - omega:
        raise VaultError("output difference sets do not match record degrees")
    chi_a = poly.char_poly(gf, sorted(da))
    chi_b = poly.char_poly(gf, sorted(db))
    if omega == 0:
        candidates = [[]]
    else:
        rows = []
        rhs = []
        for chi, rec_poly, top in ((chi_a, v, t), (chi_b, w, s)):
            for i in range(k, top):
                row = [0] * omega
                for j in range(omega):
                    if 0 <= i - j < len(chi):
                        row[j] = chi[i - j]
                lead = chi[i - omega] if 0 <= i - omega < len(chi) else 0
                rows.append(row)
                rhs.append(gf.add(rec_poly[i], lead))
        solved = _solve_gf_linear(gf, rows, rhs, omega)
        if solved is None:
            return []
        particular, basis = solved
        if gf.q ** len(basis) > cap:
            raise CapExceeded("solution space exceeds cap %d" % cap)
        candidates = []
        stack = [particular]
        for vec in basis:
            nxt = []
            for base in stack:
                for c in range(gf.q):
                    nxt.append([gf.add(a, gf.mul(c, b)) for a, b in zip(base, vec)])
            stack = nxt
        candidates = stack
    blocked = da | db
    pairs = []
    for low in candidates:
        u = list(low) + [1]
        roots = poly.roots_if_splits(gf, u)
        if roots is None:
            continue
        if roots & blocked:
            continue
        set_a = frozenset(roots) | da
        set_b = frozenset(roots) | db
        if swapped:
            set_a, set_b = set_b, set_a
        pairs.append((set_a, set_b))
    return pairs
