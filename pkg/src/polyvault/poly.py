"""Dense polynomial arithmetic over GF(2^m).

Polynomials are Python lists of field elements in ascending order of degree
with no trailing zeros; the zero polynomial is the empty list.  The degree of
the zero polynomial is reported as ``NEG_INF`` so that degree comparisons
never have to special-case it (``NEG_INF < n`` for every int n, and
``NEG_INF + k == NEG_INF``).

The module provides the shared extended-Euclidean engine used both by
Reed-Solomon decoding (:func:`rs_decode`) and by the record-linkage attacks
in :mod:`polyvault.attack`: :func:`eea_steps` yields Bezout rows lazily and
:func:`traced_eea` materializes the full trace.
"""

from __future__ import annotations

import random
from typing import Iterator, NamedTuple

from polyvault.gf2m import GF2m

NEG_INF = float("-inf")

# fields with tables up to this order get deterministic exhaustive root
# extraction; larger fields use randomized splitting with trace polynomials
_SCAN_LIMIT = 1 << 16


def normalize(coeffs: list[int]) -> list[int]:
    """Strip trailing zeros (in place is avoided; returns a new list)."""
    n = len(coeffs)
    while n > 0 and coeffs[n - 1] == 0:
        n -= 1
    return list(coeffs[:n])


def degree(p: list[int]):
    """Degree of p, NEG_INF for the zero polynomial."""
    return len(p) - 1 if p else NEG_INF


def is_zero(p: list[int]) -> bool:
    return not p


def add(a: list[int], b: list[int]) -> list[int]:
    """Sum (== difference) of two polynomials; characteristic two."""
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] ^= c
    return normalize(out)

sub = add


def scale(gf: GF2m, p: list[int], c: int) -> list[int]:
    if c == 0:
        return []
    return normalize([gf.mul(x, c) for x in p])


def mul(gf: GF2m, a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    gmul = gf.mul
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] ^= gmul(x, y)
    return out  # leading product of leading terms is nonzero


def divmod_poly(gf: GF2m, a: list[int], b: list[int]) -> tuple[list[int], list[int]]:
    """Quotient and remainder of a by b; b must be nonzero."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], list(a)
    rem = list(a)
    db = len(b) - 1
    quot = [0] * (len(a) - db)
    inv_lead = gf.inv(b[-1])
    gmul = gf.mul
    for i in range(len(a) - db - 1, -1, -1):
        c = rem[i + db]
        if c == 0:
            continue
        c = gmul(c, inv_lead)
        quot[i] = c
        for j in range(db):
            if b[j]:
                rem[i + j] ^= gmul(c, b[j])
        rem[i + db] = 0
    return normalize(quot), normalize(rem)


def mod(gf: GF2m, a: list[int], b: list[int]) -> list[int]:
    return divmod_poly(gf, a, b)[1]


def evaluate(gf: GF2m, p: list[int], x: int) -> int:
    """Horner evaluation of p at x."""
    gf._check(x)
    acc = 0
    gmul = gf.mul
    for c in reversed(p):
        acc = gmul(acc, x) ^ c
    return acc


def monic(gf: GF2m, p: list[int]) -> list[int]:
    if not p:
        raise ValueError("the zero polynomial cannot be made monic")
    if p[-1] == 1:
        return list(p)
    return scale(gf, p, gf.inv(p[-1]))


def gcd(gf: GF2m, a: list[int], b: list[int]) -> list[int]:
    while b:
        a, b = b, mod(gf, a, b)
    return monic(gf, a) if a else []


def char_poly(gf: GF2m, elements) -> list[int]:
    """Monic polynomial with the given distinct elements as its root set.

    char_poly(emptyset) == 1.  Raises on repeated elements.
    """
    elems = list(elements)
    if len(set(elems)) != len(elems):
        raise ValueError("root set contains repeated elements")
    out = [1]
    gmul = gf.mul
    for a in elems:
        gf._check(a)
        # multiply by (X + a): shift up, add a * current
        out.append(1)
        for i in range(len(out) - 2, 0, -1):
            out[i] = out[i - 1] ^ (gmul(out[i], a) if out[i] else 0)
        out[0] = gmul(out[0], a) if out[0] else 0
    return out


def interpolate(gf: GF2m, points: list[tuple[int, int]]) -> list[int]:
    """Lagrange interpolation through (x, y) pairs with distinct x."""
    xs = [x for x, _ in points]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation abscissae must be distinct")
    master = char_poly(gf, xs)
    out: list[int] = []
    for x, y in points:
        if y == 0:
            continue
        num, rem = divmod_poly(gf, master, [x, 1])
        assert not rem
        denom = evaluate(gf, num, x)
        out = add(out, scale(gf, num, gf.div(y, denom)))
    return out


class EeaRow(NamedTuple):
    """One row of the extended Euclidean trace: r = p*V + q_cof*W."""

    index: int
    r: list[int]
    p: list[int]
    q_cof: list[int]


def eea_steps(gf: GF2m, v: list[int], w: list[int]) -> Iterator[EeaRow]:
    """Lazy extended Euclidean rows for (v, w), ending with the zero row.

    Row 0 is (v, 1, 0), row 1 is (w, 0, 1); each following row applies one
    division step to the two previous remainders.  Iteration stops after the
    first row whose remainder is zero (that row is yielded).
    """
    if not v and not w:
        raise ValueError("eea of two zero polynomials is undefined")
    r0, p0, q0 = list(v), [1], []
    r1, p1, q1 = list(w), [], [1]
    yield EeaRow(0, list(r0), list(p0), list(q0))
    yield EeaRow(1, list(r1), list(p1), list(q1))
    idx = 1
    while r1:
        quot, rem = divmod_poly(gf, r0, r1)
        r0, r1 = r1, rem
        p0, p1 = p1, add(p0, mul(gf, quot, p1))
        q0, q1 = q1, add(q0, mul(gf, quot, q1))
        idx += 1
        yield EeaRow(idx, list(r1), list(p1), list(q1))


def traced_eea(gf: GF2m, v: list[int], w: list[int]) -> list[EeaRow]:
    """Full extended Euclidean trace of (v, w), zero row included."""
    return list(eea_steps(gf, v, w))


# -- root extraction -------------------------------------------------------


def _frobenius_pow(gf: GF2m, p: list[int]) -> list[int]:
    """x^q mod p computed by m squarings of x."""
    r = [0, 1]
    for _ in range(gf.m):
        r = mod(gf, _square(gf, r), p)
    return r


def _square(gf: GF2m, p: list[int]) -> list[int]:
    # (sum c_i x^i)^2 == sum c_i^2 x^(2i) in characteristic two
    if not p:
        return []
    out = [0] * (2 * len(p) - 1)
    for i, c in enumerate(p):
        if c:
            out[2 * i] = gf.mul(c, c)
    return out


def splits_into_distinct_roots(gf: GF2m, p: list[int]) -> bool:
    """True iff p is a nonzero constant times a product of distinct (X + a)."""
    if not p:
        raise ValueError("the zero polynomial does not split")
    if len(p) == 1:
        return True
    # p has only simple roots in the field iff p divides x^q - x
    xq = _frobenius_pow(gf, p)
    return mod(gf, add(xq, [0, 1]), p) == []


def _trace_poly(gf: GF2m, a: int, p: list[int]) -> list[int]:
    """sum_{i<m} (a x)^(2^i) mod p, the absolute trace of a*x."""
    term = mod(gf, [0, a], p)
    total = term
    for _ in range(gf.m - 1):
        term = mod(gf, _square(gf, term), p)
        total = add(total, term)
    return total


def roots_if_splits(gf: GF2m, p: list[int], rng: random.Random | None = None) -> set[int] | None:
    """Root set of p if it splits into distinct linear factors, else None.

    For table-backed fields up to 2^16 the roots are found by evaluating p at
    every field element (deterministic).  Larger fields use the randomized
    trace-polynomial splitting; ``rng`` seeds that search and defaults to a
    fixed-seed local generator so the function stays reproducible.
    """
    if not p:
        raise ValueError("the zero polynomial does not split")
    if len(p) == 1:
        return set()
    p = monic(gf, p)
    if gf._log is not None and gf.q <= _SCAN_LIMIT:
        roots = _roots_by_scan(gf, p)
    else:
        roots = _roots_by_splitting(gf, p, rng or random.Random(0x5EED))
    if roots is None or len(roots) != len(p) - 1:
        return None
    return roots


def _roots_by_scan(gf: GF2m, p: list[int]) -> set[int]:
    from polyvault import _kernels

    if _kernels.AVAILABLE:
        return _kernels.poly_roots_scan(gf, p)
    return {x for x in range(gf.q) if evaluate(gf, p, x) == 0}


def _roots_by_splitting(gf: GF2m, p: list[int], rng: random.Random) -> set[int] | None:
    # distinct-linear-factor test: p divides x^q - x
    xq_minus_x = add(_frobenius_pow(gf, p), [0, 1])
    if mod(gf, xq_minus_x, p):
        return None
    roots: set[int] = set()
    stack = [p]
    while stack:
        f = stack.pop()
        d = len(f) - 1
        if d == 0:
            continue
        if d == 1:
            roots.add(f[0])  # monic x + c has the single root c
            continue
        while True:
            a = gf.rand_nonzero(rng)
            g = gcd(gf, f, _trace_poly(gf, a, f))
            if 0 < len(g) - 1 < d:
                stack.append(g)
                stack.append(divmod_poly(gf, f, g)[0])
                break
    return roots


# -- Reed-Solomon decoding -------------------------------------------------


def rs_decode(gf: GF2m, points: list[tuple[int, int]], k: int) -> list[int] | None:
    """Unique decoding of an interpolation instance.

    Returns the polynomial f with deg f < k passing through at least
    (n + k) / 2 of the n given points if one exists, else None.  Such an f is
    unique: two candidates would agree on at least k common points.

    The decoder runs the Euclidean trace of (prod (X - x_i), interpolant)
    until the remainder degree drops below (n + k) / 2 and divides out the
    cofactor; the final agreement count makes the boundary exact when n + k
    is odd.
    """
    n = len(points)
    xs = [x for x, _ in points]
    if len(set(xs)) != n:
        raise ValueError("decoding points must have distinct abscissae")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    g0 = char_poly(gf, xs)
    g1 = interpolate(gf, points)
    f: list[int] | None = None
    for row in eea_steps(gf, g0, g1):
        if row.index == 0:
            continue
        if 2 * (len(row.r) - 1 if row.r else -n - k) < n + k:
            if not row.q_cof:
                return None
            cand, rem = divmod_poly(gf, row.r, row.q_cof)
            if not rem and len(cand) <= k:
                f = cand
            break
    if f is None:
        return None
    agree = sum(1 for x, y in points if evaluate(gf, f, x) == y)
    return f if 2 * agree >= n + k else None
