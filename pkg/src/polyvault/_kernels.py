"""Jitted inner loops for the attack and oracle hot paths.

Everything in here is an implementation detail: the public modules fall back
to their pure-Python reference paths when numba is unavailable or when a
field has no log/exp tables (m > 16).  Tests cross-validate the two paths on
random instances.

Polynomials cross the kernel boundary as int32 coefficient arrays in
ascending degree order.  All kernels take the field's log/antilog tables;
the antilog table is doubled so ``exp[log[a] + log[b]]`` never needs a
reduction.  Zero operands are always branched around since log[0] is
meaningless.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


# attack kernel status codes
OK = 0
NO_QUALIFYING_INDEX = 1
REMAINDER_TOO_LARGE = 2
FIRST_NOT_SPLITTING = 3
SECOND_NOT_SPLITTING = 4


@njit(cache=True)
def _rand_step(state):
    # splitmix64; state and result are uint64
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31)), state


@njit(cache=True)
def _deg(buf, upper):
    """Degree of the polynomial in buf scanning down from index upper; -1 if zero."""
    d = upper
    while d >= 0 and buf[d] == 0:
        d -= 1
    return d


@njit(cache=True)
def _sqr_mod(log, exp, a, da, p, dp, buf):
    """a := a^2 mod p for a of degree <= da < dp, p monic.  Returns new degree."""
    for i in range(2 * da + 1):
        buf[i] = 0
    for i in range(da + 1):
        c = a[i]
        if c:
            buf[2 * i] = exp[2 * log[c]]
    for i in range(2 * da, dp - 1, -1):
        c = buf[i]
        if c:
            buf[i] = 0
            lc = log[c]
            for j in range(dp):
                b = p[j]
                if b:
                    buf[i - dp + j] ^= exp[lc + log[b]]
    top = 2 * da if 2 * da < dp - 1 else dp - 1
    for i in range(dp):
        a[i] = buf[i] if i <= top else 0
    return _deg(a, dp - 1)


@njit(cache=True)
def _gcd_monic(log, exp, qm1, a, da, b, db, out):
    """Monic gcd of a (deg da) and b (deg db), written to out.  Returns degree."""
    # local copies so callers keep their buffers
    ra = a[: da + 1].copy()
    rb = b[: db + 1].copy()
    while db >= 0:
        # ra := ra mod rb
        il = exp[qm1 - log[rb[db]]]
        for i in range(da - db, -1, -1):
            c = ra[i + db]
            if c:
                cq = exp[log[c] + log[il]]
                lq = log[cq]
                for j in range(db):
                    t = rb[j]
                    if t:
                        ra[i + j] ^= exp[lq + log[t]]
                ra[i + db] = 0
        da2 = _deg(ra, db - 1)
        ra, rb = rb, ra
        da, db = db, da2
    il = exp[qm1 - log[ra[da]]]
    for i in range(da + 1):
        c = ra[i]
        out[i] = exp[log[c] + log[il]] if c else 0
    return da


@njit(cache=True)
def _roots_of_split(log, exp, qm1, m, f_in, d, seed, roots_out):
    """Roots of monic f (degree d >= 0) if it splits with distinct roots.

    Returns the number of roots found, or -1 if f does not divide x^q - x.
    Root extraction repeatedly splits factors with gcd(f, trace(c*x)) for
    random c; after too many fruitless draws it falls back to scanning the
    whole field, so termination never depends on luck.
    """
    q = qm1 + 1
    if d == 0:
        return 0
    if d == 1:
        roots_out[0] = f_in[0]
        return 1
    # x^q mod f must equal x
    a = np.zeros(d, np.int32)
    buf = np.zeros(2 * d + 2, np.int32)
    a[1] = 1
    da = 1
    for _ in range(m):
        da = _sqr_mod(log, exp, a, da, f_in, d, buf)
    if da != 1 or a[1] != 1 or a[0] != 0:
        return -1
    for i in range(2, d):
        if a[i]:
            return -1
    # iterative splitting over a stack of factor indices into `store`
    store = np.zeros((2 * d + 2, d + 1), np.int32)
    sdeg = np.zeros(2 * d + 2, np.int64)
    stack = np.zeros(2 * d + 2, np.int64)
    for i in range(d + 1):
        store[0, i] = f_in[i]
    sdeg[0] = d
    stack[0] = 0
    top = 0
    used = 1
    nroots = 0
    state = seed
    trace = np.zeros(d, np.int32)
    term = np.zeros(d, np.int32)
    g = np.zeros(d + 1, np.int32)
    while top >= 0:
        fi = stack[top]
        top -= 1
        df = sdeg[fi]
        f = store[fi]
        if df == 1:
            roots_out[nroots] = f[0]
            nroots += 1
            continue
        tries = 0
        while True:
            tries += 1
            if tries > 96:
                # deterministic fallback: scan the field for the roots of f
                for x in range(q):
                    acc = np.int32(0)
                    if x == 0:
                        acc = f[0]
                    else:
                        lx = log[x]
                        for j in range(df, -1, -1):
                            if acc:
                                acc = exp[log[acc] + lx] ^ f[j]
                            else:
                                acc = f[j]
                    if acc == 0:
                        roots_out[nroots] = x
                        nroots += 1
                break
            r, state = _rand_step(state)
            c = np.int64(r % np.uint64(qm1)) + 1
            # trace polynomial of c*x modulo f splits the root set by the
            # GF(2)-valued absolute trace of c times each root
            for i in range(df):
                trace[i] = 0
                term[i] = 0
            term[1] = np.int32(c)
            dt = 1
            trace[1] = term[1]
            for _ in range(m - 1):
                dt = _sqr_mod(log, exp, term, dt, f, df, buf)
                for i in range(dt + 1):
                    trace[i] ^= term[i]
            dtr = _deg(trace, df - 1)
            if dtr < 0:
                continue
            dg = _gcd_monic(log, exp, qm1, f, df, trace, dtr, g)
            if dg == 0 or dg == df:
                continue
            # f = g * h with g monic: divide and push both factors
            h = store[used]
            rem = f[: df + 1].copy()
            for i in range(df - dg, -1, -1):
                cc = rem[i + dg]
                h[i] = cc
                if cc:
                    lc = log[cc]
                    for j in range(dg):
                        b = g[j]
                        if b:
                            rem[i + j] ^= exp[lc + log[b]]
            sdeg[used] = df - dg
            for i in range(dg + 1):
                store[fi, i] = g[i]
            sdeg[fi] = dg
            top += 1
            stack[top] = fi
            top += 1
            stack[top] = used
            used += 1
            break
    return nroots


@njit(cache=True)
def attack_scan(log, exp, qm1, m, v, w, k, seed, roots_a, roots_b):
    """Record-linkage core attack on two monic coefficient vectors.

    v and w are full ascending coefficient arrays (monic, deg v >= deg w >= k).
    On success returns (0, omega_star, na, nb) with the difference-set roots
    written into roots_a / roots_b.  Failure statuses: 1 no qualifying
    Euclidean row, 2 the first record reduced by the located divisor leaves a
    remainder of degree >= k, 3/4 divisor or cofactor does not split.
    """
    tv = v.shape[0] - 1
    ts = w.shape[0] - 1
    # remainder pair and the second Bezout cofactor pair
    r_prev = v.astype(np.int32)
    r_cur = w.astype(np.int32)
    d_prev = tv
    d_cur = ts
    q_prev = np.zeros(tv + 2, np.int32)
    q_cur = np.zeros(tv + 2, np.int32)
    q_cur[0] = 1
    e_prev = -1
    e_cur = 0
    quot = np.zeros(tv + 1, np.int32)
    found = False
    while d_cur >= 0:
        # first row whose remainder degree drops below cofactor degree + k
        if d_cur < e_cur + k:
            found = True
            break
        # division step: r_prev mod r_cur, cofactor update
        dq = d_prev - d_cur
        for i in range(dq + 1):
            quot[i] = 0
        il = exp[qm1 - log[r_cur[d_cur]]]
        lil = log[il]
        for i in range(dq, -1, -1):
            c = r_prev[i + d_cur]
            if c:
                cq = exp[log[c] + lil]
                quot[i] = cq
                lq = log[cq]
                for j in range(d_cur):
                    b = r_cur[j]
                    if b:
                        r_prev[i + j] ^= exp[lq + log[b]]
                r_prev[i + d_cur] = 0
        d_new = _deg(r_prev, d_cur - 1)
        # q_prev ^= quot * q_cur
        for i in range(dq + 1):
            c = quot[i]
            if c:
                lc = log[c]
                for j in range(e_cur + 1):
                    b = q_cur[j]
                    if b:
                        q_prev[i + j] ^= exp[lc + log[b]]
        # cofactor degrees strictly increase, so the leading term never cancels
        e_new = dq + e_cur
        r_prev, r_cur = r_cur, r_prev
        d_prev, d_cur = d_cur, d_new
        q_prev, q_cur = q_cur, q_prev
        e_prev, e_cur = e_cur, e_new
    if not found:
        return NO_QUALIFYING_INDEX, 0, 0, 0
    dq0 = e_cur
    omega_star = tv - dq0
    # monic divisor from the located row
    qpoly = np.zeros(dq0 + 1, np.int32)
    il = exp[qm1 - log[q_cur[dq0]]]
    lil = log[il]
    for i in range(dq0 + 1):
        c = q_cur[i]
        qpoly[i] = exp[log[c] + lil] if c else 0
    # the first record must reduce to degree < k modulo the divisor
    if dq0 > 0:
        rem = v.astype(np.int32)
        for i in range(tv - dq0, -1, -1):
            c = rem[i + dq0]
            if c:
                lc = log[c]
                for j in range(dq0):
                    b = qpoly[j]
                    if b:
                        rem[i + j] ^= exp[lc + log[b]]
                rem[i + dq0] = 0
        if _deg(rem, dq0 - 1) >= k:
            return REMAINDER_TOO_LARGE, omega_star, 0, 0
    # reconstruct the first cofactor: p = (r + q_cof * w) / v
    nu = dq0 + ts + 1
    u = np.zeros(nu, np.int32)
    for i in range(dq0 + 1):
        c = q_cur[i]
        if c:
            lc = log[c]
            for j in range(ts + 1):
                b = w[j]
                if b:
                    u[i + j] ^= exp[lc + log[b]]
    for i in range(d_cur + 1):
        u[i] ^= r_cur[i]
    dp0 = dq0 + ts - tv
    ppoly = np.zeros(dp0 + 1, np.int32)
    for i in range(dp0, -1, -1):
        c = u[i + tv]
        if c:
            ppoly[i] = c
            lc = log[c]
            for j in range(tv):
                b = v[j]
                if b:
                    u[i + j] ^= exp[lc + log[b]]
            u[i + tv] = 0
    il = exp[qm1 - log[ppoly[dp0]]]
    lil = log[il]
    for i in range(dp0 + 1):
        c = ppoly[i]
        ppoly[i] = exp[log[c] + lil] if c else 0
    # difference sets are the root sets of the two monic factors
    na = _roots_of_split(log, exp, qm1, m, qpoly, dq0, seed, roots_a)
    if na != dq0:
        return FIRST_NOT_SPLITTING, omega_star, 0, 0
    nb = _roots_of_split(log, exp, qm1, m, ppoly, dp0, seed ^ np.uint64(0xA5A5A5A5), roots_b)
    if nb != dp0:
        return SECOND_NOT_SPLITTING, omega_star, na, 0
    return OK, omega_star, na, nb


@njit(cache=True)
def char_from_elems(log, exp, elems, out):
    """Monic polynomial with the given distinct elements as roots."""
    n = elems.shape[0]
    out[0] = 1
    for i in range(1, n + 1):
        out[i] = 0
    for idx in range(n):
        a = elems[idx]
        out[idx + 1] = 1
        if a:
            la = log[a]
            for i in range(idx, 0, -1):
                c = out[i]
                out[i] = out[i - 1] ^ (exp[la + log[c]] if c else 0)
            c = out[0]
            out[0] = exp[la + log[c]] if c else 0
        else:
            for i in range(idx, 0, -1):
                out[i] = out[i - 1]
            out[0] = 0


@njit(cache=True)
def roots_scan(log, exp, q, coeffs, roots_out):
    """All roots of coeffs by evaluating at every field element."""
    n = coeffs.shape[0]
    cnt = 0
    for x in range(q):
        acc = np.int32(0)
        if x == 0:
            acc = coeffs[0]
        else:
            lx = log[x]
            for j in range(n - 1, -1, -1):
                if acc:
                    acc = exp[log[acc] + lx] ^ coeffs[j]
                else:
                    acc = coeffs[j]
        if acc == 0:
            roots_out[cnt] = x
            cnt += 1
    return cnt


@njit(cache=True)
def set_enum_matches(log, exp, q, t, k, upper, out_sets):
    """All t-subsets of the field whose root polynomial matches coefficients
    k..t-1 (``upper``); the leading coefficient is implicitly 1.

    Enumerates subsets in lexicographic order, sharing prefix products.
    Returns the match count or -1 if out_sets overflows.
    """
    prefix = np.zeros((t + 1, t + 1), np.int32)
    prefix[0, 0] = 1
    choice = np.zeros(t, np.int64)
    count = 0
    pos = 0
    nxt = 0
    while pos >= 0:
        if nxt > q - (t - pos):
            pos -= 1
            if pos >= 0:
                nxt = choice[pos] + 1
            continue
        choice[pos] = nxt
        row = prefix[pos]
        nrow = prefix[pos + 1]
        # nrow = row * (X + nxt)
        nrow[pos + 1] = 1
        if nxt:
            ln = log[nxt]
            for i in range(pos, 0, -1):
                c = row[i]
                nrow[i] = row[i - 1] ^ (exp[ln + log[c]] if c else 0)
            c = row[0]
            nrow[0] = exp[ln + log[c]] if c else 0
        else:
            for i in range(pos, 0, -1):
                nrow[i] = row[i - 1]
            nrow[0] = 0
        if pos == t - 1:
            match = True
            for i in range(k, t):
                if prefix[t][i] != upper[i - k]:
                    match = False
                    break
            if match:
                if count >= out_sets.shape[0]:
                    return -1
                for i in range(t):
                    out_sets[count, i] = choice[i]
                count += 1
            nxt += 1
        else:
            pos += 1
            nxt = choice[pos - 1] + 1
    return count


@njit(cache=True)
def low_enum_matches(log, exp, q, t, k, upper, out_sets):
    """Same output as set_enum_matches but enumerating the q^k free low
    coefficients and keeping completions that split with t distinct roots."""
    poly = np.zeros(t + 1, np.int32)
    poly[t] = 1
    for i in range(t - k):
        poly[k + i] = upper[i]
    low = np.zeros(k, np.int64)
    roots = np.zeros(t, np.int64)
    count = 0
    total = 1
    for _ in range(k):
        total *= q
    for _ in range(total):
        for i in range(k):
            poly[i] = low[i]
        nr = 0
        for x in range(q):
            acc = np.int32(0)
            if x == 0:
                acc = poly[0]
            else:
                lx = log[x]
                for j in range(t, -1, -1):
                    if acc:
                        acc = exp[log[acc] + lx] ^ poly[j]
                    else:
                        acc = poly[j]
            if acc == 0:
                if nr < t:
                    roots[nr] = x
                nr += 1
        if nr == t:
            if count >= out_sets.shape[0]:
                return -1
            for i in range(t):
                out_sets[count, i] = roots[i]
            count += 1
        for i in range(k):
            low[i] += 1
            if low[i] < q:
                break
            low[i] = 0
    return count


# -- python-side wrappers ----------------------------------------------------


def poly_roots_scan(gf, coeffs: list[int]) -> set[int]:
    out = np.empty(len(coeffs), np.int32)
    n = roots_scan(gf.log_np, gf.exp_np, gf.q, np.asarray(coeffs, np.int32), out)
    return {int(x) for x in out[:n]}


def run_attack(gf, v: list[int], w: list[int], k: int, seed: int):
    """Kernel attack wrapper; returns (status, omega_star, roots_a, roots_b)."""
    tv = len(v) - 1
    roots_a = np.empty(tv + 1, np.int32)
    roots_b = np.empty(tv + 1, np.int32)
    status, omega_star, na, nb = attack_scan(
        gf.log_np,
        gf.exp_np,
        gf.q - 1,
        gf.m,
        np.asarray(v, np.int32),
        np.asarray(w, np.int32),
        k,
        np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
        roots_a,
        roots_b,
    )
    if status == SECOND_NOT_SPLITTING:
        return status, int(omega_star), frozenset(int(x) for x in roots_a[:na]), None
    if status != OK:
        return status, int(omega_star), None, None
    a = frozenset(int(x) for x in roots_a[:na])
    b = frozenset(int(x) for x in roots_b[:nb])
    return status, int(omega_star), a, b


def char_poly_arr(gf, elems) -> np.ndarray:
    e = np.asarray(list(elems), np.int32)
    out = np.empty(len(e) + 1, np.int32)
    char_from_elems(gf.log_np, gf.exp_np, e, out)
    return out


def _enum_with_growing_buffer(kernel, gf, upper, t, k):
    if len(upper) != t - k + 1 or upper[-1] != 1:
        raise ValueError("upper slice must cover indices k..t with leading 1")
    body = np.asarray(upper[:-1], np.int32)
    cap = 64
    while True:
        out = np.zeros((cap, max(t, 1)), np.int64)
        n = kernel(gf.log_np, gf.exp_np, gf.q, t, k, body, out)
        if n >= 0:
            return [tuple(int(x) for x in out[i, :t]) for i in range(n)]
        cap *= 4


def find_matching_sets(gf, upper, t, k):
    """All t-subsets of the field whose root polynomial has the given
    lead-inclusive upper coefficient slice (indices k..t)."""
    return _enum_with_growing_buffer(set_enum_matches, gf, upper, t, k)


def find_matching_sets_by_low(gf, upper, t, k):
    """Same result by enumerating the q^k low completions; cross-check path."""
    return _enum_with_growing_buffer(low_enum_matches, gf, upper, t, k)


def warmup(gf) -> None:
    """Force compilation of all kernels with this field's table types."""
    run_attack(gf, [0, 1, 1, 0, 1], [1, 1, 0, 1], 1, 7)
    char_poly_arr(gf, [1, 2])
    poly_roots_scan(gf, [1, 1])
    find_matching_sets(gf, [0, 1], 1, 0)
    find_matching_sets_by_low(gf, [0, 1], 1, 0)
