"""Binary extension fields GF(2^m) for 2 <= m <= 24.

Field elements are plain Python ints in ``[0, 2^m)`` interpreted as
polynomials over GF(2) (bit i is the coefficient of x^i), reduced modulo a
fixed low-weight irreducible polynomial.  One modulus is pinned per degree so
that serialized records are portable between processes; every modulus is
re-verified to be irreducible when a context is built.

For m <= 16 the context carries discrete log / antilog tables built from the
smallest generator of the multiplicative group, which makes scalar products
two table lookups and lets the numba kernels in :mod:`polyvault._kernels`
share the same tables.  For 17 <= m <= 24 arithmetic falls back to shift-xor
reduction, which is slower but keeps the full supported range usable.
"""

from __future__ import annotations

import random

import numpy as np

# Fixed modulus per degree, lowest-weight irreducible with smallest
# representation.  Keyed by m; value is the bitmask of the polynomial
# including the leading term (e.g. 0x11B = x^8 + x^4 + x^3 + x + 1).
_IRREDUCIBLE: dict[int, int] = {
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11B,
    9: 0x203,
    10: 0x409,
    11: 0x805,
    12: 0x1009,
    13: 0x201B,
    14: 0x4021,
    15: 0x8003,
    16: 0x1002B,
    17: 0x20009,
    18: 0x40009,
    19: 0x80027,
    20: 0x100009,
    21: 0x200005,
    22: 0x400003,
    23: 0x800021,
    24: 0x100001B,
}

_TABLE_LIMIT = 16  # log/exp tables are built up to this extension degree

MIN_M = 2
MAX_M = 24


def _gf2x_degree(a: int) -> int:
    return a.bit_length() - 1


def _gf2x_mod(a: int, f: int) -> int:
    """Remainder of a modulo f in GF(2)[x] (bitmask representation)."""
    df = _gf2x_degree(f)
    while a.bit_length() - 1 >= df:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def _gf2x_mulmod(a: int, b: int, f: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a.bit_length() > _gf2x_degree(f):
            a ^= f << (a.bit_length() - 1 - _gf2x_degree(f))
    return _gf2x_mod(r, f)


def _gf2x_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _gf2x_mod(a, b)
    return a


def _gf2x_frobenius(e: int, f: int) -> int:
    """x^(2^e) mod f, by squaring x repeatedly."""
    r = 2  # the polynomial x
    for _ in range(e):
        r = _gf2x_mulmod(r, r, f)
    return r


def is_irreducible(f: int) -> bool:
    """Rabin test for irreducibility of f over GF(2)."""
    m = _gf2x_degree(f)
    if m < 1:
        return False
    if _gf2x_frobenius(m, f) != 2:
        return False
    for p in {d for d in range(2, m + 1) if m % d == 0 and _is_prime(d)}:
        if _gf2x_gcd(_gf2x_frobenius(m // p, f) ^ 2, f) != 1:
            return False
    return True


def _is_prime(n: int) -> bool:
    return n > 1 and all(n % d for d in range(2, int(n**0.5) + 1))


class GF2m:
    """Arithmetic context for GF(2^m).

    Parameters
    ----------
    m_bits : int
        Extension degree, 2 <= m_bits <= 24.
    modulus : int, optional
        Overrides the pinned modulus; must be an irreducible polynomial of
        degree m_bits over GF(2).
    """

    def __init__(self, m_bits: int, modulus: int | None = None):
        if not MIN_M <= m_bits <= MAX_M:
            raise ValueError(f"m_bits must be in [{MIN_M}, {MAX_M}], got {m_bits}")
        if modulus is None:
            modulus = _IRREDUCIBLE[m_bits]
        if _gf2x_degree(modulus) != m_bits:
            raise ValueError(f"modulus 0x{modulus:x} does not have degree {m_bits}")
        if not is_irreducible(modulus):
            raise ValueError(f"modulus 0x{modulus:x} is reducible")
        self.m = m_bits
        self.q = 1 << m_bits
        self.modulus = modulus
        self.hex_width = (m_bits + 3) // 4
        self.generator: int | None = None
        # numpy tables for the jitted kernels, list mirrors for scalar ops
        self.exp_np: np.ndarray | None = None
        self.log_np: np.ndarray | None = None
        self._exp: list[int] | None = None
        self._log: list[int] | None = None
        if m_bits <= _TABLE_LIMIT:
            self._build_tables()

    def _build_tables(self) -> None:
        q = self.q
        for g in range(2, q):
            exp = [0] * (2 * q)
            log = [0] * q
            v = 1
            ok = True
            for i in range(q - 1):
                if v == 1 and i > 0:  # order of g divides i < q-1
                    ok = False
                    break
                exp[i] = v
                log[v] = i
                v = self._mul_raw(v, g)
            if ok and v == 1:
                self.generator = g
                for i in range(q - 1, 2 * q):
                    exp[i] = exp[i - (q - 1)]
                self._exp = exp
                self._log = log
                self.exp_np = np.asarray(exp, dtype=np.int32)
                self.log_np = np.asarray(log, dtype=np.int32)
                return
        raise ValueError(f"no generator found for modulus 0x{self.modulus:x}")

    def _mul_raw(self, a: int, b: int) -> int:
        """Carry-less product reduced by the modulus, no table use."""
        r = 0
        top = self.q
        mod = self.modulus
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if a & top:
                a ^= mod
        return r

    def _check(self, v: int) -> int:
        if not 0 <= v < self.q:
            raise ValueError(f"value {v!r} outside GF(2^{self.m})")
        return v

    # -- scalar operations -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        """Field addition (== subtraction in characteristic two)."""
        return self._check(a) ^ self._check(b)

    sub = add

    def mul(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if a == 0 or b == 0:
            return 0
        if self._log is not None:
            return self._exp[self._log[a] + self._log[b]]
        return self._mul_raw(a, b)

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        if self._log is not None:
            return self._exp[self.q - 1 - self._log[a]]
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        self._check(a)
        if e < 0:
            a = self.inv(a)
            e = -e
        if a == 0:
            return 0 if e else 1
        if self._log is not None:
            return self._exp[(self._log[a] * e) % (self.q - 1)]
        r = 1
        while e:
            if e & 1:
                r = self._mul_raw(r, a)
            a = self._mul_raw(a, a)
            e >>= 1
        return r

    # -- sampling ----------------------------------------------------------

    def rand_element(self, rng: random.Random) -> int:
        return rng.randrange(self.q)

    def rand_nonzero(self, rng: random.Random) -> int:
        return rng.randrange(1, self.q)

    def rand_distinct(self, n: int, rng: random.Random, exclude=()) -> list[int]:
        """n distinct elements, uniform over the field minus ``exclude``."""
        excl = set(exclude)
        if n < 0 or n > self.q - len(excl):
            raise ValueError(f"cannot draw {n} distinct elements from GF(2^{self.m})")
        out: list[int] = []
        seen = set(excl)
        while len(out) < n:
            v = rng.randrange(self.q)
            if v not in seen:
                seen.add(v)
                out.append(v)
        return out

    # -- serialization -----------------------------------------------------

    def to_hex(self, v: int) -> str:
        self._check(v)
        return format(v, f"0{self.hex_width}x")

    def from_hex(self, s: str) -> int:
        if len(s) != self.hex_width or s.lower() != s:
            raise ValueError(f"expected {self.hex_width} lowercase hex digits, got {s!r}")
        v = int(s, 16)
        return self._check(v)

    # -- subfield support (used by blended vaults) --------------------------

    def subfield_order_ratio(self, sub: "GF2m") -> int:
        if self.m % sub.m != 0:
            raise ValueError(f"GF(2^{sub.m}) is not a subfield of GF(2^{self.m})")
        return (self.q - 1) // (sub.q - 1)

    def in_subfield(self, v: int, sub: "GF2m") -> bool:
        """Membership in the copy of GF(2^sub.m) inside this field.

        The subfield is exactly the fixed-point set of x -> x^(2^sub.m).
        """
        self._check(v)
        return self.pow(v, 1 << sub.m) == v

    def embed_from(self, sub: "GF2m", v: int) -> int:
        """Canonical injection of a subfield context element into this field.

        Maps the generator of the small multiplicative group onto the
        (q-1)/(q_sub-1)-th power of this field's generator, and 0 to 0.  The
        image is the fixed-point subfield of x -> x^(2^sub.m).
        """
        ratio = self.subfield_order_ratio(sub)
        if self._log is None or sub._log is None:
            raise ValueError("embedding requires table-backed contexts (m <= 16)")
        sub._check(v)
        if v == 0:
            return 0
        return self._exp[(ratio * sub._log[v]) % (self.q - 1)]

    def extract_to(self, sub: "GF2m", v: int) -> int:
        """Inverse of :meth:`embed_from`; raises if v is not in the image."""
        ratio = self.subfield_order_ratio(sub)
        if self._log is None or sub._log is None:
            raise ValueError("embedding requires table-backed contexts (m <= 16)")
        self._check(v)
        if v == 0:
            return 0
        lg = self._log[v]
        if lg % ratio != 0:
            raise ValueError(f"0x{v:x} is not in the embedded GF(2^{sub.m})")
        return sub._exp[lg // ratio]

    def __eq__(self, other) -> bool:
        return isinstance(other, GF2m) and (self.m, self.modulus) == (other.m, other.modulus)

    def __hash__(self) -> int:
        return hash((self.m, self.modulus))

    def __repr__(self) -> str:
        return f"GF2m(m={self.m}, modulus=0x{self.modulus:x})"


_CONTEXTS: dict[int, GF2m] = {}


def field(m_bits: int) -> GF2m:
    """Shared context with the pinned modulus for the given degree."""
    ctx = _CONTEXTS.get(m_bits)
    if ctx is None:
        ctx = _CONTEXTS[m_bits] = GF2m(m_bits)
    return ctx
