"""Improved fuzzy vault records: enrollment, unlocking, serialization.

A record binds a secret polynomial of degree below k to a feature set A of
size t by publishing the single polynomial V = f + char_poly(A), monic of
degree t.  Presenting a set B with |A cap B| >= (|B| + k) / 2 recovers f
(and A) through Reed-Solomon style decoding; the record itself reveals the
upper coefficients of char_poly(A) and nothing else about the low part.

Three variants:

* probabilistic: f drawn uniformly at random, full coefficient vector kept.
* deterministic: the low k coefficients are simply dropped instead of
  masked.  No secret is bound; unlocking returns the feature set only.
* blended: features are embedded into an extension field and the
  characteristic polynomial is multiplied by that of a random blending set
  drawn outside the embedded subfield before the secret is added.  The
  record degree grows by the blending set size, which is what frustrates
  cross-record linkage.

Records are immutable; every operation takes explicit RNG state where
randomness is involved.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from . import gf2m, poly

VARIANTS = ("probabilistic", "deterministic", "blended")

_FEISTEL_ROUNDS = 4
_MASK64 = (1 << 64) - 1


class VaultError(ValueError):
    """Parameter or schema violation in vault handling."""


@dataclass(frozen=True)
class VaultRecord:
    """One enrolled vault.

    coeffs holds ascending coefficients.  For the probabilistic and blended
    variants that is the full vector including the leading 1; for the
    deterministic variant only indices k..t-1 are stored and the monic
    leading term is implicit.
    """

    variant: str
    m_bits: int
    t: int
    k: int
    coeffs: tuple
    ext_m_bits: int | None = None
    blend_size: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise VaultError("unknown variant %r" % (self.variant,))
        if not 1 <= self.k <= self.t:
            raise VaultError("need 1 <= k <= t, got k=%d t=%d" % (self.k, self.t))
        gf = self.field()
        if self.t > gf.q:
            raise VaultError("feature set size %d exceeds field size" % self.t)
        n = len(self.coeffs)
        if self.variant == "probabilistic":
            if n != self.t + 1 or self.coeffs[-1] != 1:
                raise VaultError("probabilistic record must be monic of degree t")
            if self.ext_m_bits is not None or self.blend_size:
                raise VaultError("extension parameters are blended-only")
        elif self.variant == "deterministic":
            if n != self.t - self.k:
                raise VaultError(
                    "deterministic record stores exactly t-k coefficients, got %d" % n
                )
            if self.ext_m_bits is not None or self.blend_size:
                raise VaultError("extension parameters are blended-only")
        else:
            if self.ext_m_bits is None or self.ext_m_bits % self.m_bits != 0:
                raise VaultError("blended record needs ext_m_bits, a multiple of m_bits")
            if self.blend_size < 0:
                raise VaultError("blend_size must be non-negative")
            if n != self.t + self.blend_size + 1 or self.coeffs[-1] != 1:
                raise VaultError("blended record must be monic of degree t+blend_size")
        for c in self.coeffs:
            self.record_field()._check(c)

    def field(self) -> gf2m.GF2m:
        """Base field the feature elements live in."""
        return gf2m.field(self.m_bits)

    def record_field(self) -> gf2m.GF2m:
        """Field the stored coefficients live in (extension for blended)."""
        if self.variant == "blended":
            return gf2m.field(self.ext_m_bits)
        return gf2m.field(self.m_bits)

    @property
    def degree(self) -> int:
        """Degree of the record polynomial."""
        if self.variant == "blended":
            return self.t + self.blend_size
        return self.t

    def as_polynomial(self) -> list:
        """Canonical dense polynomial for decoding and attacks.

        Deterministic records canonicalize with zero low coefficients; the
        choice of low part is immaterial to anything that only consumes
        coefficients of index >= k.
        """
        if self.variant == "deterministic":
            return [0] * self.k + list(self.coeffs) + [1]
        return list(self.coeffs)

    def upper_coeffs(self) -> list:
        """Coefficient slice of indices k..degree, leading 1 included."""
        return self.as_polynomial()[self.k :]


def _check_feature_set(gf, points) -> list:
    pts = sorted(points)
    for v in pts:
        gf._check(v)
    if len(set(pts)) != len(pts):
        raise VaultError("feature set elements must be distinct")
    return pts


def _draw_secret(gf, k, rng) -> list:
    # uniform over all polynomials of degree < k
    return poly.normalize([gf.rand_element(rng) for _ in range(k)])


def enroll_probabilistic(gf, points, k, rng, secret=None):
    """Enroll a feature set; returns (record, secret_coeffs).

    The secret may be injected (ascending coefficients, degree < k) for
    reproducible experiments; otherwise it is drawn uniformly from rng.
    """
    pts = _check_feature_set(gf, points)
    t = len(pts)
    if not 1 <= k <= t:
        raise VaultError("need 1 <= k <= |A|, got k=%d |A|=%d" % (k, t))
    if secret is None:
        secret = _draw_secret(gf, k, rng)
    else:
        secret = poly.normalize(list(secret))
        if poly.degree(secret) >= k:
            raise VaultError("secret degree must be below k")
    v = poly.add(poly.char_poly(gf, pts), secret)
    rec = VaultRecord("probabilistic", gf.m, t, k, tuple(v))
    return rec, secret


def enroll_deterministic(gf, points, k) -> VaultRecord:
    """Enroll by dropping the low k coefficients of char_poly(A)."""
    pts = _check_feature_set(gf, points)
    t = len(pts)
    if not 1 <= k <= t:
        raise VaultError("need 1 <= k <= |A|, got k=%d |A|=%d" % (k, t))
    chi = poly.char_poly(gf, pts)
    return VaultRecord("deterministic", gf.m, t, k, tuple(chi[k:t]))


def enroll_blended(gf, points, k, blend_size, ext_factor, rng, secret=None, blend=None):
    """Enroll into GF(2^(m*ext_factor)) with a random blending set.

    The feature set is carried into the extension field through the
    multiplicative embedding; blend_size extra roots are drawn uniformly
    from the non-subfield part of the extension (so they can never collide
    with embedded features) and multiplied in.  A caller may supply the
    blending set explicitly via blend.  Returns (record, secret).
    """
    if ext_factor < 2:
        raise VaultError("ext_factor must be at least 2")
    ext_m = gf.m * ext_factor
    if ext_m > gf2m._TABLE_LIMIT:
        raise VaultError(
            "blended records need log tables in the extension field "
            "(m*ext_factor <= %d)" % gf2m._TABLE_LIMIT
        )
    pts = _check_feature_set(gf, points)
    t = len(pts)
    if not 1 <= k <= t:
        raise VaultError("need 1 <= k <= |A|, got k=%d |A|=%d" % (k, t))
    ext = gf2m.field(ext_m)
    embedded = [ext.embed_from(gf, a) for a in pts]
    if blend is not None:
        blend = set(blend)
        if len(blend) != blend_size:
            raise VaultError("blend must contain blend_size distinct elements")
        for x in blend:
            ext._check(x)
            if ext.in_subfield(x, gf):
                raise VaultError("blend elements must lie outside the base subfield")
    else:
        blend = set()
        while len(blend) < blend_size:
            x = ext.rand_element(rng)
            if not ext.in_subfield(x, gf):
                blend.add(x)
    if secret is None:
        secret = _draw_secret(ext, k, rng)
    else:
        secret = poly.normalize(list(secret))
        if poly.degree(secret) >= k:
            raise VaultError("secret degree must be below k")
    chi = poly.char_poly(ext, embedded + sorted(blend))
    v = poly.add(chi, secret)
    rec = VaultRecord(
        "blended", gf.m, t, k, tuple(v), ext_m_bits=ext_m, blend_size=blend_size
    )
    return rec, secret


def unlock(record: VaultRecord, points):
    """Open a record with a candidate feature set.

    Returns (secret, features) on success and None on failure.  Succeeds
    when the candidate shares at least (|B| + k) / 2 elements with the
    enrolled set.  The deterministic variant binds no secret, so its first
    component is always None; the blended variant returns base-field
    features with the blending roots filtered out.
    """
    gf = record.field()
    pts = _check_feature_set(gf, points)
    if len(pts) < record.k:
        raise VaultError("need at least k candidate elements to attempt unlock")
    rf = record.record_field()
    if record.variant == "blended":
        xs = [rf.embed_from(gf, b) for b in pts]
    else:
        xs = pts
    vpoly = record.as_polynomial()
    pairs = [(x, poly.evaluate(rf, vpoly, x)) for x in xs]
    f = poly.rs_decode(rf, pairs, record.k)
    if f is None:
        return None
    chi = poly.add(vpoly, f)
    roots = poly.roots_if_splits(rf, chi)
    if roots is None:
        return None
    if record.variant == "probabilistic":
        return f, frozenset(roots)
    if record.variant == "deterministic":
        # f only cancels the canonical low part, not an enrolled secret
        return None, frozenset(roots)
    feats = [rf.extract_to(gf, r) for r in roots if rf.in_subfield(r, gf)]
    if len(feats) != record.t:
        return None
    return f, frozenset(feats)


class RandomEncoding:
    """Keyed bijection on [0, q), used to re-randomize feature encodings.

    A balanced Feistel network over a power-of-two superset of the field,
    cycle-walked back into [0, q).  Seed 0 is reserved for the identity
    map, so "no encoding" round-trips through serialization.
    """

    def __init__(self, gf, seed: int):
        self.gf = gf
        self.seed = seed & _MASK64
        self.half_bits = (gf.m + 1) // 2
        self._half_mask = (1 << self.half_bits) - 1
        # per-round keys from a splitmix64 stream
        keys = []
        x = self.seed
        for _ in range(_FEISTEL_ROUNDS):
            x = (x + 0x9E3779B97F4A7C15) & _MASK64
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
            keys.append(z ^ (z >> 31))
        self._keys = keys

    def _round(self, r: int, key: int) -> int:
        z = (r * 0x9E3779B97F4A7C15 + key) & _MASK64
        z = ((z ^ (z >> 29)) * 0xBF58476D1CE4E5B9) & _MASK64
        return (z ^ (z >> 32)) & self._half_mask

    def _feistel(self, x: int, inverse: bool) -> int:
        h = self.half_bits
        left, right = x >> h, x & self._half_mask
        if inverse:
            for key in reversed(self._keys):
                left, right = right ^ self._round(left, key), left
        else:
            for key in self._keys:
                left, right = right, left ^ self._round(right, key)
        return (left << h) | right

    def encode(self, v: int) -> int:
        self.gf._check(v)
        if self.seed == 0:
            return v
        q = self.gf.q
        y = self._feistel(v, False)
        while y >= q:
            y = self._feistel(y, False)
        return y

    def decode(self, v: int) -> int:
        self.gf._check(v)
        if self.seed == 0:
            return v
        q = self.gf.q
        y = self._feistel(v, True)
        while y >= q:
            y = self._feistel(y, True)
        return y

    def apply(self, points) -> frozenset:
        out = frozenset(self.encode(v) for v in points)
        return out


def new_encoding(gf, seed: int) -> RandomEncoding:
    return RandomEncoding(gf, seed)


def apply_encoding(points, enc: RandomEncoding) -> frozenset:
    return enc.apply(points)


def serialize(record: VaultRecord) -> str:
    """JSON text for a record; hex coefficients, ascending order."""
    rf = record.record_field()
    doc = {"variant": record.variant, "m_bits": record.m_bits}
    if record.variant == "blended":
        doc["ext_m_bits"] = record.ext_m_bits
    doc["t"] = record.t
    doc["k"] = record.k
    if record.variant == "blended":
        doc["blend_size"] = record.blend_size
    doc["coeffs"] = [rf.to_hex(c) for c in record.coeffs]
    return json.dumps(doc)


def deserialize(text: str) -> VaultRecord:
    """Parse a record, reporting malformed input with positions."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise VaultError(
            "invalid JSON at line %d column %d: %s" % (e.lineno, e.colno, e.msg)
        ) from None
    if not isinstance(doc, dict):
        raise VaultError("record must be a JSON object")
    for key in ("variant", "m_bits", "t", "k", "coeffs"):
        if key not in doc:
            raise VaultError("missing record key %r" % key)
    variant = doc["variant"]
    if variant not in VARIANTS:
        raise VaultError("unknown variant %r" % (variant,))
    for key in ("m_bits", "t", "k"):
        if not isinstance(doc[key], int):
            raise VaultError("record key %r must be an integer" % key)
    ext_m = doc.get("ext_m_bits")
    blend = doc.get("blend_size", 0)
    if variant == "blended":
        if not isinstance(ext_m, int) or not isinstance(blend, int):
            raise VaultError("blended record needs integer ext_m_bits and blend_size")
        rf = gf2m.field(ext_m)
    else:
        if ext_m is not None or blend:
            raise VaultError("extension parameters are blended-only")
        rf = gf2m.field(doc["m_bits"])
    if not isinstance(doc["coeffs"], list):
        raise VaultError("coeffs must be a list of hex strings")
    coeffs = []
    for i, s in enumerate(doc["coeffs"]):
        if not isinstance(s, str):
            raise VaultError("coefficient %d is not a string" % i)
        try:
            coeffs.append(rf.from_hex(s))
        except ValueError as e:
            raise VaultError("coefficient %d: %s" % (i, e)) from None
    try:
        return VaultRecord(
            variant,
            doc["m_bits"],
            doc["t"],
            doc["k"],
            tuple(coeffs),
            ext_m_bits=ext_m,
            blend_size=blend,
        )
    except VaultError:
        raise
    except ValueError as e:
        raise VaultError(str(e)) from None
