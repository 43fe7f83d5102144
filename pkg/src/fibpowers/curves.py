"""Elliptic curves over prime fields and the fixed curve catalog.

Traces of Frobenius are computed by summing the quadratic character of the
right-hand side after completing the square, which costs O(l) and is
vectorised with numpy.  For l below ``TABLE_LIMIT`` a cached table of
quadratic residues is used; above it the character is evaluated by Euler's
criterion in chunks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import gmpy2
import numpy as np

from .seqcore import DomainError, fib_lucas_mod, h_n_mod

TABLE_LIMIT = 1 << 22
_CHUNK = 1 << 20


class SingularCurveError(DomainError):
    """The Weierstrass model is singular modulo l."""


def b_invariants(a1: int, a2: int, a3: int, a4: int, a6: int):
    b2 = a1 * a1 + 4 * a2
    b4 = a1 * a3 + 2 * a4
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def c_invariants(a1, a2, a3, a4, a6):
    b2, b4, b6, b8 = b_invariants(a1, a2, a3, a4, a6)
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    return c4, c6


def discriminant(a1, a2, a3, a4, a6) -> int:
    b2, b4, b6, b8 = b_invariants(a1, a2, a3, a4, a6)
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@dataclass(frozen=True)
class CurveModL:
    l: int
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        if self.l < 3 or not gmpy2.is_prime(self.l):
            raise DomainError(f"l = {self.l} must be an odd prime")
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, getattr(self, name) % self.l)
        if discriminant(*self.coeffs) % self.l == 0:
            raise SingularCurveError(f"singular model modulo {self.l}: {self.coeffs}")

    @property
    def coeffs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)


@dataclass(frozen=True)
class TraceResult:
    a_l: int
    point_count: int


@lru_cache(maxsize=64)
def _qr_table(l: int) -> np.ndarray:
    """chi[v] for 0 <= v < l as int8."""
    x = np.arange(l, dtype=np.int64)
    chi = np.full(l, -1, dtype=np.int8)
    chi[(x * x) % l] = 1
    chi[0] = 0
    return chi


def _powmod_vec(base: np.ndarray, e: int, l: int) -> np.ndarray:
    result = np.ones_like(base)
    b = base % l
    while e:
        if e & 1:
            result = result * b % l
        b = b * b % l
        e >>= 1
    return result


def _char_sum(c3: int, c2: int, c1: int, c0: int, l: int) -> int:
    """Sum over x in F_l of chi(c3 x^3 + c2 x^2 + c1 x + c0)."""
    if l < TABLE_LIMIT:
        chi = _qr_table(l)
        x = np.arange(l, dtype=np.int64)
        v = (((c3 * x + c2) % l * x + c1) % l * x + c0) % l
        return int(chi[v].sum(dtype=np.int64))
    if l >= 3037000499:
        raise DomainError("l too large for the vectorised character sum")
    total = 0
    e = (l - 1) // 2
    for start in range(0, l, _CHUNK):
        x = np.arange(start, min(l, start + _CHUNK), dtype=np.int64)
        v = (((c3 * x + c2) % l * x + c1) % l * x + c0) % l
        r = _powmod_vec(v, e, l)
        total += int(np.count_nonzero(r == 1)) - int(np.count_nonzero(r == l - 1))
    return total


def _reduced_cubic(coeffs, l):
    # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    b2, b4, b6, _ = b_invariants(*coeffs)
    return 4 % l, b2 % l, (2 * b4) % l, b6 % l


def trace_of_frobenius(curve: CurveModL) -> TraceResult:
    """a_l and #E(F_l) by a character sum."""
    l = curve.l
    s = _char_sum(*_reduced_cubic(curve.coeffs, l), l)
    a = -s
    return TraceResult(a, l + 1 - a)


def trace_raw(a2: int, a4: int, a6: int, l: int) -> int:
    """Naive trace -sum chi(x^3 + a2 x^2 + a4 x + a6) with no singularity check.

    For a singular cubic this is the "trace" of the nodal or cuspidal curve
    (+-1 or 0); callers in hot loops use it after checking the discriminant.
    """
    return -_char_sum(1, a2 % l, a4 % l, a6 % l, l)


def trace_naive(curve: CurveModL) -> int:
    """Two-loop point enumeration; only intended as a test oracle."""
    l = curve.l
    a1, a2, a3, a4, a6 = curve.coeffs
    count = 1
    for x in range(l):
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % l
        for y in range(l):
            if (y * y + a1 * x * y + a3 * y - rhs) % l == 0:
                count += 1
    return l + 1 - count


def legendre(a: int, l: int) -> int:
    """Jacobi-symbol path for the quadratic character, for any odd prime l."""
    return int(gmpy2.legendre(a % l, l))


def legendre_euler(a: int, l: int) -> int:
    r = pow(a % l, (l - 1) // 2, l)
    return -1 if r == l - 1 else r


# ---------------------------------------------------------------------------
# Frey curves

@dataclass(frozen=True)
class FreyReduction:
    """Reduction of a Frey curve modulo l; ``singular`` marks bad reduction."""
    l: int
    coeffs: tuple[int, int, int, int, int]
    singular: bool

    @property
    def curve(self) -> CurveModL:
        if self.singular:
            raise SingularCurveError(f"Frey curve is singular modulo {self.l}")
        return CurveModL(self.l, *self.coeffs)


def frey_fib_from_h(h: int, l: int) -> FreyReduction:
    """Y^2 = X^3 + h X^2 - X over F_l; singular iff h^2 + 4 = 0 mod l."""
    h %= l
    coeffs = (0, h, 0, (-1) % l, 0)
    return FreyReduction(l, coeffs, (h * h + 4) % l == 0)


def frey_fib(n: int, l: int) -> FreyReduction:
    return frey_fib_from_h(h_n_mod(n, l), l)


def frey_lucas_from_f(f: int, l: int) -> FreyReduction:
    """Y^2 = X^3 - 5 f X^2 + 5 X over F_l; singular iff 5 f^2 - 4 = 0 mod l."""
    f %= l
    coeffs = (0, (-5 * f) % l, 0, 5 % l, 0)
    return FreyReduction(l, coeffs, (5 * f * f - 4) % l == 0)


def frey_lucas(n: int, l: int) -> FreyReduction:
    return frey_lucas_from_f(fib_lucas_mod(n, l).f, l)


# ---------------------------------------------------------------------------
# Catalog

@dataclass(frozen=True)
class CatalogCurve:
    label: str
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    provenance: str = ""

    @property
    def coeffs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def discriminant(self) -> int:
        return discriminant(*self.coeffs)

    def reduce(self, l: int) -> CurveModL:
        return CurveModL(l, *self.coeffs)

    def a_l(self, l: int) -> int:
        return trace_of_frobenius(self.reduce(l)).a_l

    def conductor(self) -> int:
        return conductor(self.coeffs)

    def to_json(self) -> dict:
        return {"label": self.label, "a1": self.a1, "a2": self.a2, "a3": self.a3,
                "a4": self.a4, "a6": self.a6, "provenance": self.provenance}


def j_invariant(curve: "CatalogCurve | tuple") -> Fraction:
    coeffs = curve.coeffs if isinstance(curve, CatalogCurve) else tuple(curve)
    d = discriminant(*coeffs)
    if d == 0:
        raise SingularCurveError(f"singular model {coeffs}")
    c4, _ = c_invariants(*coeffs)
    return Fraction(c4 ** 3, d)


def _validate(c: CatalogCurve) -> None:
    d = c.discriminant()
    if d == 0:
        raise SingularCurveError(f"catalog curve {c.label} is singular")
    checked = 0
    l = 3
    while checked < 20:
        if d % l:
            a = c.a_l(l)
            if a * a > 4 * l:
                raise ValueError(f"Hasse bound fails for {c.label} at {l}")
            checked += 1
        l = int(gmpy2.next_prime(l))


def load_catalog(path=None) -> dict[str, CatalogCurve]:
    """Read a JSON array of curves keyed by label, validating each entry."""
    if path is None:
        text = resources.files("fibpowers").joinpath("data/curves.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    out = {}
    for entry in json.loads(text):
        c = CatalogCurve(entry["label"], int(entry["a1"]), int(entry["a2"]), int(entry["a3"]),
                         int(entry["a4"]), int(entry["a6"]), entry.get("provenance", ""))
        _validate(c)
        out[c.label] = c
    return out


_CATALOG: dict[str, CatalogCurve] | None = None


def catalog() -> dict[str, CatalogCurve]:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = load_catalog()
    return _CATALOG


def get_curve(label: str) -> CatalogCurve:
    return catalog()[label]


# ---------------------------------------------------------------------------
# Tate's algorithm (used to certify catalog conductors)

def _val(n: int, p: int) -> int:
    if n == 0:
        return 1 << 30
    return int(gmpy2.remove(n, p)[1])


def _transform(a, r, s, t):
    a1, a2, a3, a4, a6 = a
    return [a1 + 2 * s,
            a2 - s * a1 + 3 * r - s * s,
            a3 + r * a1 + 2 * t,
            a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
            a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1]


def conductor_exponent(coeffs, p: int) -> int:
    """Exponent of p in the conductor, via Tate's algorithm and Ogg's formula."""
    a = list(coeffs)
    inv = lambda x: pow(x, -1, p)
    while True:
        b2, b4, b6, b8 = b_invariants(*a)
        c4, c6 = c_invariants(*a)
        n = _val(discriminant(*a), p)
        if n == 0:
            return 0
        if p == 2:
            if b2 % 2 == 0:
                r = a[3] % 2
                t = (r * (1 + a[1] + a[3]) + a[4]) % 2
            else:
                r = a[2] % 2
                t = (r + a[3]) % 2
        elif p == 3:
            r = (-b6) % 3 if b2 % 3 == 0 else (-b2 * b4) % 3
            t = (a[0] * r + a[2]) % 3
        else:
            r = (-b2 * inv(12)) % p if c4 % p == 0 else (-(c6 + b2 * c4) * inv(12 * c4)) % p
            t = (-(a[0] * r + a[2]) * inv(2)) % p
        a = _transform(a, r, 0, t)
        b2, b4, b6, b8 = b_invariants(*a)
        c4, c6 = c_invariants(*a)
        if c4 % p != 0:
            return 1                      # multiplicative
        if _val(a[4], p) < 2:
            return n                      # type II
        if _val(b8, p) < 3:
            return n - 1                  # type III
        if _val(b6, p) < 3:
            return n - 2                  # type IV
        if p == 2:
            s, t = a[1] % 2, 2 * ((a[4] // 4) % 2)
        else:
            s, t = (-a[0] * inv(2)) % p, (-a[2] * inv(2)) % p
        a = _transform(a, 0, s, t)
        b, c, d = a[1] // p, a[3] // p ** 2, a[4] // p ** 3
        w = 27 * d * d - b * b * c * c + 4 * b ** 3 * d - 18 * b * c * d + 4 * c ** 3
        x = 3 * c - b * b
        if w % p != 0:
            return n - 4                  # I0*
        if x % p != 0:                    # I_m*
            if p == 2:
                r = c
            elif p == 3:
                r = b * c
            else:
                r = (b * c - 9 * d) * inv(2 * x)
            a = _transform(a, p * (r % p), 0, 0)
            ix, iy, mx, my = 3, 3, p * p, p * p
            while True:
                xa2, xa3 = a[1] // p, a[2] // my
                xa4, xa6 = a[3] // (p * mx), a[4] // (mx * my)
                if (xa3 * xa3 + 4 * xa6) % p != 0:
                    break
                t = my * xa6 if p == 2 else my * ((-xa3 * inv(2)) % p)
                a = _transform(a, 0, 0, t)
                my *= p
                iy += 1
                xa2, xa3 = a[1] // p, a[2] // my
                xa4, xa6 = a[3] // (p * mx), a[4] // (mx * my)
                if (xa4 * xa4 - 4 * xa2 * xa6) % p != 0:
                    break
                r = mx * ((xa6 * xa2) % 2) if p == 2 else mx * ((-xa4 * inv(2 * xa2)) % p)
                a = _transform(a, r, 0, 0)
                mx *= p
                ix += 1
            return n - ix - iy + 1
        if p == 2:                        # triple root
            r = b
        elif p == 3:
            r = c
        else:
            r = -b * inv(3)
        a = _transform(a, p * (r % p), 0, 0)
        x3t, x6t = a[2] // p ** 2, a[4] // p ** 4
        if (x3t * x3t + 4 * x6t) % p != 0:
            return n - 6                  # IV*
        t = x6t if p == 2 else x3t * inv(2)
        a = _transform(a, 0, 0, -p * p * (t % p))
        if _val(a[3], p) < 4:
            return n - 7                  # III*
        if _val(a[4], p) < 6:
            return n - 8                  # II*
        # non-minimal model: rescale and start over
        a = [a[0] // p, a[1] // p ** 2, a[2] // p ** 3, a[3] // p ** 4, a[4] // p ** 6]


def conductor(coeffs) -> int:
    from sympy import factorint
    d = discriminant(*coeffs)
    if d == 0:
        raise SingularCurveError("singular model has no conductor")
    out = 1
    for p in factorint(abs(d)):
        out *= p ** conductor_exponent(coeffs, p)
    return out
