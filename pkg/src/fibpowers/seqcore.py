"""Fibonacci and Lucas numbers modulo primes.

Everything here is a pure function of its integer arguments.  Indices may be
arbitrarily large Python integers (the sieve feeds multi-hundred digit
residues through these routines).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import gmpy2


class SeqKind(enum.Enum):
    FIB = "fib"
    LUCAS = "lucas"

    @classmethod
    def parse(cls, value: "str | SeqKind") -> "SeqKind":
        if isinstance(value, SeqKind):
            return value
        v = str(value).strip().lower()
        if v in ("fib", "fibonacci", "f"):
            return cls.FIB
        if v in ("lucas", "luc", "l"):
            return cls.LUCAS
        raise ValueError(f"unknown sequence kind {value!r}")


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


@dataclass(frozen=True)
class FibLucasPair:
    f: int
    g: int
    n: int
    l: int

    def identity_holds(self) -> bool:
        # L_n^2 - 5 F_n^2 = 4 (-1)^n
        sign = -1 if self.n & 1 else 1
        return (self.g * self.g - 5 * self.f * self.f - 4 * sign) % self.l == 0


@dataclass(frozen=True)
class PeriodInfo:
    l: int
    m_of_l: int
    k_of_l: int | None


def _check_prime(l: int) -> None:
    if l < 2 or not gmpy2.is_prime(l):
        raise DomainError(f"{l} is not prime")
    if l == 5:
        raise DomainError("the prime 5 is excluded")


def _fib_pair(n: int, l: int) -> tuple[int, int]:
    """(F_n, F_{n+1}) mod l by fast doubling, iterating over the bits of n."""
    a, b = 0, 1
    for bit in bin(n)[2:]:
        # F_{2k} = F_k (2F_{k+1} - F_k), F_{2k+1} = F_k^2 + F_{k+1}^2
        c = a * (2 * b - a) % l
        d = (a * a + b * b) % l
        if bit == "1":
            a, b = d, (c + d) % l
        else:
            a, b = c, d
    return a, b


def fib_lucas_mod(n: int, l: int) -> FibLucasPair:
    """Return (F_n mod l, L_n mod l) using O(log n) multiplications."""
    if n < 0:
        raise DomainError("negative index")
    _check_prime(l)
    f, f1 = _fib_pair(n, l)
    return FibLucasPair(f, (2 * f1 - f) % l, n, l)


def fib_mod(n: int, m: int) -> int:
    """F_n modulo an arbitrary modulus m >= 1 (no primality requirement)."""
    return _fib_pair(n, m)[0] % m


def lucas_mod(n: int, m: int) -> int:
    f, f1 = _fib_pair(n, m)
    return (2 * f1 - f) % m


def period_m(l: int) -> int:
    """M(l): l-1 if l = +-1 mod 5, else 2(l+1)."""
    _check_prime(l)
    return l - 1 if l % 5 in (1, 4) else 2 * (l + 1)


def period_k(l: int) -> int:
    """K(l) = lcm(l-1, 6), defined when l = +-1 mod 5."""
    _check_prime(l)
    if l % 5 not in (1, 4):
        raise DomainError(f"K(l) needs l = +-1 mod 5, got {l}")
    return math.lcm(l - 1, 6)


def period_info(l: int) -> PeriodInfo:
    m = period_m(l)
    k = period_k(l) if l % 5 in (1, 4) else None
    return PeriodInfo(l, m, k)


def sqrt5_mod(l: int) -> int:
    """The square root s of 5 modulo l with s <= l/2."""
    _check_prime(l)
    if l == 2:
        return 1
    if l % 5 not in (1, 4):
        raise DomainError(f"5 is not a square modulo {l}")
    s = _sqrt_mod(5, l)
    return min(s, l - s)


def _sqrt_mod(a: int, l: int) -> int:
    """Tonelli-Shanks square root of a quadratic residue a mod odd prime l."""
    a %= l
    if a == 0:
        return 0
    if pow(a, (l - 1) // 2, l) != 1:
        raise DomainError(f"{a} is not a square modulo {l}")
    if l % 4 == 3:
        return pow(a, (l + 1) // 4, l)
    q, s = l - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (l - 1) // 2, l) != l - 1:
        z += 1
    m, c, t, r = s, pow(z, q, l), pow(a, q, l), pow(a, (q + 1) // 2, l)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % l
            i += 1
        b = pow(c, 1 << (m - i - 1), l)
        m, c = i, b * b % l
        t, r = t * c % l, r * b % l
    return r


sqrt_mod = _sqrt_mod


def h_n_mod(n: int, l: int) -> int:
    """H_n mod l: L_n if n = 1 mod 6, -L_n if n = 5 mod 6."""
    r = n % 6
    if r not in (1, 5):
        raise DomainError(f"H_n is only defined for n = +-1 mod 6 (n mod 6 = {r})")
    g = fib_lucas_mod(n, l).g
    return g if r == 1 else (-g) % l


def h_n_exact(n: int) -> int:
    """Exact integer H_n for n = +-1 mod 6."""
    r = n % 6
    if r not in (1, 5):
        raise DomainError("H_n is only defined for n = +-1 mod 6")
    g = int(gmpy2.lucas(n))
    return g if r == 1 else -g


# (L_n mod 4, F_n mod 4) indexed by n mod 6
_MOD4 = ((2, 0), (1, 1), (3, 1), (0, 2), (3, 3), (3, 1))


def mod4_table(n: int) -> tuple[int, int]:
    """(L_n mod 4, F_n mod 4), which depend only on n mod 6."""
    return _MOD4[n % 6]
