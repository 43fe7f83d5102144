"""Residue-class sieve giving lower bounds for the index n.

For a prime l = +-1 mod 5 the Frey curve modulo l depends only on n modulo
K(l) = lcm(l - 1, 6).  The set N(l, q) collects the unit classes n that are
compatible with the trace congruence for some exponent p > q.  Intersecting
these sets over many l pins n into a handful of classes modulo a huge
modulus; the smallest class a > 1 is a lower bound for n.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import gmpy2
import mpmath
from sympy import factorint, primerange

from .curves import get_curve, trace_raw
from .seqcore import DomainError, SeqKind, fib_lucas_mod, period_k

# 2^5 3^3 5^2 7 11 13 17 19
DEFAULT_START_MODULUS = 6983776800
CONDL_PRIME_LIMIT = 25000


@dataclass(frozen=True)
class ResidueClassSet:
    modulus: int
    residues: tuple[int, ...]

    def __init__(self, modulus: int, residues: Iterable[int]):
        if modulus < 1:
            raise DomainError("modulus must be positive")
        object.__setattr__(self, "modulus", int(modulus))
        object.__setattr__(self, "residues", tuple(sorted({int(r) % modulus for r in residues})))

    def __len__(self) -> int:
        return len(self.residues)

    def __contains__(self, n: int) -> bool:
        return n % self.modulus in set(self.residues)

    def lower_bound(self) -> int | None:
        """Smallest residue a > 1, or None."""
        i = bisect_right(self.residues, 1)
        return self.residues[i] if i < len(self.residues) else None


def intersect(a: ResidueClassSet, b: ResidueClassSet) -> ResidueClassSet:
    """Classes modulo lcm(M_a, M_b) reducing into both a and b."""
    g = math.gcd(a.modulus, b.modulus)
    m = a.modulus // g * b.modulus
    by_class: dict[int, list[int]] = {}
    for s in b.residues:
        by_class.setdefault(s % g, []).append(s)
    # x = r + M_a t with M_a t = s - r (mod M_b)
    ma_g, mb_g = a.modulus // g, b.modulus // g
    inv = pow(ma_g, -1, mb_g) if mb_g > 1 else 0
    out = []
    for r in a.residues:
        for s in by_class.get(r % g, ()):
            t = ((s - r) // g) * inv % mb_g if mb_g > 1 else 0
            out.append(r + a.modulus * t)
    return ResidueClassSet(m, out)


# ---------------------------------------------------------------------------
# N(l, q)

@dataclass(frozen=True)
class SievePair:
    l: int
    q: int

    def __post_init__(self):
        check_sieve_prime(self.l)
        if self.q < 5 or not gmpy2.is_prime(self.q):
            raise DomainError(f"q = {self.q} must be a prime >= 5")


def check_sieve_prime(l: int) -> None:
    if not gmpy2.is_prime(l) or l % 5 not in (1, 4):
        raise DomainError(f"l = {l} must be a prime = +-1 mod 5")
    if any(r >= CONDL_PRIME_LIMIT for r in factorint(l - 1)):
        raise DomainError(f"l - 1 has a prime factor >= {CONDL_PRIME_LIMIT}")


def _has_prime_factor_above(v: int, q: int) -> bool:
    """True when v has a prime factor > q (v = 0 counts as divisible by every prime)."""
    if v == 0:
        return True
    v = abs(v)
    for r in primerange(2, q + 1):
        while v % r == 0:
            v //= r
    return v > 1


def sieve_modulus(kind: SeqKind, l: int) -> int:
    """Modulus on which the Frey curve modulo l depends (K(l) for both sequences)."""
    return period_k(l)


class _Membership:
    """Decides n in N(l, q) for residues n modulo K(l), with caching."""

    def __init__(self, kind: SeqKind, l: int, q: int):
        self.kind, self.l, self.q = kind, l, q
        self.k = sieve_modulus(kind, l)
        label = "20A2" if kind is SeqKind.FIB else "200B1"
        self.a_e = get_curve(label).a_l(l)
        self.singular_ok = (_has_prime_factor_above(l + 1 - self.a_e, q)
                            or _has_prime_factor_above(l + 1 + self.a_e, q))
        self._by_coeff: dict[int, bool] = {}
        self._by_n: dict[int, bool] = {}

    def _coeff(self, n: int) -> tuple[int, bool]:
        l = self.l
        pair = fib_lucas_mod(n % (l - 1), l)
        if self.kind is SeqKind.FIB:
            h = pair.g if n % 6 == 1 else (-pair.g) % l
            return h, (h * h + 4) % l == 0
        f = pair.f
        return f, (5 * f * f - 4) % l == 0

    def __call__(self, n: int) -> bool:
        n %= self.k
        res = self._by_n.get(n)
        if res is not None:
            return res
        if math.gcd(n, self.k) != 1:
            res = False
        else:
            c, singular = self._coeff(n)
            if singular:
                res = self.singular_ok
            else:
                res = self._by_coeff.get(c)
                if res is None:
                    l = self.l
                    if self.kind is SeqKind.FIB:
                        a = trace_raw(c, -1, 0, l)
                    else:
                        a = trace_raw(-5 * c, 5, 0, l)
                    res = _has_prime_factor_above(a - self.a_e, self.q)
                    self._by_coeff[c] = res
        self._by_n[n] = res
        return res


def n_set(kind, l: int, q: int) -> ResidueClassSet:
    """N(l, q) as a subset of the units of Z/K(l)."""
    kind = SeqKind.parse(kind)
    check_sieve_prime(l)
    member = _Membership(kind, l, q)
    return ResidueClassSet(member.k, [n for n in range(member.k) if member(n)])


def n_set_fib(l: int, q: int) -> ResidueClassSet:
    return n_set(SeqKind.FIB, l, q)


def n_set_lucas(l: int, q: int) -> ResidueClassSet:
    return n_set(SeqKind.LUCAS, l, q)


def refine(current: ResidueClassSet, kind: SeqKind, l: int, q: int) -> ResidueClassSet:
    """intersect(current, N(l, q)) without materialising N(l, q)."""
    member = _Membership(kind, l, q)
    k_new = math.lcm(current.modulus, member.k)
    step = k_new // current.modulus
    out = []
    for r in current.residues:
        for j in range(step):
            n = r + j * current.modulus
            if member(n):
                out.append(n)
    return ResidueClassSet(k_new, out)


# ---------------------------------------------------------------------------
# Sessions

@dataclass
class SieveSession:
    kind: SeqKind
    p: int
    q: int
    pairs: list[SievePair] = field(default_factory=list)
    n_set: ResidueClassSet = field(default_factory=lambda: ResidueClassSet(6, (1, 5)))
    stage_modulus: int = DEFAULT_START_MODULUS
    n_max_log: float | None = None
    status: str = "running"

    @property
    def k_s(self) -> int:
        return self.n_set.modulus

    @property
    def lower_bound(self) -> int | None:
        return self.n_set.lower_bound()

    def log10_lower_bound(self) -> float:
        a = self.lower_bound
        return float(mpmath.log10(a)) if a else float("-inf")

    def four_elements_present(self) -> bool:
        k = self.k_s
        if k % 4:
            return True
        return all(x in self.n_set for x in (1, k - 1, k // 2 - 1, k // 2 + 1))

    def to_checkpoint(self) -> dict:
        a = self.lower_bound
        return {
            "kind": self.kind.value, "p": self.p, "q": self.q,
            "pairs": [[pr.l, pr.q] for pr in self.pairs],
            "modulus_hex": hex(self.n_set.modulus),
            "residues_hex": [hex(r) for r in self.n_set.residues],
            "lower_bound_hex": hex(a) if a is not None else None,
            "stage_modulus_hex": hex(self.stage_modulus),
            "status": self.status,
        }

    @classmethod
    def from_checkpoint(cls, d: dict) -> "SieveSession":
        s = cls(SeqKind.parse(d["kind"]), int(d["p"]), int(d["q"]))
        s.pairs = [SievePair(int(l), int(q)) for l, q in d["pairs"]]
        s.n_set = ResidueClassSet(int(d["modulus_hex"], 16), [int(r, 16) for r in d["residues_hex"]])
        if d.get("stage_modulus_hex"):
            s.stage_modulus = int(d["stage_modulus_hex"], 16)
        s.status = d.get("status", "running")
        return s

    def save(self, path: str) -> None:
        """Atomic checkpoint write (temporary file then rename)."""
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ckpt-")
        with os.fdopen(fd, "w") as fh:
            json.dump(self.to_checkpoint(), fh)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "SieveSession":
        with open(path) as fh:
            return cls.from_checkpoint(json.load(fh))


def _divisors_upto(factors: list[tuple[int, int]], bound: int) -> list[int]:
    out = []

    def rec(i: int, d: int) -> None:
        if i == len(factors):
            out.append(d)
            return
        pr, e = factors[i]
        for _ in range(e + 1):
            if d > bound:
                break
            rec(i + 1, d)
            d *= pr

    rec(0, 1)
    return sorted(d for d in out if d <= bound)


def l_candidates(modulus: int, l_max: int, start_bound: int = 1 << 12) -> Iterator[int]:
    """Primes l = +-1 mod 5, l > 5, with (l - 1) | modulus, in increasing order up to l_max."""
    factors = sorted(factorint(modulus).items())
    seen = 0
    bound = min(start_bound, l_max)
    while True:
        for d in _divisors_upto(factors, bound - 1):
            l = d + 1
            if l <= seen or l <= 5:
                continue
            if l % 5 in (1, 4) and gmpy2.is_prime(l):
                yield l
        seen = bound
        if bound >= l_max:
            return
        bound = min(2 * bound, l_max)


def _next_prime_factor(m: int) -> int:
    """Smallest prime not dividing the smooth modulus m."""
    r = 2
    while m % r == 0:
        r = int(gmpy2.next_prime(r))
    return r


Progress = Callable[[SieveSession, int], None]


def run_sieve(kind, p: int, q: int, n_max_log: float | None = None,
              start_modulus: int = DEFAULT_START_MODULUS, max_prime: int = 1000,
              l_max: int = 10 ** 7, session: SieveSession | None = None,
              progress: Progress | None = None,
              checkpoint: Callable[[SieveSession], None] | None = None) -> SieveSession:
    """Grow S along a smooth modulus until the lower bound beats exp(n_max_log).

    Stage rule: at modulus M append (l, q) for each unused prime l with
    (l - 1) | M, in increasing order, until K(S) = M and |N(S)| = 4; then
    multiply M by the next prime.  ``n_max_log`` is the natural log of the
    upper bound for n; with None the sieve stops once M's largest prime
    factor would exceed ``max_prime``.
    """
    kind = SeqKind.parse(kind)
    if q >= p:
        raise DomainError("need q < p")
    s = session or SieveSession(kind, p, q, stage_modulus=start_modulus)
    s.n_max_log = n_max_log
    s.status = "running"
    used = {pr.l for pr in s.pairs}

    def beaten() -> bool:
        a = s.lower_bound
        if n_max_log is None or a is None:
            return False
        with mpmath.workdps(50):
            return mpmath.log(a) > mpmath.mpf(n_max_log) + mpmath.mpf("1e-30")

    while True:
        m = s.stage_modulus
        for l in l_candidates(m, l_max):
            if s.k_s == m and len(s.n_set) == 4:
                break
            if l in used:
                continue
            s.n_set = refine(s.n_set, kind, l, q)
            s.pairs.append(SievePair(l, q))
            used.add(l)
            if progress:
                progress(s, l)
        if checkpoint:
            checkpoint(s)
        if beaten():
            s.status = "contradiction"
            return s
        nxt = _next_prime_factor(m)
        if nxt > max_prime:
            s.status = "exhausted"
            return s
        s.stage_modulus = m * nxt
