"""Witness primes showing F_n (or L_n) is not a perfect p-th power.

For a prime l = 1 mod p with l = +-1 mod 5 put k = (l - 1)/p.  Every nonzero
p-th power x satisfies x^k = 1 mod l, so a residue v = F_n mod l with v != 0
and v^k != 1 proves F_n is not a p-th power.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Context, Decimal
from functools import lru_cache

import gmpy2
import mpmath

from .seqcore import DomainError, SeqKind, fib_lucas_mod

DEFAULT_L_BUDGET = 200


def _log_ratio_upper() -> Decimal:
    with mpmath.workdps(50):
        r = mpmath.log((1 + mpmath.sqrt(5)) / 2) / mpmath.log(2)
        s = mpmath.nstr(r, 45)
    return Context(prec=30, rounding=ROUND_CEILING).create_decimal(s)


LOG_OMEGA_OVER_LOG2 = _log_ratio_upper()


def exponent_cap(n: int) -> int:
    """Largest p that needs scanning: floor(n log(omega)/log 2), never underestimated."""
    return int((LOG_OMEGA_OVER_LOG2 * n).to_integral_value(rounding="ROUND_FLOOR"))


def min_index(kind: SeqKind) -> int:
    return 13 if kind is SeqKind.FIB else 4


@dataclass(frozen=True)
class PowerWitness:
    kind: SeqKind
    n: int
    p: int
    l: int
    k: int
    residue: int      # (F_n mod l)^k mod l

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "n": self.n, "p": self.p, "l": self.l}


@dataclass
class ScanReport:
    kind: SeqKind
    n_lo: int
    n_hi: int
    checked: int = 0
    witnesses: list[PowerWitness] = field(default_factory=list)
    failures: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


@lru_cache(maxsize=4096)
def _candidates(p: int, count: int) -> tuple[int, ...]:
    """First ``count`` primes l = 1 mod p with l = +-1 mod 5, increasing."""
    out = []
    step = 2 * p if p > 2 else 2
    l = step + 1
    while len(out) < count:
        if l % 5 in (1, 4) and gmpy2.is_prime(l):
            out.append(l)
        l += step
    return tuple(out)


def _term_mod(kind: SeqKind, n: int, l: int) -> int:
    pair = fib_lucas_mod(n, l)
    return pair.f if kind is SeqKind.FIB else pair.g


def find_witness(kind, n: int, p: int, l_budget: int = DEFAULT_L_BUDGET) -> PowerWitness | None:
    """Smallest witness prime among the first ``l_budget`` candidates, or None."""
    kind = SeqKind.parse(kind)
    if not gmpy2.is_prime(p):
        raise DomainError(f"exponent {p} is not prime")
    for l in _candidates(p, l_budget):
        v = _term_mod(kind, n, l)
        if v == 0:
            continue
        k = (l - 1) // p
        r = pow(v, k, l)
        if r != 1:
            return PowerWitness(kind, n, p, l, k, r)
    return None


def check_witness(kind, n: int, p: int, l: int) -> bool:
    """Re-derive a witness from scratch; True when it proves the claim."""
    kind = SeqKind.parse(kind)
    if not (gmpy2.is_prime(p) and gmpy2.is_prime(l)):
        return False
    if l % 5 not in (1, 4) or (l - 1) % p:
        return False
    v = int(gmpy2.fib(n) % l) if kind is SeqKind.FIB else int(gmpy2.lucas(n) % l)
    return v != 0 and int(gmpy2.powmod(v, (l - 1) // p, l)) != 1


def _scan_chunk(args) -> tuple[int, list[PowerWitness], list[tuple[int, int]]]:
    kind, lo, hi, budget = args
    found, failed, checked = [], [], 0
    for n in range(lo, hi + 1):
        cap = exponent_cap(n)
        p = 2
        while p <= cap:
            w = find_witness(kind, n, p, budget)
            checked += 1
            if w is None:
                failed.append((n, p))
            else:
                found.append(w)
            p = int(gmpy2.next_prime(p))
    return checked, found, failed


def scan_range(kind, n_lo: int, n_hi: int, workers: int = 1,
               l_budget: int = DEFAULT_L_BUDGET, chunk: int = 100) -> ScanReport:
    """Find a witness for every n in [n_lo, n_hi] and every prime p up to the cap."""
    kind = SeqKind.parse(kind)
    if n_lo < min_index(kind):
        raise DomainError(f"scan must start at n >= {min_index(kind)}")
    if n_hi < n_lo:
        raise DomainError("empty range")
    tasks = [(kind, a, min(a + chunk - 1, n_hi), l_budget) for a in range(n_lo, n_hi + 1, chunk)]
    report = ScanReport(kind, n_lo, n_hi)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_chunk, tasks))
    else:
        results = [_scan_chunk(t) for t in tasks]
    for checked, found, failed in results:
        report.checked += checked
        report.witnesses.extend(found)
        report.failures.extend(failed)
    return report


def is_perfect_power(x: int, p: int) -> bool:
    """Exact test whether x is a p-th power of an integer (x >= 0)."""
    if x < 0:
        return False
    return bool(gmpy2.iroot(x, p)[1])

