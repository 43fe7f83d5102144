"""Kraus-type congruence criterion and newform elimination.

For a prime p and l = 2kp + 1 (prime, l = +-1 mod 5) a certificate shows
that every solution of F_n = y^p (resp. L_n = y^p) has n = +-1 mod p:

  (a) l = 2kp + 1 is prime and l = +-1 mod 5;
  (b) omega^(2k) != 1 mod l, omega = (1 + sqrt5)/2;
  (c) a_l(E^zeta)^2 != a_l(E)^2 mod p for every zeta in the zeta set.

For Fibonacci the zeta set is the nontrivial 2p-th powers zeta with 5 zeta - 4
a square (or 0), delta^2 = 5 zeta - 4, E^zeta: Y^2 = X^3 + delta X^2 - X,
and E = 20A2.  For Lucas, y^(2p) = 5 F_n^2 - 4 gives delta^2 = (zeta + 4)/5
with E^zeta: Y^2 = X^3 - 5 delta X^2 + 5 X compared against E = 200B1.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import gmpy2
from sympy import factorint
from sympy.ntheory import primitive_root

from .curves import (CurveModL, frey_lucas_from_f, get_curve, trace_of_frobenius,
                     trace_raw)
from .seqcore import DomainError, SeqKind, fib_lucas_mod, period_m, sqrt5_mod, sqrt_mod

DEFAULT_K_MAX = 1000

LUCAS_DELTA_NOTE = "delta^2 = (zeta+4)/5 from y^(2p) = 5F_n^2 - 4"


def comparison_curve(kind: SeqKind):
    return get_curve("20A2" if kind is SeqKind.FIB else "200B1")


@dataclass(frozen=True)
class ZetaSet:
    kind: SeqKind
    p: int
    k: int
    l: int
    zetas: tuple[int, ...]
    deltas: tuple[int, ...]           # one square root per zeta
    zero_delta: int                   # how many zetas give delta = 0


@dataclass
class KrausCertificate:
    kind: SeqKind
    p: int
    k: int
    l: int
    sqrt5: int
    a_l_E: int
    zeta_count: int
    checks: dict = field(default_factory=dict)
    zero_delta: int = 0
    elapsed_ms: int = 0
    note: str = ""

    def to_json(self) -> dict:
        d = {"kind": self.kind.value, "p": self.p, "k": self.k, "l": self.l,
             "sqrt5": self.sqrt5, "a_l_E": self.a_l_E, "zeta_count": self.zeta_count,
             "checks": dict(self.checks), "zero_delta": self.zero_delta,
             "elapsed_ms": self.elapsed_ms}
        if self.note:
            d["note"] = self.note
        return d

    @classmethod
    def from_json(cls, d: dict) -> "KrausCertificate":
        return cls(SeqKind.parse(d["kind"]), int(d["p"]), int(d["k"]), int(d["l"]),
                   int(d["sqrt5"]), int(d["a_l_E"]), int(d["zeta_count"]),
                   dict(d.get("checks", {})), int(d.get("zero_delta", 0)),
                   int(d.get("elapsed_ms", 0)), d.get("note", ""))


def condition_a(p: int, k: int) -> bool:
    l = 2 * k * p + 1
    return bool(gmpy2.is_prime(l)) and l % 5 in (1, 4)


def condition_b(p: int, k: int, sqrt5: int | None = None) -> bool:
    l = 2 * k * p + 1
    s = sqrt5_mod(l) if sqrt5 is None else sqrt5 % l
    if (s * s - 5) % l:
        raise DomainError(f"{s} is not a square root of 5 modulo {l}")
    omega = (1 + s) * pow(2, -1, l) % l
    return pow(omega, 2 * k, l) != 1


def _subgroup(l: int, order: int, exponent: int) -> list[int]:
    """Elements of the subgroup of F_l^* of the given order (the image of x -> x^exponent)."""
    h = pow(primitive_root(l), exponent, l)
    out, x = [], 1
    for _ in range(order):
        out.append(x)
        x = x * h % l
    return out


def zeta_set(kind, p: int, k: int) -> ZetaSet:
    """The set of nontrivial 2p-th powers compatible with the Frey curve."""
    kind = SeqKind.parse(kind)
    if not condition_a(p, k):
        raise DomainError(f"l = {2 * k * p + 1} fails condition (a)")
    l = 2 * k * p + 1
    inv5 = pow(5, -1, l)
    zetas, deltas, zero = [], [], 0
    for z in _subgroup(l, k, 2 * p):
        if z == 1:
            continue
        t = (5 * z - 4) % l if kind is SeqKind.FIB else (z + 4) * inv5 % l
        if t == 0:
            zero += 1
            zetas.append(z)
            deltas.append(0)
        elif pow(t, (l - 1) // 2, l) == 1:
            zetas.append(z)
            deltas.append(sqrt_mod(t, l))
    return ZetaSet(kind, p, k, l, tuple(zetas), tuple(deltas), zero)


def _zeta_trace(kind: SeqKind, delta: int, l: int) -> int:
    if kind is SeqKind.FIB:
        return trace_of_frobenius(CurveModL(l, 0, delta, 0, -1, 0)).a_l
    return trace_of_frobenius(frey_lucas_from_f(delta, l).curve).a_l


def condition_c(kind, p: int, k: int, zs: ZetaSet | None = None) -> tuple[bool, int]:
    """(holds, a_l(E)) for condition (c)."""
    kind = SeqKind.parse(kind)
    zs = zs or zeta_set(kind, p, k)
    l = zs.l
    a_e = comparison_curve(kind).a_l(l)
    target = a_e * a_e % p
    for d in zs.deltas:
        a = _zeta_trace(kind, d, l)
        if a * a % p == target:
            return False, a_e
    return True, a_e


def certify(kind, p: int, k: int, sqrt5: int | None = None) -> KrausCertificate | None:
    """Certificate for (p, k) if all three conditions hold, else None."""
    kind = SeqKind.parse(kind)
    t0 = time.perf_counter()
    if not condition_a(p, k):
        return None
    l = 2 * k * p + 1
    s = sqrt5_mod(l) if sqrt5 is None else sqrt5 % l
    if not condition_b(p, k, s):
        return None
    zs = zeta_set(kind, p, k)
    ok, a_e = condition_c(kind, p, k, zs)
    if not ok:
        return None
    ms = int((time.perf_counter() - t0) * 1000)
    note = LUCAS_DELTA_NOTE if kind is SeqKind.LUCAS else ""
    return KrausCertificate(kind, p, k, l, s, a_e, len(zs.zetas),
                            {"a": True, "b": True, "c": True}, zs.zero_delta, ms, note)


def kraus_search(kind, p: int, k_max: int = DEFAULT_K_MAX,
                 sqrt5_choice: str = "small") -> KrausCertificate | None:
    """Smallest k <= k_max passing (a), (b), (c); None if none does.

    ``sqrt5_choice`` selects the smaller ("small") or larger ("large") root of 5;
    the outcome does not depend on it.
    """
    kind = SeqKind.parse(kind)
    if p < 7 or not gmpy2.is_prime(p):
        raise DomainError(f"p = {p} must be a prime >= 7")
    t0 = time.perf_counter()
    for k in range(1, k_max + 1):
        if not condition_a(p, k):
            continue
        l = 2 * k * p + 1
        s = sqrt5_mod(l)
        if sqrt5_choice == "large":
            s = l - s
        cert = certify(kind, p, k, s)
        if cert is not None:
            cert.elapsed_ms = int((time.perf_counter() - t0) * 1000)
            return cert
    return None


def kraus_search_fib(p: int, k_max: int = DEFAULT_K_MAX) -> KrausCertificate | None:
    return kraus_search(SeqKind.FIB, p, k_max)


def kraus_search_lucas(p: int, k_max: int = DEFAULT_K_MAX) -> KrausCertificate | None:
    return kraus_search(SeqKind.LUCAS, p, k_max)


def k_outcomes(kind, p: int, k_max: int, sqrt5_choice: str = "small") -> list[bool]:
    """Pass/fail of every k in 1..k_max (used to compare square-root branches)."""
    kind = SeqKind.parse(kind)
    out = []
    for k in range(1, k_max + 1):
        if not condition_a(p, k):
            out.append(False)
            continue
        l = 2 * k * p + 1
        s = sqrt5_mod(l) if sqrt5_choice == "small" else l - sqrt5_mod(l)
        out.append(certify(kind, p, k, s) is not None)
    return out


def verify_certificate(cert: KrausCertificate) -> list[str]:
    """Re-derive a certificate from (kind, p, k); return the list of mismatches."""
    problems = []
    p, k = cert.p, cert.k
    if not gmpy2.is_prime(p) or p < 7:
        return [f"p = {p} is not a prime >= 7"]
    if cert.l != 2 * k * p + 1:
        problems.append("l != 2kp + 1")
    if not condition_a(p, k):
        return problems + ["condition (a) fails"]
    l = 2 * k * p + 1
    if (cert.sqrt5 * cert.sqrt5 - 5) % l:
        problems.append("stored sqrt5 is not a square root of 5")
    elif not condition_b(p, k, cert.sqrt5):
        problems.append("condition (b) fails")
    zs = zeta_set(cert.kind, p, k)
    ok, a_e = condition_c(cert.kind, p, k, zs)
    if not ok:
        problems.append("condition (c) fails")
    if a_e != cert.a_l_E:
        problems.append("stored a_l(E) differs")
    if len(zs.zetas) != cert.zeta_count:
        problems.append("stored zeta count differs")
    if cert.checks and cert.checks != {"a": True, "b": True, "c": True}:
        problems.append("stored check record is not all-pass")
    return problems


# ---------------------------------------------------------------------------
# Newform elimination for the Lucas Frey curve at level 200

ELIMINATION_LABELS = {1: "200A1", 2: "200B1", 3: "200C1", 4: "200D1", 5: "200E1"}


@dataclass
class EliminationStep:
    l: int
    a_l: int
    t_set: tuple[int, ...]       # subset of Z/M(l)
    g: int
    h: int
    h_smooth: bool


@dataclass
class EliminationReport:
    label: str
    S: tuple[int, ...]
    steps: list[EliminationStep]
    modulus: int
    residues: tuple[int, ...]

    @property
    def success(self) -> bool:
        return not self.residues and all(s.h_smooth for s in self.steps)


def _is_5_smooth(h: int) -> bool:
    if h == 0:
        return False
    return all(q <= 5 for q in factorint(abs(h)))


def elimination_step(label: str, l: int) -> EliminationStep:
    if l in (2, 5) or not gmpy2.is_prime(l):
        raise DomainError(f"l = {l} not allowed")
    ae = get_curve(label).a_l(l)
    ml = period_m(l)
    t_set, diffs = [], []
    for m in range(ml):
        f = fib_lucas_mod(m, l).f
        # singular reductions give the +-1 trace of multiplicative reduction
        d = trace_raw(-5 * f, 5, 0, l) - ae
        if d == 0:
            t_set.append(m)
        else:
            diffs.append(d)
    g = math.lcm(*diffs) if diffs else 0
    h = g if l % 5 in (2, 3) else math.lcm(g, l + 1 - ae, l + 1 + ae)
    return EliminationStep(l, ae, tuple(t_set), g, h, _is_5_smooth(h))


def eliminate_newforms(i: int, S) -> EliminationReport:
    """Try to rule out E^i (200A1..200E1 for i = 1..5) using the primes in S."""
    from .sieve import ResidueClassSet, intersect
    label = ELIMINATION_LABELS[i]
    current = ResidueClassSet(6, (1, 5))
    steps = []
    for l in S:
        st = elimination_step(label, l)
        steps.append(st)
        current = intersect(current, ResidueClassSet(period_m(l), st.t_set))
    return EliminationReport(label, tuple(S), steps, current.modulus, current.residues)
