"""Analytic upper bounds for n, evaluated in log space.

The quantities involved (Theta is of size 10^(10^4) for p near 733) are
represented by their natural logarithms using mpmath at 256 bits by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf

DEFAULT_PREC = 256


class PrecisionError(ArithmeticError):
    """Raised when a comparison cannot be decided at the working precision."""


@dataclass(frozen=True)
class LogMagnitude:
    """A positive real stored as its natural log, with an absolute error bound."""
    ln_value: mpmath.mpf
    precision_bits: int = DEFAULT_PREC
    err: mpmath.mpf = mpf(0)

    def __mul__(self, other: "LogMagnitude") -> "LogMagnitude":
        prec = min(self.precision_bits, other.precision_bits)
        with mpmath.workprec(prec):
            return LogMagnitude(self.ln_value + other.ln_value, prec, self.err + other.err)

    def __pow__(self, e) -> "LogMagnitude":
        with mpmath.workprec(self.precision_bits):
            return LogMagnitude(self.ln_value * e, self.precision_bits, self.err * abs(e))

    @property
    def log10(self) -> float:
        with mpmath.workprec(self.precision_bits):
            return float(self.ln_value / mpmath.log(10))

    def compare(self, other: "LogMagnitude", safety: int = 10) -> int:
        """-1, 0 or 1, refusing to decide when the gap is within safety * error."""
        with mpmath.workprec(max(self.precision_bits, other.precision_bits)):
            return self._compare(other, safety)

    def _compare(self, other: "LogMagnitude", safety: int) -> int:
        gap = self.ln_value - other.ln_value
        tol = safety * (self.err + other.err + mpf(2) ** (-min(self.precision_bits,
                                                               other.precision_bits) + 8)
                        * (1 + abs(self.ln_value) + abs(other.ln_value)))
        if abs(gap) <= tol:
            raise PrecisionError("comparison within accumulated error")
        return 1 if gap > 0 else -1

    def is_below(self, a: int) -> bool:
        """True when exp(self) < a, decided with a safety margin."""
        with mpmath.workprec(self.precision_bits):
            return self.compare(LogMagnitude(mpmath.log(a), self.precision_bits)) < 0

    @classmethod
    def of(cls, x, prec: int = DEFAULT_PREC) -> "LogMagnitude":
        with mpmath.workprec(prec):
            return cls(mpmath.log(mpf(x)), prec)


@dataclass(frozen=True)
class FieldShape:
    d: int
    r1: int
    r2: int
    w: int
    log_disc: mpmath.mpf           # log of an upper bound L for |D_K|

    def __post_init__(self):
        if self.d != self.r1 + 2 * self.r2:
            raise ValueError("d must equal r1 + 2 r2")
        if self.r1 > 0 and self.w != 2:
            raise ValueError("a field with a real embedding has w = 2")


def _log_f(shape: FieldShape, s) -> mpmath.mpf:
    d, r1, r2 = shape.d, shape.r1, shape.r2
    log_a = -r2 * mpmath.log(2) - mpf(d) / 2 * mpmath.log(mpmath.pi) + shape.log_disc / 2
    return (-r1 * mpmath.log(2) + mpmath.log(shape.w) + s * log_a
            + r1 * mpmath.loggamma(s / 2) + r2 * mpmath.loggamma(s)
            + (d + 1) * mpmath.log(s) + (1 - d) * mpmath.log(s - 1))


def landau_c(shape: FieldShape, prec: int = DEFAULT_PREC) -> LogMagnitude:
    """log C_K(L): the minimum of f_K(L, s) over s = 2 - t/1000, t = 0..999."""
    if shape.d < 2:
        raise ValueError("degree must be at least 2")
    with mpmath.workprec(prec):
        best = min(_log_f(shape, 2 - mpf(t) / 1000) for t in range(1000))
        return LogMagnitude(+best, prec, mpf(2) ** (-prec + 16) * (1 + abs(best)))


def landau_c_quadratic(disc: int, prec: int = DEFAULT_PREC) -> LogMagnitude:
    with mpmath.workprec(prec):
        return landau_c(FieldShape(2, 2, 0, 2, mpmath.log(disc)), prec)


def _log_factorial(n: int) -> mpmath.mpf:
    return mpmath.loggamma(n + 1)


def fib_field_shape(p: int) -> FieldShape:
    # totally real of degree p, discriminant dividing 10^(p-1) p^p
    return FieldShape(p, p, 0, 2, (p - 1) * mpmath.log(10) + p * mpmath.log(p))


def lucas_field_shape(p: int) -> FieldShape:
    # degree 2p, two real embeddings, discriminant at most 5^p p^(2p)
    return FieldShape(2 * p, 2, p - 1, 2, p * mpmath.log(5) + 2 * p * mpmath.log(p))


def _n_max(p: int, log_theta) -> mpmath.mpf:
    # n < 2.5 p Theta log Theta
    return mpmath.log(mpf("2.5")) + mpmath.log(p) + log_theta + mpmath.log(log_theta)


def theta_fib(p: int, prec: int = DEFAULT_PREC) -> tuple[LogMagnitude, LogMagnitude]:
    """(Theta, n_max) for the Fibonacci equation with exponent p."""
    if p < 7:
        raise ValueError("p must be at least 7")
    with mpmath.workprec(prec):
        log_c = landau_c(fib_field_shape(p), prec).ln_value
        lt = (mpmath.log(mpf("3.9")) + (p + 3) * mpmath.log(30) + mpf(13) / 2 * mpmath.log(p)
              + (p + 1) * mpmath.log(p - 1) + 2 * _log_factorial(p - 1) + mpmath.log(3 * p + 2)
              + mpmath.log(1 + mpmath.log(p * (p - 1))) + log_c)
        ln = _n_max(p, lt)
        e = mpf(2) ** (-prec + 20) * (1 + abs(lt))
        return LogMagnitude(+lt, prec, e), LogMagnitude(+ln, prec, 2 * e)


def theta_lucas(p: int, prec: int = DEFAULT_PREC) -> tuple[LogMagnitude, LogMagnitude]:
    """(Theta, n_max) for the Lucas equation with exponent p."""
    if p < 7:
        raise ValueError("p must be at least 7")
    with mpmath.workprec(prec):
        log_c = landau_c(lucas_field_shape(p), prec).ln_value
        lt = (mpmath.log(67) + (p + 5) * mpmath.log(30) + (p + 2) * mpmath.log(p - 1)
              + 3 * mpmath.log(p) + mpf("5.5") * mpmath.log(p + 2) + 2 * _log_factorial(p)
              + mpmath.log(1 + mpmath.log(2 * p * (p - 1))) + log_c)
        ln = _n_max(p, lt)
        e = mpf(2) ** (-prec + 20) * (1 + abs(lt))
        return LogMagnitude(+lt, prec, e), LogMagnitude(+ln, prec, 2 * e)


def theta(kind, p: int, prec: int = DEFAULT_PREC):
    from .seqcore import SeqKind
    kind = SeqKind.parse(kind)
    return theta_fib(p, prec) if kind is SeqKind.FIB else theta_lucas(p, prec)


def matveev_lower(D, A, B, n_logs: int | None = None, real_case: bool = True,
                  prec: int = DEFAULT_PREC) -> mpmath.mpf:
    """Lower bound for log|Lambda| from Matveev's theorem.

    ``A`` holds the modified heights A_j, ``B`` the largest coefficient.
    Real case: -1.4 30^(n+3) n^4.5 D^2 (1 + log D)(1 + log B) prod A_j;
    otherwise -3 30^(n+4) (n+1)^5.5 D^2 (1 + log D)(1 + log nB) prod A_j.
    """
    n = len(A) if n_logs is None else n_logs
    if n != len(A):
        raise ValueError("need one A_j per logarithm")
    with mpmath.workprec(prec):
        D, B = mpf(D), mpf(B)
        prod = mpmath.fprod(mpf(a) for a in A)
        if real_case:
            c = mpf("1.4") * mpf(30) ** (n + 3) * mpf(n) ** mpf("4.5")
            return -c * D ** 2 * (1 + mpmath.log(D)) * (1 + mpmath.log(B)) * prod
        c = 3 * mpf(30) ** (n + 4) * mpf(n + 1) ** mpf("5.5")
        return -c * D ** 2 * (1 + mpmath.log(D)) * (1 + mpmath.log(n * B)) * prod


def modified_height(D, h, log_abs) -> mpmath.mpf:
    """max{D h(alpha), |log alpha|, 0.16}."""
    return max(mpf(D) * h, abs(mpf(log_abs)), mpf("0.16"))
