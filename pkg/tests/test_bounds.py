import math

import mpmath
import pytest
from mpmath import mpf
from sympy.solvers.diophantine.diophantine import diop_DN

from fibpowers.bounds import (FieldShape, LogMagnitude, PrecisionError, landau_c,
                              landau_c_quadratic, matveev_lower, modified_height, theta,
                              theta_fib, theta_lucas)


def regulator(disc):
    """log of the fundamental unit (t + u sqrt(D))/2 of discriminant D via continued fractions."""
    best = None
    for n in (4, -4):
        for t, u in diop_DN(disc, n):
            t, u = abs(t), abs(u)
            if u == 0:
                continue
            eps = (t + u * mpmath.sqrt(disc)) / 2
            best = eps if best is None else min(best, eps)
    return mpmath.log(best)


def test_regulator_oracle_known_values():
    assert abs(regulator(5) - mpmath.log((1 + mpmath.sqrt(5)) / 2)) < 1e-30
    assert abs(regulator(8) - mpmath.log(1 + mpmath.sqrt(2))) < 1e-30


@pytest.mark.parametrize("disc", [5, 8, 12, 13, 61, 94 * 4])
def test_landau_bound_dominates_regulator(disc):
    log_c = landau_c_quadratic(disc).ln_value
    assert log_c > mpmath.log(regulator(disc))


def test_landau_monotone_in_discriminant_bound():
    small = landau_c(FieldShape(2, 2, 0, 2, mpmath.log(5))).ln_value
    large = landau_c(FieldShape(2, 2, 0, 2, mpmath.log(10 ** 6))).ln_value
    assert large >= small


def test_field_shape_validation():
    with pytest.raises(ValueError):
        FieldShape(3, 2, 0, 2, mpf(1))
    with pytest.raises(ValueError):
        FieldShape(2, 2, 0, 4, mpf(1))


def _theta_fib_by_sums(p):
    """Independent evaluation: factorials by summing logs, Gamma through mpmath.gamma."""
    with mpmath.workprec(320):
        log_disc = (p - 1) * mpmath.log(10) + p * mpmath.log(p)
        best = None
        for t in range(1000):
            s = 2 - mpf(t) / 1000
            log_a = -mpf(p) / 2 * mpmath.log(mpmath.pi) + log_disc / 2
            v = (-p * mpmath.log(2) + mpmath.log(2) + s * log_a + p * mpmath.log(mpmath.gamma(s / 2))
                 + (p + 1) * mpmath.log(s) + (1 - p) * mpmath.log(s - 1))
            best = v if best is None or v < best else best
        log_fact = mpmath.fsum(mpmath.log(k) for k in range(1, p))
        return (mpmath.log(mpf("3.9")) + (p + 3) * mpmath.log(30) + mpf(13) / 2 * mpmath.log(p)
                + (p + 1) * mpmath.log(p - 1) + 2 * log_fact + mpmath.log(3 * p + 2)
                + mpmath.log(1 + mpmath.log(p * (p - 1))) + best)


def _theta_lucas_by_sums(p):
    with mpmath.workprec(320):
        d, r2 = 2 * p, p - 1
        log_disc = p * mpmath.log(5) + 2 * p * mpmath.log(p)
        best = None
        for t in range(1000):
            s = 2 - mpf(t) / 1000
            log_a = -r2 * mpmath.log(2) - mpf(d) / 2 * mpmath.log(mpmath.pi) + log_disc / 2
            v = (-2 * mpmath.log(2) + mpmath.log(2) + s * log_a
                 + 2 * mpmath.log(mpmath.gamma(s / 2)) + r2 * mpmath.log(mpmath.gamma(s))
                 + (d + 1) * mpmath.log(s) + (1 - d) * mpmath.log(s - 1))
            best = v if best is None or v < best else best
        log_fact = mpmath.fsum(mpmath.log(k) for k in range(1, p + 1))
        return (mpmath.log(67) + (p + 5) * mpmath.log(30) + (p + 2) * mpmath.log(p - 1)
                + 3 * mpmath.log(p) + mpf("5.5") * mpmath.log(p + 2) + 2 * log_fact
                + mpmath.log(1 + mpmath.log(2 * p * (p - 1))) + best)


@pytest.mark.parametrize("p", [7, 11, 13, 101])
def test_theta_independent_path(p):
    for ours, other in ((theta_fib(p)[0].ln_value, _theta_fib_by_sums(p)),
                        (theta_lucas(p)[0].ln_value, _theta_lucas_by_sums(p))):
        assert abs(ours - other) <= mpf(10) ** -30 * abs(other)


def test_theta_fib_7():
    n_max = theta_fib(7)[1]
    assert 46.0 < n_max.log10 <= 46.43
    assert n_max.is_below(100704598854427777024179418273944411482999002799)


def test_theta_monotone_in_p():
    for f in (theta_fib, theta_lucas):
        vals = [f(p)[1].ln_value for p in (7, 11, 13, 17, 19, 23)]
        assert vals == sorted(vals)
    assert theta("fib", 11)[1].ln_value > theta("fib", 7)[1].ln_value


def test_large_p_consistent_with_sieve_bounds():
    assert theta_fib(733)[1].log10 < math.log10(1.033) + 8733
    assert theta_lucas(283)[1].log10 < math.log10(4.938) + 3383


def test_theta_rejects_small_p():
    with pytest.raises(ValueError):
        theta_fib(5)


def test_log_magnitude_arithmetic_and_margins():
    a, b = LogMagnitude.of(10 ** 40), LogMagnitude.of(10 ** 7)
    assert abs((a * b).log10 - 47) < 1e-40
    assert abs((b ** 3).log10 - 21) < 1e-40
    assert a.compare(b) == 1 and b.compare(a) == -1
    with mpmath.workprec(256):
        close = LogMagnitude(a.ln_value + mpf(2) ** -250)
    with pytest.raises(PrecisionError):
        a.compare(close)
    wide = LogMagnitude(mpf(10), err=mpf("0.01"))
    with pytest.raises(PrecisionError):
        wide.compare(LogMagnitude(mpf("10.05")))


def test_matveev_spot_value_and_sign():
    with mpmath.workprec(256):
        v = matveev_lower(2, (1, 1, 1), mpmath.e)
        expected = -mpf("1.4") * mpf(30) ** 6 * mpf(3) ** mpf("4.5") * 4 * (1 + mpmath.log(2)) * 2
        assert abs(v - expected) < mpf(10) ** -60 * abs(expected)
        assert v < 0 and matveev_lower(2, (1, 1, 1), 10, real_case=False) < 0
    with pytest.raises(ValueError):
        matveev_lower(2, (1, 1), 10, n_logs=3)


def test_modified_height_floor():
    assert modified_height(1, mpf("0.01"), mpf("0.02")) == mpf("0.16")
    assert modified_height(2, mpf(1), mpf("0.5")) == 2
