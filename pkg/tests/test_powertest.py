import gmpy2
import pytest
from sympy import primerange

from fibpowers.powertest import (LOG_OMEGA_OVER_LOG2, check_witness, exponent_cap,
                                 find_witness, is_perfect_power, scan_range)
from fibpowers.seqcore import DomainError, SeqKind


def test_examples():
    assert find_witness("fib", 13, 2) is not None
    assert not is_perfect_power(233, 2)
    assert find_witness("fib", 12, 2) is None
    assert find_witness("fib", 6, 3) is None
    w = find_witness("lucas", 4, 2)
    assert w is not None and check_witness("lucas", 4, 2, w.l)


def test_exponent_cap_never_underestimates():
    import mpmath
    with mpmath.workdps(60):
        r = mpmath.log((1 + mpmath.sqrt(5)) / 2) / mpmath.log(2)
        assert mpmath.mpf(str(LOG_OMEGA_OVER_LOG2)) >= r
        for n in (13, 100, 2000, 25000, 10 ** 6):
            assert exponent_cap(n) == int(mpmath.floor(n * r))


def test_witnesses_are_sound_against_exact_roots():
    for n in range(3, 61):
        f = int(gmpy2.fib(n))
        for p in primerange(2, 40):
            w = find_witness("fib", n, p)
            if w is not None:
                assert not is_perfect_power(f, p)
                # independent exponentiation path
                assert pow(f % w.l, (w.l - 1) // p, w.l) == w.residue != 1
            elif n >= 13:
                # past the small exceptions a missing witness means a genuine power
                assert is_perfect_power(f, p)


def test_check_witness_rejects_bad_data():
    assert not check_witness("fib", 13, 2, 7)        # 7 = 2 mod 5
    assert not check_witness("fib", 13, 4, 41)       # exponent not prime
    assert not check_witness("fib", 12, 2, 11)       # 144 is a square


def test_scan_small_range_parallel_matches_serial():
    a = scan_range("fib", 13, 200, workers=1, chunk=50)
    b = scan_range("fib", 13, 200, workers=2, chunk=50)
    assert a.ok and b.ok and a.checked == b.checked
    assert [w.to_json() for w in a.witnesses] == [w.to_json() for w in b.witnesses]


def test_scan_rejects_bad_ranges():
    with pytest.raises(DomainError):
        scan_range("fib", 12, 100)
    with pytest.raises(DomainError):
        scan_range("lucas", 3, 100)
    with pytest.raises(DomainError):
        scan_range("fib", 100, 99)


@pytest.mark.slow
def test_full_scan_25000():
    for kind, lo in ((SeqKind.FIB, 13), (SeqKind.LUCAS, 4)):
        assert scan_range(kind, lo, 25000, workers=4).ok
