import gmpy2
import pytest
from hypothesis import given, settings, strategies as st
from sympy import primerange

from fibpowers.seqcore import (DomainError, SeqKind, fib_lucas_mod, fib_mod, h_n_exact,
                               h_n_mod, lucas_mod, mod4_table, period_info, period_k,
                               period_m, sqrt5_mod)

PRIMES = [l for l in primerange(2, 1000) if l != 5]


def naive_pair_table(n_max, l):
    f, g = [0, 1 % l], [2 % l, 1 % l]
    for _ in range(n_max - 1):
        f.append((f[-1] + f[-2]) % l)
        g.append((g[-1] + g[-2]) % l)
    return f, g


@pytest.mark.parametrize("n,l,f,g", [(12, 1009, 144, 322), (0, 7, 0, 2), (3, 11, 2, 4)])
def test_known_values(n, l, f, g):
    pair = fib_lucas_mod(n, l)
    assert (pair.f, pair.g) == (f, g)


def test_agrees_with_recurrence_all_small_primes():
    for l in PRIMES:
        f, g = naive_pair_table(10_000, l)
        for n in list(range(0, 200)) + list(range(9_800, 10_001)):
            pair = fib_lucas_mod(n, l)
            assert (pair.f, pair.g) == (f[n], g[n])


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(PRIMES))
def test_agrees_with_exact_big_integers(n, l):
    pair = fib_lucas_mod(n, l)
    assert pair.f == gmpy2.fib(n) % l and pair.g == gmpy2.lucas(n) % l
    assert pair.identity_holds()


def test_identity_exact():
    for n in range(301):
        assert gmpy2.lucas(n) ** 2 - 5 * gmpy2.fib(n) ** 2 == 4 * (-1) ** n


def test_composite_modulus_helpers():
    for m in (1, 4, 6, 100, 2 ** 64 + 13):
        for n in range(60):
            assert fib_mod(n, m) == gmpy2.fib(n) % m
            assert lucas_mod(n, m) == gmpy2.lucas(n) % m


def test_domain_errors():
    with pytest.raises(DomainError):
        fib_lucas_mod(3, 5)
    with pytest.raises(DomainError):
        fib_lucas_mod(3, 9)
    with pytest.raises(DomainError):
        fib_lucas_mod(-1, 7)
    with pytest.raises(DomainError):
        period_k(7)


@pytest.mark.parametrize("l,m", [(11, 10), (3, 8), (7, 16)])
def test_period_m_examples(l, m):
    assert period_m(l) == m


def test_periodicity():
    for l in primerange(2, 200):
        if l == 5:
            continue
        m = period_m(l)
        f, g = naive_pair_table(3 * m + 2, l)
        for n in range(2 * m):
            assert f[n + m] == f[n] and g[n + m] == g[n]


def test_period_k():
    assert period_k(11) == 30
    assert period_k(19) == 18
    info = period_info(31)
    assert (info.m_of_l, info.k_of_l) == (30, 30)
    assert period_info(7).k_of_l is None


@pytest.mark.parametrize("l,s", [(11, 4), (19, 9), (31, 6)])
def test_sqrt5_examples(l, s):
    assert sqrt5_mod(l) == s


def test_sqrt5_exhaustive_oracle():
    for l in primerange(7, 3000):
        if l % 5 not in (1, 4):
            with pytest.raises(DomainError):
                sqrt5_mod(l)
            continue
        roots = [x for x in range(l) if (x * x - 5) % l == 0]
        assert sqrt5_mod(l) == min(roots)


@pytest.mark.parametrize("n,l,h", [(1, 7, 1), (5, 13, 2), (7, 11, 7)])
def test_h_n_examples(n, l, h):
    assert h_n_mod(n, l) == h


def test_h_n_is_one_mod_4():
    for n in range(1, 1001):
        if n % 6 in (1, 5):
            assert h_n_exact(n) % 4 == 1
            assert h_n_exact(n) % 101 == h_n_mod(n, 101)
    with pytest.raises(DomainError):
        h_n_mod(3, 7)


def test_mod4_table():
    assert mod4_table(0) == (2, 0)
    assert mod4_table(4) == (3, 3)
    assert mod4_table(600) == (2, 0)
    for n in range(601):
        assert mod4_table(n) == (gmpy2.lucas(n) % 4, gmpy2.fib(n) % 4)


def test_seqkind_parse():
    assert SeqKind.parse("fib") is SeqKind.FIB
    assert SeqKind.parse("Lucas") is SeqKind.LUCAS
    assert SeqKind.parse(SeqKind.FIB) is SeqKind.FIB
    with pytest.raises(ValueError):
        SeqKind.parse("pell")
