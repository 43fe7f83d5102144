import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st
from sympy import factorint, primerange

from fibpowers.curves import get_curve
from fibpowers.seqcore import DomainError, SeqKind
from fibpowers.sieve import (DEFAULT_START_MODULUS, ResidueClassSet, SievePair, SieveSession,
                             intersect, l_candidates, n_set, n_set_fib, n_set_lucas, refine,
                             run_sieve)


def brute_trace(a2, a4, l, a6=0):
    count = 1
    squares = [0] * l
    for y in range(l):
        squares[y * y % l] += 1
    for x in range(l):
        count += squares[(x ** 3 + a2 * x * x + a4 * x + a6) % l]
    return l + 1 - count


def big_prime_factor(v, q):
    if v == 0:
        return True
    return any(r > q for r in factorint(abs(v)))


def brute_n_set(kind, l, q):
    """Independent N(l, q): plain recurrence, point counting and factorisation."""
    k = math.lcm(l - 1, 6)
    f, g = [0, 1], [2, 1]
    while len(f) < k + 2:
        f.append((f[-1] + f[-2]) % l)
        g.append((g[-1] + g[-2]) % l)
    e = get_curve("20A2" if kind == "fib" else "200B1")
    a_e = brute_trace(e.a2, e.a4, l, e.a6)
    out = []
    for n in range(k):
        if math.gcd(n, k) != 1:
            continue
        if kind == "fib":
            h = g[n % (l - 1)] if n % 6 == 1 else -g[n % (l - 1)]
            singular = (h * h + 4) % l == 0
            a = None if singular else brute_trace(h, -1, l)
        else:
            fn = f[n % (l - 1)]
            singular = (5 * fn * fn - 4) % l == 0
            a = None if singular else brute_trace(-5 * fn, 5, l)
        if singular:
            ok = big_prime_factor(l + 1 - a_e, q) or big_prime_factor(l + 1 + a_e, q)
        else:
            ok = big_prime_factor(a - a_e, q)
        if ok:
            out.append(n)
    return ResidueClassSet(k, out)


def test_n_11_5():
    s = n_set_fib(11, 5)
    assert s.modulus == 30 and s.residues == (1, 11, 19, 29)


@pytest.mark.parametrize("kind", ["fib", "lucas"])
@pytest.mark.parametrize("l", [11, 19, 29, 31, 41, 59, 61, 71])
@pytest.mark.parametrize("q", [5, 7])
def test_n_set_against_brute_force(kind, l, q):
    assert n_set(kind, l, q) == brute_n_set(kind, l, q)


def test_one_always_present_and_monotone_in_q():
    for l in primerange(11, 400):
        if l % 5 not in (1, 4):
            continue
        for kind in ("fib", "lucas"):
            s5, s7 = n_set(kind, l, 5), n_set(kind, l, 7)
            assert 1 in s5.residues
            assert set(s7.residues) <= set(s5.residues)


def test_sieve_prime_validation():
    with pytest.raises(DomainError):
        n_set_fib(13, 5)
    with pytest.raises(DomainError):
        SievePair(11, 4)


def brute_intersect(a, b):
    m = math.lcm(a.modulus, b.modulus)
    return ResidueClassSet(m, [x for x in range(m) if x in a and x in b])


residue_sets = st.integers(1, 1000).flatmap(
    lambda m: st.builds(ResidueClassSet, st.just(m), st.sets(st.integers(0, m - 1), max_size=12)))


@settings(max_examples=150, deadline=None)
@given(residue_sets, residue_sets)
def test_intersect_matches_brute_force(a, b):
    if math.lcm(a.modulus, b.modulus) > 10 ** 6:
        return
    assert intersect(a, b) == brute_intersect(a, b)
    assert intersect(a, b) == intersect(b, a)


@settings(max_examples=60, deadline=None)
@given(residue_sets, residue_sets, residue_sets)
def test_intersect_associative_idempotent(a, b, c):
    if math.lcm(a.modulus, b.modulus, c.modulus) > 10 ** 6:
        return
    assert intersect(intersect(a, b), c) == intersect(a, intersect(b, c))
    assert intersect(a, a) == a


def test_intersect_examples():
    assert intersect(ResidueClassSet(2, [1]), ResidueClassSet(3, [1])) == ResidueClassSet(6, [1])
    got = intersect(ResidueClassSet(6, [1, 5]), ResidueClassSet(30, [1, 11, 19, 29]))
    assert got.residues == (1, 11, 19, 29)


def test_refine_equals_intersect():
    cur = ResidueClassSet(6, [1, 5])
    for l in (11, 31, 19, 61):
        expected = intersect(cur, n_set_fib(l, 5))
        cur = refine(cur, SeqKind.FIB, l, 5)
        assert cur == expected


def test_l_candidates_order_and_divisibility():
    got = list(l_candidates(DEFAULT_START_MODULUS, 10 ** 5, start_bound=64))
    assert got == sorted(got) and len(got) == len(set(got))
    for l in got:
        assert DEFAULT_START_MODULUS % (l - 1) == 0 and l % 5 in (1, 4)
    brute = [l for l in primerange(7, 10 ** 5) if l % 5 in (1, 4) and DEFAULT_START_MODULUS % (l - 1) == 0]
    assert got == brute


def test_intermediate_state_and_laws():
    seen = []

    def progress(s, l):
        assert 1 in s.n_set.residues
        assert s.four_elements_present()
        seen.append(s.lower_bound)

    s = run_sieve("fib", 7, 5, max_prime=19, progress=progress)
    assert s.k_s == 6983776800
    assert s.n_set.residues == (1, 3491888399, 3491888401, 6983776799)
    assert all(a <= b for a, b in zip(seen, seen[1:]))


def test_checkpoint_resume_matches_uninterrupted(tmp_path):
    full = run_sieve("lucas", 7, 5, max_prime=37)
    path = tmp_path / "ckpt.json"
    stages = []

    class Killed(Exception):
        pass

    def checkpoint(s):
        s.save(str(path))
        stages.append(s.stage_modulus)
        if len(stages) == 2:
            raise Killed

    with pytest.raises(Killed):
        run_sieve("lucas", 7, 5, max_prime=37, checkpoint=checkpoint)
    data = json.loads(path.read_text())
    assert int(data["modulus_hex"], 16) > 0 and data["kind"] == "lucas"
    resumed = run_sieve("lucas", 7, 5, max_prime=37, session=SieveSession.load(str(path)))
    assert resumed.n_set == full.n_set
    assert [p.l for p in resumed.pairs] == [p.l for p in full.pairs]
    assert not list(tmp_path.glob(".ckpt-*"))


def test_lucas_p7_contradiction():
    from fibpowers.bounds import theta_lucas
    n_max = theta_lucas(7)[1]
    s = run_sieve("lucas", 7, 5, n_max_log=n_max.ln_value)
    assert s.status == "contradiction"
    assert s.lower_bound > 10 ** 56


def test_requires_q_below_p():
    with pytest.raises(DomainError):
        run_sieve("fib", 7, 7)
