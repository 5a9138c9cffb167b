import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pushspread.bounds import chernoff_tail, lemma1_tail, talagrand_tail
from pushspread.errors import DomainError


def test_chernoff_examples():
    b = chernoff_tail(100, 30)
    assert b.value == pytest.approx(2 * math.exp(-900 / 220))
    assert b.value == pytest.approx(0.0334, abs=1e-4)
    assert b.informative
    assert chernoff_tail(100, 0).value == 1.0
    assert chernoff_tail(100, 1e-9).value == 1.0
    assert not chernoff_tail(100, 1).informative


def test_talagrand_examples():
    b = talagrand_tail(100, 50, 3, 2)
    assert b.raw == pytest.approx(4 * math.exp(-2500 / 28800))
    assert b.value == 1.0 and not b.informative
    b = talagrand_tail(1e4, 1e4, 1, 2)
    assert b.value == pytest.approx(4 * math.exp(-78.125), rel=1e-12)
    assert b.value < 1e-33


def test_lemma1_examples():
    b = lemma1_tail(1e4, 0.1, 3)
    assert b.raw == pytest.approx(4 * math.exp(-100 / 211.2))
    assert b.value == 1.0
    b = lemma1_tail(1e6, 0.1, 3)
    assert b.value == pytest.approx(4 * math.exp(-1e4 / 211.2))
    assert b.value == pytest.approx(1.09e-20, rel=0.01)


def test_lemma1_applicability():
    assert lemma1_tail(1e4, 0.1, 3, n=10**5).applicable
    assert not lemma1_tail(100, 0.1, 3, n=10**5).applicable  # mu <= ln^2 n
    assert not lemma1_tail(1e4, 0.005, 3).applicable  # eps <= mu^-1/2


def test_domain_errors():
    with pytest.raises(DomainError):
        chernoff_tail(-1, 1)
    with pytest.raises(DomainError):
        chernoff_tail(1, -1)
    for args in ((0, 1, 1, 1), (1, 1, 0, 1), (1, 1, 1, -2), (1, -1, 1, 1)):
        with pytest.raises(DomainError):
            talagrand_tail(*args)
    with pytest.raises(DomainError):
        lemma1_tail(0, 0.1, 3)
    with pytest.raises(DomainError):
        lemma1_tail(10, 0.1, 2)
    with pytest.raises(DomainError):
        chernoff_tail(float("inf"), 1)


@given(st.floats(0, 1e6), st.floats(0, 1e6), st.floats(0, 1e6))
def test_chernoff_range_and_monotone(mu, t1, t2):
    a, b = sorted((t1, t2))
    ba, bb = chernoff_tail(mu, a).value, chernoff_tail(mu, b).value
    assert 0 <= bb <= ba <= 1


@given(st.floats(1e-3, 1e6), st.floats(0, 1e6), st.floats(0, 1e6), st.floats(1e-3, 10),
       st.floats(1e-3, 10))
def test_talagrand_range_and_monotone(m, t1, t2, r, c):
    a, b = sorted((t1, t2))
    ba, bb = talagrand_tail(m, a, r, c).value, talagrand_tail(m, b, r, c).value
    assert 0 <= bb <= ba <= 1


@given(st.floats(1e-3, 1e8), st.floats(1e-4, 10), st.floats(1e-4, 10), st.integers(3, 50))
def test_lemma1_range_and_monotone(mu, e1, e2, d):
    a, b = sorted((e1, e2))
    ba, bb = lemma1_tail(mu, a, d).value, lemma1_tail(mu, b, d).value
    assert 0 <= bb <= ba * (1 + 1e-12) <= 1 + 1e-12


def test_binomial_soundness():
    rng = np.random.default_rng(0)
    x = rng.binomial(300, 1 / 3, size=10**6)
    freq = np.mean(np.abs(x - 100) > 30)
    assert freq <= chernoff_tail(100, 30).value
