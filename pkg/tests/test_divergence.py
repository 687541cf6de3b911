import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import jensenshannon
from scipy.special import rel_entr

from fedcure.divergence import avg_js, js, kl, pairwise_js
from fedcure.errors import InsufficientCoalitions, UnboundedDivergence

LN2 = math.log(2)


def simplex(k):
    # masses below the zero threshold are snapped to 0 so the scipy reference sees the same support
    weight = st.one_of(st.just(0.0), st.floats(1e-6, 1))
    return st.lists(weight, min_size=k, max_size=k).filter(lambda v: sum(v) > 1e-3).map(
        lambda v: np.array(v) / sum(v))


def test_kl_hand_values():
    assert kl([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl([1, 0], [0.5, 0.5]) == pytest.approx(LN2, abs=1e-12)
    assert kl([0.75, 0.25], [0.5, 0.5]) == pytest.approx(0.75 * math.log(1.5) + 0.25 * math.log(0.5), abs=1e-12)
    assert kl([0.75, 0.25], [0.5, 0.5]) == pytest.approx(0.130812, abs=1e-6)


def test_kl_unbounded_when_support_escapes():
    with pytest.raises(UnboundedDivergence):
        kl([0.5, 0.5], [1.0, 0.0])


def test_js_hand_values():
    assert js([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert js([1, 0], [0, 1]) == pytest.approx(LN2, abs=1e-12)
    # mixture (0.75, 0.25)
    expect = 0.5 * math.log(1 / 0.75) + 0.5 * (0.5 * math.log(0.5 / 0.75) + 0.5 * math.log(0.5 / 0.25))
    assert js([1, 0], [0.5, 0.5]) == pytest.approx(expect, abs=1e-12)
    assert js([1, 0], [0.5, 0.5]) == pytest.approx(0.215762, abs=1e-6)


def test_avg_js_three_coalitions():
    v = avg_js([[1, 0], [0, 1], [0.5, 0.5]])
    assert v == pytest.approx((LN2 + 2 * 0.2157615543388357) / 3, abs=1e-12)
    assert v == pytest.approx(0.374890, abs=1e-6)
    assert avg_js([[1, 0], [0, 1]]) == pytest.approx(LN2)
    assert avg_js([[0.2, 0.8]] * 4) == 0.0


def test_avg_js_needs_two():
    with pytest.raises(InsufficientCoalitions):
        avg_js([[1.0, 0.0]])


@settings(max_examples=200, deadline=None)
@given(simplex(5), simplex(5))
def test_kl_matches_scipy(p, q):
    q = 0.5 * p + 0.5 * q  # guarantees supp p within supp q
    assert kl(p, q) == pytest.approx(float(rel_entr(p, q).sum()), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(simplex(6), simplex(6))
def test_js_matches_scipy_and_is_bounded(p, q):
    ref = float(jensenshannon(p, q)) ** 2
    v = js(p, q)
    assert v == pytest.approx(ref, abs=1e-10)
    assert 0.0 <= v <= LN2
    assert v == js(q, p)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6).flatmap(lambda m: st.lists(simplex(4), min_size=m, max_size=m)))
def test_pairwise_matrix_agrees_with_scalar(dists):
    P = np.array(dists)
    D = pairwise_js(P)
    assert np.array_equal(D, D.T)
    assert np.all(np.diag(D) == 0)
    for i in range(len(P)):
        for j in range(i + 1, len(P)):
            assert D[i, j] == pytest.approx(js(P[i], P[j]), abs=1e-12)
