import math
import warnings

import pytest
from hypothesis import given, strategies as st

from linear_ea.bounds import (
    additive_drift_lower,
    bound_table,
    constant_mut_lower,
    constant_mut_upper,
    general_lower_bound,
    general_upper_bound,
    mult_drift_lower,
    mult_drift_upper,
    onemax_drift_upper,
    refined_upper_bound,
)
from linear_ea.oracles import solve_onemax_chain


def test_multiplicative_upper():
    delta = 1 / (math.e * 100)
    exp_bound, thr, prob = mult_drift_upper(delta, 100, t=3)
    assert exp_bound == pytest.approx(math.e * 100 * (math.log(100) + 1))
    assert exp_bound == pytest.approx(1523.6, abs=0.1)
    assert thr == pytest.approx(2067.3, abs=0.1)
    assert prob == pytest.approx(math.exp(-3))
    assert mult_drift_upper(1, 1, 0)[0] == 1


def test_multiplicative_lower():
    assert mult_drift_lower(0.01, 0.1, 100, 10) == pytest.approx(188.394, abs=1e-3)
    assert mult_drift_lower(0.01, 1.0, 100, 10) == 0
    with pytest.raises(ValueError):
        mult_drift_lower(0.01, 0.1, 10, 10)


def test_additive_lower():
    assert additive_drift_lower(10, 2) == 5
    assert additive_drift_lower(3, 3) == 1
    with pytest.raises(ValueError):
        additive_drift_lower(0, 1)


def test_general_upper_bound():
    assert general_upper_bound(100, 0.01, 2, 1) == pytest.approx(5419.7, rel=5e-3)
    with pytest.raises(ValueError):
        general_upper_bound(100, 0.01, 1.0)


@given(st.integers(2, 500), st.floats(1e-4, 0.99), st.floats(1.01, 10), st.floats(0, 10))
def test_general_upper_increasing_in_t(n, p, alpha, t):
    lo, hi = general_upper_bound(n, p, alpha, t), general_upper_bound(n, p, alpha, t + 1)
    assert hi >= lo
    if hi < 1e12:
        assert hi > lo


def test_constant_mutation_leading_terms():
    assert constant_mut_upper(1000, 1) == pytest.approx(18778, abs=1)
    assert constant_mut_upper(1000, 2) == pytest.approx(25521, abs=1)
    assert constant_mut_lower(1000, 2) == constant_mut_upper(1000, 2)


def test_refined_upper_bound():
    assert refined_upper_bound(100) == pytest.approx(1795.5, abs=0.1)
    exp_bound, thr = refined_upper_bound(100, t=2)
    assert thr == pytest.approx(2067.3, abs=0.1)
    with pytest.raises(ValueError):
        refined_upper_bound(3)


def test_refined_bound_exceeds_exact_onemax():
    for n in range(4, 61):
        assert solve_onemax_chain(n, 1 / n).mean_runtime <= refined_upper_bound(n) + 10


def test_general_lower_bound():
    assert general_lower_bound(100, 0.01) == pytest.approx(1258.1, abs=0.1)
    ratio = general_lower_bound(1000, 1 / 1000) / (math.e * 1000 * math.log(1000))
    assert 0.99 <= ratio <= 1.01
    with pytest.raises(ValueError, match="outside theorem regime"):
        general_lower_bound(100, 0.5)


def test_general_lower_below_refined_upper():
    for n in range(10, 1001):
        assert general_lower_bound(n, 1 / n) <= refined_upper_bound(n)


def test_general_lower_warns_above_half():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        value = general_lower_bound(2, 0.6)
    assert caught and value > 0


def test_exact_chain_below_general_upper():
    for n in range(10, 201, 10):
        for c in (0.5, 1, 2):
            assert solve_onemax_chain(n, c / n).mean_runtime <= general_upper_bound(n, c / n, 2, 1)


def test_lower_bound_leading_term_approached_slowly():
    # the dropped (1 - o(1)) factor still matters at these sizes: the exact
    # mean sits below the leading term but the gap shrinks with n
    ratios = [solve_onemax_chain(n, 1 / n).mean_runtime / general_lower_bound(n, 1 / n) for n in (10, 50, 200, 1000)]
    assert all(r < 1 for r in ratios)
    assert ratios == sorted(ratios)


def test_onemax_drift_upper():
    assert onemax_drift_upper(1, 2, 0.5) == 0.5
    assert onemax_drift_upper(7, 7, 0.2) == pytest.approx(7 * 0.2)
    assert onemax_drift_upper(0, 9, 0.2) == 0


@given(st.integers(4, 300), st.floats(1e-3, 0.3), st.floats(1.01, 4), st.floats(0, 5))
def test_bounds_are_pure(n, p, alpha, t):
    assert bound_table(n, p, alpha, t) == bound_table(n, p, alpha, t)


def test_bound_table_flags():
    rows = {(r.bound, r.kind): r for r in bound_table(100, 0.01, 2, 1)}
    assert not rows["general-upper", "expectation-upper"].asymptotic_terms_dropped
    assert rows["refined-upper", "expectation-upper"].asymptotic_terms_dropped
    assert rows["general-lower", "expectation-lower"].value == pytest.approx(1258.1, abs=0.1)
    assert rows["general-upper", "tail"].tail_prob == pytest.approx(math.exp(-1))
