import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from linear_ea.functions import LinearFunction, make_family
from linear_ea.potentials import (
    build_adaptive_potential,
    build_refined_potential,
    default_alpha,
    identity_potential,
    initial_value_bound,
    potential_to_csv,
    potential_value,
)

weights = st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=2, max_size=40).map(sorted)


def test_adaptive_follows_weight_ratios():
    # alpha p / (1-p)^(n-1) = 3/2, so gamma = (1, 2.5, 6.25)
    pot = build_adaptive_potential(LinearFunction([1, 2, 4]), 1 / 3, 2.0)
    assert np.allclose(pot.cap, [1, 2.5, 6.25])
    assert np.allclose(pot.g, [1, 2, 4])


def test_adaptive_caps_then_follows_ratio():
    pot = build_adaptive_potential(LinearFunction([1, 100, 101]), 1 / 3, 2.0)
    assert np.allclose(pot.g, [1, 2.5, 2.525])
    # x = (x_1, x_2, x_3) = (1, 0, 1)
    assert potential_value(pot, [1, 0, 1]) == pytest.approx(3.525)


def test_refined_distinct_weights():
    pot = build_refined_potential(LinearFunction([1, 2, 3, 4, 5]))
    assert np.allclose(pot.g, [1, 1.25, 1.5625, 1.953125, 2.44140625])
    assert potential_value(pot, np.ones(5)) == pytest.approx(8.20703125)


def test_refined_ties_use_first_index():
    pot = build_refined_potential(LinearFunction([1, 1, 2, 2, 3]))
    assert np.allclose(pot.g, [1, 1, 1.5625, 1.5625, 2.44140625])


def test_refined_onemax_is_flat():
    assert np.array_equal(build_refined_potential(make_family("onemax", 5)).g, np.ones(5))


def test_refined_needs_two_bits():
    with pytest.raises(ValueError):
        build_refined_potential(LinearFunction([1.0]))


def test_alpha_must_exceed_one():
    with pytest.raises(ValueError):
        build_adaptive_potential(make_family("binval", 4), 0.25, 1.0)


def test_potential_zero_at_optimum():
    pot = build_adaptive_potential(make_family("binval", 6), 1 / 6, 2.0)
    assert potential_value(pot, np.zeros(6)) == 0


def test_initial_value_bounds():
    assert initial_value_bound("refined", 100) == pytest.approx(math.log(100) + 1)
    assert initial_value_bound("adaptive", 100, 0.01, 2.0) == pytest.approx(9.0194, abs=1e-3)
    assert initial_value_bound("identity", 100) == pytest.approx(math.log(100))
    with pytest.raises(ValueError):
        initial_value_bound("other", 10)


def test_default_alpha():
    assert default_alpha(3) > 1
    assert default_alpha(10**6) == pytest.approx(math.log(math.log(10**6)))


@given(weights, st.floats(min_value=1e-3, max_value=0.5), st.floats(min_value=1.01, max_value=20))
def test_adaptive_invariants(w, p, alpha):
    f = LinearFunction(w)
    pot = build_adaptive_potential(f, p, alpha)
    g, gamma = pot.g, pot.cap
    finite = np.isfinite(g)
    assert g[0] == 1.0
    assert np.all(g[finite] <= gamma[finite] * (1 + 1e-12))
    # ratios never exceed the weight ratios
    lg = pot.log_g
    assert np.all(np.diff(lg) <= np.diff(np.log(f.weights)) + 1e-9)
    assert np.all(np.diff(lg) >= -1e-12)


@given(weights)
def test_refined_invariants(w):
    f = LinearFunction(w)
    pot = build_refined_potential(f)
    n = f.n
    assert pot.g[0] == 1.0
    assert np.all(np.diff(pot.g) >= 0)
    assert np.all(pot.g <= (1 + 1 / (n - 1)) ** np.arange(n) * (1 + 1e-12))
    assert math.log(potential_value(pot, np.ones(n))) <= initial_value_bound("refined", n) + 1e-12


@given(st.integers(2, 200), st.floats(min_value=1e-3, max_value=0.5), st.floats(min_value=1.01, max_value=5))
def test_adaptive_initial_value_bound_holds(n, p, alpha):
    pot = build_adaptive_potential(make_family("binval", min(n, 1024)), p, alpha)
    total = np.logaddexp.reduce(pot.log_g)
    assert total <= initial_value_bound("adaptive", pot.n, p, alpha) + 1e-9


def test_adaptive_huge_gamma_stays_finite_in_logs():
    pot = build_adaptive_potential(make_family("binval", 1000), 0.4, 2.0)
    assert np.all(np.isfinite(pot.log_g))
    assert np.allclose(np.diff(pot.log_g), math.log(2))


def test_identity_potential():
    pot = identity_potential(4)
    assert potential_value(pot, [1, 1, 0, 1]) == 3


def test_potential_csv(tmp_path):
    f = LinearFunction([1, 2, 4])
    text = potential_to_csv(build_adaptive_potential(f, 1 / 3, 2.0), f, tmp_path / "g.csv")
    lines = text.splitlines()
    assert lines[0] == "i,w_i,gamma_i,g_i"
    assert lines[3].split(",") == ["3", "4.0", "6.25", "4.0"]
    assert (tmp_path / "g.csv").read_text() == text
