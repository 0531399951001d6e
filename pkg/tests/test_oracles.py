import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from linear_ea.bounds import onemax_drift_upper
from linear_ea.functions import LinearFunction, make_family
from linear_ea.oracles import (
    check_cdf_monotonicity,
    check_onemax_drift_bound,
    exact_mutation_ones_distribution,
    exact_one_step_drift,
    exact_one_step_drifts,
    onemax_drift_exact,
    random_test_function,
    run_verification_suite,
    solve_onemax_chain,
    verify_drift_condition,
)
from linear_ea.potentials import build_adaptive_potential, identity_potential


def _brute_force_drift(f, g, a, p):
    """Reference drift by looping over every flip mask."""
    n = f.n
    a = np.asarray(a)
    total = 0.0
    for mask in itertools.product((0, 1), repeat=n):
        m = np.array(mask)
        k = m.sum()
        prob = p**k * (1 - p) ** (n - k)
        y = a ^ m
        if f(y) <= f(a):
            total += prob * (float(np.dot(g, a)) - float(np.dot(g, y)))
    return total


def test_two_fair_flips():
    d = exact_mutation_ones_distribution(1, 2, Fraction(1, 2))
    assert d.probs == (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))


def test_zero_ones_gives_binomial():
    d = exact_mutation_ones_distribution(0, 6, Fraction(1, 3))
    assert d.probs == tuple(Fraction(math.comb(6, j) * 2 ** (6 - j), 3**6) for j in range(7))


@given(st.integers(1, 40), st.data(), st.fractions(min_value=0, max_value=1, max_denominator=50))
def test_exact_distribution_mean_and_mass(n, data, p):
    i = data.draw(st.integers(0, n))
    d = exact_mutation_ones_distribution(i, n, p)
    assert sum(d.probs) == 1
    assert d.mean() == i + (n - 2 * i) * p


@given(st.integers(1, 300), st.data(), st.floats(1e-4, 0.9999))
def test_float_distribution_mass_and_mean(n, data, p):
    i = data.draw(st.integers(0, n))
    d = exact_mutation_ones_distribution(i, n, p)
    assert abs(d.probs.sum() - 1) < 1e-12
    assert d.mean() == pytest.approx(i + (n - 2 * i) * p, rel=1e-9, abs=1e-9)
    assert d.residual < 1e-9


def test_float_matches_exact():
    d = exact_mutation_ones_distribution(5, 12, 0.25)
    e = exact_mutation_ones_distribution(5, 12, Fraction(1, 4))
    assert np.allclose(d.probs, [float(v) for v in e.probs], rtol=1e-12, atol=1e-15)


def test_cdf_monotonicity_small_example():
    a = exact_mutation_ones_distribution(1, 2, Fraction(1, 4)).cdf()
    b = exact_mutation_ones_distribution(2, 2, Fraction(1, 4)).cdf()
    assert a[0] == Fraction(3, 16) and b[0] == Fraction(1, 16)
    assert check_cdf_monotonicity(2, Fraction(1, 4)).passed


@pytest.mark.parametrize("n", [5, 13, 20])
def test_cdf_monotonicity_holds_up_to_half(n):
    for k in range(1, 11):
        assert check_cdf_monotonicity(n, Fraction(k, 20)).passed


def test_cdf_monotonicity_fails_above_half():
    v = check_cdf_monotonicity(10, Fraction(3, 4))
    assert not v.passed
    assert v.witness["cdf_a"] < v.witness["cdf_b"]
    assert v.info["pointwise_pmf_violations"]


def test_chain_small_cases():
    assert solve_onemax_chain(1, 0.5).expected_steps[1] == pytest.approx(2)
    c = solve_onemax_chain(2, 0.5)
    assert np.allclose(c.expected_steps, [0, 4, 4])
    assert c.mean_runtime == pytest.approx(4.0)  # 3 expected steps plus the initial evaluation


@given(st.integers(1, 60), st.floats(0.005, 0.5))
def test_chain_invariants(n, p):
    c = solve_onemax_chain(n, p)
    assert np.allclose(c.P.sum(axis=1), 1, atol=1e-12)
    assert np.all(np.triu(c.P, 1) == 0)
    E = c.expected_steps
    assert E[0] == 0
    assert np.all(np.isfinite(E))
    assert np.all(np.diff(E) >= -1e-9 * E[1:])
    # the dense solve forms 1 - P[i, i] and loses digits once leaving is rare
    if np.min(1 - np.diag(c.P)[1:]) > 1e-6:
        assert np.allclose(c.dense_expected_steps(), E, rtol=1e-9)


def test_forward_solve_exact_at_half():
    # at p = 1/2 every offspring is uniform, so E_i = 2^n for i >= 1
    c = solve_onemax_chain(29, 0.5)
    assert np.allclose(c.expected_steps[1:], 2.0**29, rtol=1e-12)


@given(st.integers(1, 60), st.floats(0.5, 0.95))
def test_chain_rows_above_half(n, p):
    c = solve_onemax_chain(n, p)
    assert np.allclose(c.P.sum(axis=1), 1, atol=1e-12)
    assert np.all(c.expected_steps[1:] >= 1)


def test_chain_rows_match_distribution():
    n, p = 9, 0.2
    c = solve_onemax_chain(n, p)
    for i in range(1, n + 1):
        probs = exact_mutation_ones_distribution(i, n, p).probs
        assert np.array_equal(c.P[i, :i], probs[:i])
        assert c.P[i, i] == pytest.approx(1 - probs[:i].sum(), abs=1e-15)


def test_chain_limit_and_absorbing_states():
    with pytest.raises(ValueError):
        solve_onemax_chain(2001, 0.001)
    with pytest.raises(ArithmeticError, match="absorbing non-target state"):
        solve_onemax_chain(1500, 0.999)


def test_chain_drift_equals_mask_enumeration():
    for n, p in [(6, 0.2), (8, 1 / 8), (5, 0.45)]:
        c = solve_onemax_chain(n, p)
        f = make_family("onemax", n)
        pot = identity_potential(n)
        for i in range(n + 1):
            a = np.zeros(n, np.uint8)
            a[:i] = 1
            assert exact_one_step_drift(f, pot, a, p) == pytest.approx(c.drift(i), rel=1e-12, abs=1e-15)
            assert float(onemax_drift_exact(i, n, Fraction(p).limit_denominator(1000))) == pytest.approx(
                c.drift(i), rel=1e-9, abs=1e-12)


def test_onemax_drift_example():
    f = make_family("onemax", 2)
    assert exact_one_step_drift(f, identity_potential(2), [1, 0], 0.5) == pytest.approx(0.25)
    assert onemax_drift_exact(1, 2, Fraction(1, 2)) == Fraction(1, 4) <= onemax_drift_upper(1, 2, 0.5)
    assert onemax_drift_exact(5, 5, Fraction(1, 5)) == 1


def test_onemax_drift_bound_small_grid():
    assert check_onemax_drift_bound(12, [Fraction(k, 20) for k in range(1, 11)]).passed


def test_mask_enumeration_matches_brute_force():
    rng = np.random.default_rng(0)
    for kind in ("binval", "random-uniform", "random-exponential", "onemax"):
        f = make_family(kind, 7, seed=3)
        pot = build_adaptive_potential(f, 0.2, 2.0)
        for _ in range(4):
            a = rng.integers(0, 2, 7)
            assert exact_one_step_drift(f, pot, a, 0.2) == pytest.approx(
                _brute_force_drift(f, pot.g, a, 0.2), rel=1e-10, abs=1e-14)


def test_drift_at_optimum_is_zero():
    f = make_family("binval", 5)
    assert exact_one_step_drift(f, build_adaptive_potential(f, 0.2, 2.0), np.zeros(5), 0.2) == 0


def test_binval_adaptive_drift_condition():
    f = make_family("binval", 3)
    pot = build_adaptive_potential(f, 1 / 3, 2.0)
    drift = exact_one_step_drift(f, pot, [1, 1, 1], 1 / 3)
    assert drift >= 0.5 * (1 / 3) * (4 / 9) * 7


def test_enumeration_size_limit():
    f = make_family("onemax", 17)
    with pytest.raises(ValueError, match="Monte Carlo"):
        exact_one_step_drift(f, identity_potential(17), np.ones(17), 0.1)


def test_refined_condition_onemax():
    assert verify_drift_condition(make_family("onemax", 8), "refined", 1 / 8).passed


def test_identity_potential_fails_on_binval():
    v = verify_drift_condition(make_family("binval", 8), "identity", 2 / 8)
    assert not v.passed
    assert v.witness["drift"] < v.witness["bound"]
    # the single top bit is the classic bad point
    top = [0] * 7 + [1]
    f = make_family("binval", 8)
    d = exact_one_step_drift(f, identity_potential(8), top, 2 / 8)
    assert d < (2 / 8) * (6 / 8) ** 7 * 0.5


@pytest.mark.parametrize("n", [4, 7, 10])
def test_adaptive_condition_random_functions(n):
    for idx in range(10):
        f = random_test_function(idx, n, seed=1)
        for p in (1 / n, 2 / n, 0.3):
            assert verify_drift_condition(f, "adaptive", p, 2.0, sample_count=16, seed=idx).passed


def test_refined_requires_standard_rate():
    with pytest.raises(ValueError):
        verify_drift_condition(make_family("onemax", 8), "refined", 0.2)


def test_verification_suite_small():
    verdicts = run_verification_suite(nmax=6, functions_per_n=5)
    assert [v.name for v in verdicts] == ["cdf-monotonicity", "drift-adaptive", "drift-refined",
                                          "onemax-drift-bound"]
    assert all(verdicts)


def test_superincreasing_shortcut_agrees_with_float_rule():
    w = LinearFunction([1, 2, 4, 8, 16])
    assert w.superincreasing
    near = LinearFunction([1, 2, 4, 8, 16.000001])
    assert near.superincreasing
    pot = identity_potential(5)
    a = np.array([1, 0, 1, 1, 0])
    assert exact_one_step_drift(w, pot, a, 0.3) == pytest.approx(_brute_force_drift(w, pot.g, a, 0.3))
