import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings as hyp_settings, strategies as st

from semigroup_calculus.algebra import (
    GridFunction, MeasureRepr, TimeGrid, Weight, constant_weight, convolve, dirac_member,
    dirac_support, exponential_weight, fundamental_identity_check, is_submultiplicative, laplace,
    regularized_weight, shift, total_variation, v_lambda, v_lambda_prime, v_n_alpha,
    weighted_l1_norm
)
from semigroup_calculus.errors import GridError, TruncationWarning, WeightDivergenceError

V1_SECOND_DERIVATIVE_L1 = 1.0 + 2.0 * math.exp(-2.0)

# t^k exp(-r t) with k >= 1, so every sample vanishes at t = 0
smooth_terms = st.tuples(
    st.integers(min_value=1, max_value=3),
    st.floats(min_value=0.5, max_value=3.0),
    st.floats(min_value=-2.0, max_value=2.0),
)


def _sample(grid, terms):
    t = grid.times
    return GridFunction(grid, sum(c * t ** k * np.exp(-r * t) for k, r, c in terms))


def test_time_grid_rejects_bad_shapes():
    with pytest.raises(GridError):
        TimeGrid(step=0.0, count=10)
    with pytest.raises(GridError):
        TimeGrid(step=0.1, count=1)


def test_time_grid_from_settings(grid):
    assert grid.step == 2.0 ** -10
    assert grid.horizon == pytest.approx(40.0)
    assert grid.index_of(0.5) == 512
    with pytest.raises(GridError):
        grid.index_of(0.5 + grid.step / 3)


def test_weight_requires_positive_samples(coarse_grid):
    with pytest.raises(GridError):
        Weight(coarse_grid, np.zeros(coarse_grid.count))


def test_exponential_weights_are_submultiplicative(coarse_grid):
    assert is_submultiplicative(exponential_weight(coarse_grid, 0.7))
    assert is_submultiplicative(constant_weight(coarse_grid, 2.0))
    assert not is_submultiplicative(constant_weight(coarse_grid, 0.5))


def test_regularized_weight_keeps_decreasing_weight(coarse_grid):
    w = exponential_weight(coarse_grid, -1.0)
    result = regularized_weight(w, 0.0)
    np.testing.assert_allclose(result.values, w.values)


def test_regularized_weight_of_constant(coarse_grid):
    result = regularized_weight(constant_weight(coarse_grid), 1.0)
    np.testing.assert_allclose(result.values, 1.0)


def test_regularized_weight_matches_brute_force_tail_max(coarse_grid):
    t = coarse_grid.times
    w = Weight(coarse_grid, np.exp(t) * (1 + np.sin(t) ** 2))
    result = regularized_weight(w, 2.0)
    damped = np.exp(-2.0 * t) * w.values
    expected = np.array([np.exp(2.0 * t[k]) * damped[k:].max() for k in range(t.size)])
    np.testing.assert_allclose(result.values, expected)
    assert np.all(result.values >= w.values * (1 - 1e-12))
    assert np.all(np.diff(np.exp(-2.0 * t) * result.values) <= 1e-12)


def test_regularized_weight_rejects_small_lambda(coarse_grid):
    with pytest.raises(WeightDivergenceError):
        regularized_weight(exponential_weight(coarse_grid, 1.0), 0.5)


def test_convolve_indicators_gives_hat(grid):
    box = GridFunction.from_function(grid, lambda t: (t <= 1.0).astype(float))
    hat = convolve(box, box)
    assert hat.values[grid.index_of(1.0)].real == pytest.approx(1.0, abs=1e-9)
    assert hat.values[grid.index_of(0.5)].real == pytest.approx(0.5, abs=1e-9)
    assert np.max(np.abs(hat.values)) == pytest.approx(1.0, abs=1e-9)


def test_convolve_with_zero(coarse_grid):
    f = v_lambda(coarse_grid, 1.0)
    assert not np.any(convolve(f, GridFunction.zeros(coarse_grid)).values)


def test_convolve_grid_mismatch(grid, coarse_grid):
    with pytest.raises(GridError):
        convolve(v_lambda(grid, 1.0), v_lambda(coarse_grid, 1.0))


@hyp_settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(smooth_terms, min_size=1, max_size=3), st.lists(smooth_terms, min_size=1, max_size=3))
def test_convolve_is_commutative(a, b):
    grid = TimeGrid.from_horizon(2.0 ** -6, 16.0)
    f, g = _sample(grid, a), _sample(grid, b)
    scale = float(np.max(np.abs(convolve(f, g).values))) + 1.0
    np.testing.assert_allclose(convolve(f, g).values, convolve(g, f).values, atol=1e-12 * scale)


@hyp_settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    st.lists(smooth_terms, min_size=1, max_size=2),
    st.lists(smooth_terms, min_size=1, max_size=2),
    st.lists(smooth_terms, min_size=1, max_size=2),
)
def test_convolve_is_associative(a, b, c):
    grid = TimeGrid.from_horizon(2.0 ** -6, 16.0)
    f, g, k = _sample(grid, a), _sample(grid, b), _sample(grid, c)
    left = convolve(convolve(f, g), k).values
    right = convolve(f, convolve(g, k)).values
    def magnitude(x):
        return GridFunction(grid, np.abs(x.values))

    # cancellation between terms of mixed sign is measured against |f| * |g| * |k|
    scale = float(np.max(convolve(convolve(magnitude(f), magnitude(g)), magnitude(k)).values.real)) + 1.0
    np.testing.assert_allclose(left, right, atol=1e-10 * scale)


def test_weighted_norm_of_convolution_is_submultiplicative():
    grid = TimeGrid.from_horizon(2.0 ** -8, 30.0)
    w = exponential_weight(grid, 0.5)
    f = GridFunction.from_function(grid, lambda t: t * np.exp(-2.0 * t))
    g = GridFunction.from_function(grid, lambda t: t ** 2 * np.exp(-3.0 * t))
    lhs = weighted_l1_norm(convolve(f, g), w)
    assert lhs <= weighted_l1_norm(f, w) * weighted_l1_norm(g, w) * (1 + 1e-3)


def test_laplace_of_convolution_is_product(grid):
    f = v_lambda(grid, 1.0)
    g = v_lambda(grid, 2.0)
    z = np.array([0.5 + 1.0j, 2.0 - 3.0j])
    lhs = laplace(MeasureRepr.from_density(convolve(f, g)), z)
    rhs = laplace(MeasureRepr.from_density(f), z) * laplace(MeasureRepr.from_density(g), z)
    np.testing.assert_allclose(lhs, rhs, atol=1e-5)


def test_weighted_l1_norm_examples(grid):
    ones = constant_weight(grid)
    assert weighted_l1_norm(v_lambda(grid, 1.0), ones) == pytest.approx(1.0, abs=1e-9)
    assert weighted_l1_norm(GridFunction.zeros(grid), ones) == 0.0
    spike = dirac_member(256, grid)
    shifted = shift(spike, 2.0)
    assert weighted_l1_norm(shifted, exponential_weight(grid, -1.0)) == pytest.approx(math.exp(-2.0), rel=5e-3)


def test_total_variation_adds_atoms(grid):
    mu = MeasureRepr.from_density(v_lambda(grid, 1.0)) + MeasureRepr.dirac(1.0, -2.0)
    assert total_variation(mu, constant_weight(grid)) == pytest.approx(3.0, abs=1e-9)


def test_measure_rejects_negative_atoms():
    with pytest.raises(GridError):
        MeasureRepr.dirac(-0.5)


def test_laplace_of_atom():
    z = 0.3 + 2.0j
    assert laplace(MeasureRepr.dirac(1.5), z) == pytest.approx(np.exp(-1.5 * z))


def test_laplace_of_witness_and_mollifier(grid):
    z = np.array([0.5 + 1.0j, 3.0, -0.2 + 4.0j])
    np.testing.assert_allclose(laplace(MeasureRepr.from_density(v_lambda(grid, 1.0)), z), 1 / (z + 1) ** 2, atol=1e-8)
    n, alpha = 4, -0.5
    c = n - alpha
    np.testing.assert_allclose(
        laplace(MeasureRepr.from_density(v_n_alpha(grid, n, alpha)), z), c * c / (z + c) ** 2, atol=1e-8
    )


def test_laplace_warns_on_heavy_tail(grid):
    f = GridFunction.from_function(grid, lambda t: np.exp(-0.1 * t))
    with pytest.warns(TruncationWarning):
        laplace(MeasureRepr.from_density(f), 0.0)


def test_dirac_members_have_unit_mass(grid, settings):
    for n in (1, 3, 17, 64, 200):
        f = dirac_member(n, grid)
        assert f.l1_norm(settings.quadrature) == pytest.approx(1.0, abs=1e-12)
        assert np.all(f.values.real >= 0)


def test_dirac_support_decreases(grid):
    supports = [dirac_support(n, grid) for n in range(1, 33)]
    assert all(a > b for a, b in zip(supports, supports[1:]))


def test_dirac_member_rejects_unresolved_index(grid):
    with pytest.raises(GridError):
        dirac_member(1000, grid)
    with pytest.raises(GridError):
        dirac_member(0, grid)


def test_convolution_with_dirac_sequence_approaches_f(grid):
    f = v_lambda(grid, 1.0)
    errors = [(convolve(f, dirac_member(n, grid)) - f).l1_norm() for n in (2, 8, 32)]
    assert errors[0] > errors[1] > errors[2]


def test_fundamental_identity_is_first_order(settings):
    bound = 8.0 * V1_SECOND_DERIVATIVE_L1
    for t in (0.25, 0.5, 1.0):
        residuals = []
        for step in (2.0 ** -10, 2.0 ** -11):
            grid = TimeGrid.from_horizon(step, 40.0)
            r = fundamental_identity_check(v_lambda(grid, 1.0), v_lambda_prime(grid, 1.0), t, settings)
            assert r <= bound * step
            residuals.append(r)
        assert 1.6 <= residuals[0] / residuals[1] <= 2.4


def test_fundamental_identity_other_examples(grid, settings):
    zero = GridFunction.zeros(grid)
    assert fundamental_identity_check(zero, zero, 0.5, settings) == 0.0
    f = GridFunction.from_function(grid, lambda t: t ** 2 * np.exp(-t))
    fp = GridFunction.from_function(grid, lambda t: (2 * t - t ** 2) * np.exp(-t))
    assert fundamental_identity_check(f, fp, 1.0, settings) <= 64.0 * grid.step


def test_fundamental_identity_needs_vanishing_start(grid, settings):
    f = GridFunction.from_function(grid, lambda t: np.exp(-t))
    with pytest.raises(GridError):
        fundamental_identity_check(f, f.scale(-1.0), 0.5, settings)
