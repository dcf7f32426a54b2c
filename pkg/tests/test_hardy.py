import math

import numpy as np
import pytest

from semigroup_calculus.algebra import GridFunction, convolve
from semigroup_calculus.errors import AliasingError, HalfPlaneError, OuterFunctionError
from semigroup_calculus.hardy import (
    BoundaryTable, FunctionClass, HalfPlaneFunction, boundary_samples, constant, default_witness, h1_norm,
    inverse_laplace_fft, outer_from_modulus, outer_regularizer, probe_points, tail_bound
)
from semigroup_calculus.reports import boundary_table_to_json, read_boundary_table, write_json


@pytest.fixture
def rational():
    return HalfPlaneFunction.from_text("1/((z+1)^2)", -1.0)


def test_boundary_samples(rational):
    table = boundary_samples(rational, 0.0, 64.0, 256)
    assert table.y.size == 256
    np.testing.assert_allclose(table.values, 1.0 / (1.0 + 1j * table.y) ** 2)
    exact_tail = 2.0 * (math.pi / 2 - math.atan(64.0))
    assert exact_tail <= table.tail_bound <= 2.01 / 64.0


def test_boundary_sample_count_must_be_power_of_two(rational):
    with pytest.raises(HalfPlaneError):
        boundary_samples(rational, 0.0, 8.0, 100)


def test_abscissa_left_of_half_plane(rational):
    with pytest.raises(HalfPlaneError):
        boundary_samples(rational, -1.5, 8.0, 64)


def test_pole_is_reported():
    F = HalfPlaneFunction.from_text("1/(z+1)", -2.0)
    with pytest.raises(HalfPlaneError):
        F(np.array([-1.0 + 0j]))


def test_slow_decay_has_no_tail_bound():
    F = HalfPlaneFunction.from_text("1/(z+1)", -1.0)
    assert tail_bound(F, 0.0, 100.0) == math.inf
    assert tail_bound(constant(0.0, 0.0), 0.0, 100.0) == 0.0


def test_inverse_laplace_of_double_pole(rational, grid, settings):
    est = inverse_laplace_fft(rational, -0.5, grid, settings)
    exact = GridFunction.from_function(grid, lambda t: t * np.exp(-t))
    assert (est.value - exact).l1_norm() <= 1e-4
    assert 0.0 <= est.leakage <= est.budget <= settings.aliasing_tolerance
    assert np.all(est.value.values.imag == 0)


def test_inverse_laplace_of_triple_pole(grid, settings):
    F = HalfPlaneFunction.from_text("2/((z+1)^3)", -1.0)
    est = inverse_laplace_fft(F, 0.0, grid, settings)
    exact = GridFunction.from_function(grid, lambda t: t * t * np.exp(-t))
    assert (est.value - exact).l1_norm() <= 1e-4


def test_inverse_laplace_vanishes_at_the_origin(grid, settings):
    F = HalfPlaneFunction.from_text("1/((z+2)^2)", -2.0)
    est = inverse_laplace_fft(F, -1.0, grid, settings)
    exact = GridFunction.from_function(grid, lambda t: t * np.exp(-2.0 * t))
    assert est.value.values[0] == 0.0
    assert np.max(np.abs(est.value.values - exact.values)) <= 1e-4


def test_inverse_laplace_of_zero(grid, settings):
    est = inverse_laplace_fft(constant(0.0, 0.0, FunctionClass.H1), 0.0, grid, settings)
    assert not np.any(est.value.values)
    assert est.budget == 0.0


def test_inverse_laplace_is_independent_of_abscissa(rational, grid, settings):
    first = inverse_laplace_fft(rational, -0.5, grid, settings)
    second = inverse_laplace_fft(rational, 0.0, grid, settings)
    assert (first.value - second.value).l1_norm() <= 1e-4


def test_convolution_theorem(grid, settings):
    F = HalfPlaneFunction.from_text("1/((z+1)^2)", -0.5)
    G = HalfPlaneFunction.from_text("1/((z+2)^2)", -0.5)
    joint = inverse_laplace_fft(F.product(G), -0.5, grid, settings).value
    separate = convolve(
        inverse_laplace_fft(F, -0.5, grid, settings).value,
        inverse_laplace_fft(G, -0.5, grid, settings).value,
    )
    assert (joint - separate).l1_norm() <= 1e-3


def test_inverse_laplace_needs_h1(grid, settings):
    F = HalfPlaneFunction.from_text("exp(-z)", 0.0, FunctionClass.HINF)
    with pytest.raises(HalfPlaneError):
        inverse_laplace_fft(F, 0.0, grid, settings)


def test_aliasing_is_reported(grid, settings):
    F = HalfPlaneFunction.from_text("1/(z+1)", -1.0)
    with pytest.raises(AliasingError):
        inverse_laplace_fft(F, 0.0, grid, settings)


def test_outer_of_zero_modulus_is_one(settings):
    F = outer_from_modulus(lambda y: np.zeros_like(y), 0.0, settings)
    np.testing.assert_allclose(F(probe_points(0.5)), 1.0, atol=1e-12)
    assert F.outer


def test_outer_matches_its_modulus(settings):
    F = outer_from_modulus(lambda y: -np.log1p(y * y), 0.0, settings)
    z = probe_points(0.5, radius=2.0)
    exact = 1.0 / (z + 1.0) ** 2
    assert np.max(np.abs(F(z) / exact - 1.0)) <= 1e-3


def test_outer_modulus_of_bounded_random_log(settings):
    rng = np.random.default_rng(17)
    cos_coeffs, sin_coeffs = rng.uniform(-0.5, 0.5, size=(2, 4))
    k = np.arange(1, 5)

    def u(y):
        theta = np.multiply.outer(2.0 * np.arctan(np.asarray(y, dtype=float)), k)
        return np.cos(theta) @ cos_coeffs + np.sin(theta) @ sin_coeffs

    F = outer_from_modulus(u, 0.0, settings)
    y = np.linspace(-3.0, 3.0, 13)
    ratio = np.abs(F(1e-3 + 1j * y)) / np.exp(u(y))
    np.testing.assert_allclose(ratio, 1.0, atol=1e-2)


def test_outer_from_stored_boundary_table(tmp_path, settings):
    y = np.linspace(-64.0, 64.0, 4096)
    u = 0.5 * np.log((4.0 + y * y) / (1.0 + y * y))
    path = tmp_path / "modulus.json"
    write_json(str(path), boundary_table_to_json(BoundaryTable(y, u + 0j, 0.0, 0.0)))

    table = read_boundary_table(str(path), 0.0)
    assert table.tail_bound == math.inf
    F = outer_from_modulus(table, 0.0, settings)
    z = probe_points(0.5, radius=2.0)
    assert np.max(np.abs(F(z) / ((z + 2.0) / (z + 1.0)) - 1.0)) <= 1e-3


@pytest.mark.parametrize("text", ["{", "[[0, 1]]", "[[1, 0, 0], [0, 0, 0]]", "[[\"a\", 0, 0], [1, 0, 0]]"])
def test_malformed_boundary_table(tmp_path, text):
    path = tmp_path / "table.json"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(HalfPlaneError):
        read_boundary_table(str(path), 0.0)


def test_outer_rejects_left_points(settings):
    F = outer_from_modulus(lambda y: np.zeros_like(y), 0.0, settings)
    with pytest.raises(HalfPlaneError):
        F(np.array([-0.5 + 0j]))


def test_outer_rejects_infinite_modulus(settings):
    with pytest.raises(OuterFunctionError):
        outer_from_modulus(lambda y: np.where(y > 0, np.inf, 0.0), 0.0, settings)


def test_outer_regularizer_converges(settings):
    F = HalfPlaneFunction.from_text("1/((z+1)^2)", 0.0, outer=True)
    z = probe_points(0.5)
    sups = [
        float(np.max(np.abs(F(z) * outer_regularizer(F, n, 0.0, settings)(z) - 1.0)))
        for n in (2, 4, 8, 12)
    ]
    assert all(x > y for x, y in zip(sups, sups[1:]))
    assert sups[-1] <= 0.1


def test_regularizer_of_one_is_one(settings):
    F = constant(1.0, 0.0)
    np.testing.assert_allclose(outer_regularizer(F, 5, 0.0, settings)(probe_points(0.5)), 1.0, atol=1e-12)


def test_h1_norm(rational, settings):
    at_zero = h1_norm(rational, 0.0, settings)
    at_one = h1_norm(rational, 1.0, settings)
    assert at_zero.value == pytest.approx(math.pi, rel=1e-6)
    assert at_one.value == pytest.approx(math.pi / 2, rel=1e-6)
    assert at_one.value < at_zero.value


def test_point_values_bounded_by_h1_norm(rational, settings):
    norm = h1_norm(rational, 0.0, settings).value
    z = probe_points(0.1)
    assert np.all(np.abs(rational(z)) <= norm / (2 * math.pi * z.real))


def test_default_witness():
    H = default_witness(-0.5)
    assert H.outer
    assert H(np.array([0.5 + 0j]))[0] == pytest.approx(1.0 / 4.0)
    assert default_witness(0.0, power=3)(np.array([0j]))[0] == pytest.approx(2.0)


def test_product_keeps_symmetry(rational):
    G = HalfPlaneFunction(0.0, sampler=lambda z: np.exp(-z), symmetric=True)
    P = rational.product(G)
    assert P.alpha == 0.0
    assert P.symmetric
    assert P(np.array([1.0 + 0j]))[0] == pytest.approx(math.exp(-1.0) / 4.0)
