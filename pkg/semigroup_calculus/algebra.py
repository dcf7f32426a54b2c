"""Weighted convolution algebra on a uniform time grid.

Grid functions stand for elements of L^1_w(R+), measures are a density plus
finitely many point masses. Integrals over (0, +inf) are truncated at the
grid horizon and every truncation reports the bound it used.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from semigroup_calculus.config import load_settings
from semigroup_calculus.errors import (
    GridError, WeightDivergenceError, TruncationWarning
)
from semigroup_calculus.quadrature import grid_integral

LOGGER = logging.getLogger(__name__)

# z values per chunk in laplace(); keeps the (chunk, count) phase matrix small
LAPLACE_CHUNK = 64


@dataclass(frozen=True)
class TimeGrid:
    step: float
    count: int

    def __post_init__(self):
        if not self.step > 0:
            raise GridError(f"grid step must be positive, got {self.step}")
        if self.count < 2:
            raise GridError(f"grid needs at least two nodes, got {self.count}")
        if not np.isfinite(self.step * (self.count - 1)):
            raise GridError("grid horizon is not finite")

    @classmethod
    def from_horizon(cls, step, horizon):
        return cls(step=float(step), count=int(round(horizon / step)) + 1)

    @classmethod
    def from_settings(cls, settings=None):
        settings = settings or load_settings()
        return cls.from_horizon(settings.step, settings.horizon)

    @property
    def horizon(self):
        return self.step * (self.count - 1)

    @property
    def times(self):
        return self.step * np.arange(self.count)

    def index_of(self, t, tol=1e-9):
        """Node index of an in-grid time; raises if t is not on the lattice."""
        k = int(round(t / self.step))
        if abs(k * self.step - t) > tol * max(1.0, abs(t)) or not 0 <= k < self.count:
            raise GridError(f"time {t} is not a node of the grid (step {self.step})")
        return k


def _check_same_grid(a, b):
    if a != b:
        raise GridError(f"grid mismatch: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class Weight:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.count,):
            raise GridError("weight samples do not match the grid")
        if not np.all(values > 0):
            raise GridError("weights must be strictly positive")
        object.__setattr__(self, "values", values)

    def at(self, t):
        return float(np.interp(t, self.grid.times, self.values))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.count,):
            raise GridError("samples do not match the grid")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.times))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.count, dtype=complex))

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.values - other.values)

    def scale(self, c):
        return GridFunction(self.grid, c * self.values)

    def l1_norm(self, rule="simpson"):
        return float(grid_integral(np.abs(self.values), self.grid.step, rule))


@dataclass(frozen=True, eq=False)
class MeasureRepr:
    """Density part plus point masses ``(location, mass)``."""
    density: GridFunction | None = None
    atoms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        atoms = tuple((float(t), complex(m)) for t, m in self.atoms)
        for t, _ in atoms:
            if t < 0:
                raise GridError(f"atom location must be nonnegative, got {t}")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def dirac(cls, t, mass=1.0):
        return cls(atoms=((t, mass),))

    @classmethod
    def from_density(cls, f):
        return cls(density=f)

    def __add__(self, other):
        if self.density is None:
            density = other.density
        elif other.density is None:
            density = self.density
        else:
            density = self.density + other.density
        return MeasureRepr(density, self.atoms + other.atoms)

    def scale(self, c):
        density = None if self.density is None else self.density.scale(c)
        return MeasureRepr(density, tuple((t, c * m) for t, m in self.atoms))

    @property
    def is_zero(self):
        no_density = self.density is None or not np.any(self.density.values)
        return no_density and all(m == 0 for _, m in self.atoms)


def exponential_weight(grid, lam):
    """u_lam(t) = exp(lam t)."""
    return Weight(grid, np.exp(lam * grid.times))


def constant_weight(grid, value=1.0):
    return Weight(grid, np.full(grid.count, float(value)))


def submultiplicativity_excess(w, max_points=512):
    """Largest relative excess of w(s+t) over w(s)w(t) on a sub-lattice of in-grid pairs."""
    stride = max(1, int(np.ceil(w.grid.count / max_points)))
    vals = w.values[::stride]
    n = vals.size
    a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    valid = a + b < n
    lhs = vals[(a + b)[valid]]
    rhs = vals[a[valid]] * vals[b[valid]]
    return float(np.max(lhs / rhs - 1.0))


def is_submultiplicative(w, tol=1e-9, max_points=512):
    return submultiplicativity_excess(w, max_points) <= tol


def regularized_weight(w, lam):
    """The weight t -> exp(lam t) sup_{s >= t} exp(-lam s) w(s), sampled on the grid.

    The running supremum is taken over the remaining grid nodes. When
    exp(-lam t) w(t) still increases at the horizon, the supremum over
    [t, +inf) cannot be certified and the lam is rejected.
    """
    t = w.grid.times
    damped = np.exp(-lam * t) * w.values
    window = damped[3 * damped.size // 4:-1]
    if window.size and damped[-1] > np.max(window):
        raise WeightDivergenceError(
            f"exp(-{lam} t) w(t) is still growing at the horizon {w.grid.horizon}; "
            "lambda must exceed the log of the growth bound"
        )
    tail_sup = np.maximum.accumulate(damped[::-1])[::-1]
    return Weight(w.grid, np.exp(lam * t) * tail_sup)


def convolve(f, g):
    """Trapezoid-rule convolution (f*g)(t_k) on the common grid, truncated at the horizon."""
    _check_same_grid(f.grid, g.grid)
    h = f.grid.step
    n = f.grid.count
    full = signal.fftconvolve(f.values, g.values)[:n]
    values = h * (full - 0.5 * (f.values[0] * g.values + g.values[0] * f.values))
    return GridFunction(f.grid, values)


def weighted_l1_norm(f, w, settings=None):
    _check_same_grid(f.grid, w.grid)
    settings = settings or load_settings()
    return float(grid_integral(np.abs(f.values) * w.values, f.grid.step, settings.quadrature))


def total_variation(mu, w, settings=None):
    """Weighted total variation of a measure: density part plus weighted atom masses."""
    total = 0.0
    if mu.density is not None:
        total += weighted_l1_norm(mu.density, w, settings)
    for t, m in mu.atoms:
        total += abs(m) * w.at(t)
    return total


def laplace(mu, z, settings=None):
    """Laplace transform of a measure at one point or an array of points."""
    settings = settings or load_settings()
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    result = np.zeros(z_arr.shape, dtype=complex)
    if mu.density is not None:
        grid = mu.density.grid
        t = grid.times
        f = mu.density.values
        for start in range(0, z_arr.size, LAPLACE_CHUNK):
            chunk = z_arr[start:start + LAPLACE_CHUNK]
            phase = np.exp(-np.outer(chunk, t))
            result[start:start + LAPLACE_CHUNK] = grid_integral(
                phase * f, grid.step, settings.quadrature, axis=1
            )
        tail = np.max(np.abs(f[-1] * np.exp(-z_arr * grid.horizon)))
        if tail > settings.tail_tolerance:
            warnings.warn(
                f"Laplace tail bound {tail:.3g} at the horizon exceeds {settings.tail_tolerance:g}",
                TruncationWarning,
                stacklevel=2,
            )
    for t0, m in mu.atoms:
        result += m * np.exp(-z_arr * t0)
    if np.ndim(z) == 0:
        return complex(result[0])
    return result


def v_lambda(grid, lam):
    """The dense-ideal witness t exp(-lam t)."""
    return GridFunction.from_function(grid, lambda t: t * np.exp(-lam * t))


def v_lambda_prime(grid, lam):
    return GridFunction.from_function(grid, lambda t: (1.0 - lam * t) * np.exp(-lam * t))


def v_n_alpha(grid, n, alpha):
    """Mollifier density whose Laplace transform is (n-alpha)^2/(z+n-alpha)^2."""
    c = n - alpha
    return GridFunction.from_function(grid, lambda t: c * c * t * np.exp(-c * t))


def dirac_support(n, grid):
    """Support endpoint a_n (snapped to the grid) of the n-th box kernel."""
    nodes = int(round(1.0 / (n * grid.step)))
    return nodes * grid.step


def dirac_member(n, grid, settings=None):
    """n-th member of the box-kernel Dirac sequence, n 1_[0, 1/n].

    The box is snapped to the grid and rescaled so that its quadrature
    integral is exactly one.
    """
    if n < 1:
        raise GridError(f"Dirac sequence index must be >= 1, got {n}")
    settings = settings or load_settings()
    nodes = int(round(1.0 / (n * grid.step)))
    if nodes < 2:
        raise GridError(
            f"Dirac member {n} is supported on fewer than two grid steps of {grid.step}"
        )
    if nodes >= grid.count:
        raise GridError(f"Dirac member {n} does not fit on a grid of horizon {grid.horizon}")
    values = np.zeros(grid.count)
    values[:nodes + 1] = 1.0
    values /= grid_integral(values, grid.step, settings.quadrature)
    return GridFunction(grid, values)


def shift(f, t):
    """f * delta_t: the translate t -> f(. - t), zero before t."""
    if t < 0:
        raise GridError(f"shift must be nonnegative, got {t}")
    grid = f.grid
    k = t / grid.step
    if abs(k - round(k)) < 1e-9:
        k = int(round(k))
        values = np.zeros_like(f.values)
        if k < grid.count:
            values[k:] = f.values[:grid.count - k]
        return GridFunction(grid, values)
    times = grid.times - t
    re = np.interp(times, grid.times, f.values.real, left=0.0)
    im = np.interp(times, grid.times, f.values.imag, left=0.0)
    return GridFunction(grid, re + 1j * im)


def fundamental_identity_check(f, fprime, t, settings=None):
    """L1 norm of f*delta_t - f + int_0^t (f'*delta_s) ds.

    The inner integral over s uses the left-endpoint rule on the grid, so
    the residual is first order in the step for smooth f.
    """
    _check_same_grid(f.grid, fprime.grid)
    settings = settings or load_settings()
    grid = f.grid
    scale = max(1.0, float(np.max(np.abs(f.values))))
    if abs(f.values[0]) > 1e-8 * scale:
        raise GridError(f"f(0) = {f.values[0]:.3g} must vanish")
    m = grid.index_of(t)
    n = grid.count
    cumulative = np.concatenate(([0.0], np.cumsum(fprime.values)))
    k = np.arange(n)
    width = np.minimum(m, k)
    # h * sum_{j < min(m, k)} f'(t_k - s_j)
    integral = grid.step * (cumulative[k + 1] - cumulative[k + 1 - width])
    residual = shift(f, t).values - f.values + integral
    return float(grid_integral(np.abs(residual), grid.step, settings.quadrature))
