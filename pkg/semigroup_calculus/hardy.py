"""Holomorphic functions on right half-planes Re z > alpha.

A ``HalfPlaneFunction`` is backed either by an expression tree or by a
vectorized sampler. Boundary values are taken directly on the line
alpha + iR, which is where expression trees are defined.
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from semigroup_calculus import expr
from semigroup_calculus.algebra import GridFunction
from semigroup_calculus.config import load_settings
from semigroup_calculus.errors import AliasingError, HalfPlaneError, OuterFunctionError
from semigroup_calculus.quadrature import Estimate

LOGGER = logging.getLogger(__name__)

OUTER_CHUNK = 16


class FunctionClass(enum.Enum):
    H1 = "H1"
    HINF = "Hinf"
    SMIRNOV = "Smirnov"
    MEASURE_LAPLACE = "measure_laplace"


@dataclass(frozen=True, eq=False)
class HalfPlaneFunction:
    alpha: float
    body: object = None
    sampler: object = None
    class_tag: FunctionClass = FunctionClass.H1
    outer: bool = False
    symmetric: bool = None

    def __post_init__(self):
        if (self.body is None) == (self.sampler is None):
            raise HalfPlaneError("a half-plane function needs exactly one of an expression or a sampler")
        if self.symmetric is None:
            symmetric = self.body is not None and expr.is_conjugate_symmetric(self.body)
            object.__setattr__(self, "symmetric", symmetric)

    @classmethod
    def from_text(cls, src, alpha, class_tag=FunctionClass.H1, outer=False):
        return cls(alpha=float(alpha), body=expr.parse(src), class_tag=class_tag, outer=outer)

    @property
    def text(self):
        return expr.to_text(self.body) if self.body is not None else "<sampled>"

    def raw(self, z):
        z = np.asarray(z, dtype=complex)
        if self.body is not None:
            return expr.evaluate(self.body, z)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.asarray(self.sampler(z), dtype=complex)

    def __call__(self, z):
        values = self.raw(z)
        if not np.all(np.isfinite(values)):
            bad = np.asarray(z, dtype=complex).ravel()[~np.isfinite(values.ravel())][0]
            raise HalfPlaneError(f"{self.text} is not finite at z = {bad:.6g}")
        return values

    def product(self, other, class_tag=None):
        """Pointwise product on the smaller half-plane."""
        alpha = max(self.alpha, other.alpha)
        tag = class_tag or FunctionClass.H1
        if self.body is not None and other.body is not None:
            return HalfPlaneFunction(alpha, body=expr.Mul(self.body, other.body), class_tag=tag)
        return HalfPlaneFunction(
            alpha,
            sampler=lambda z: self.raw(z) * other.raw(z),
            class_tag=tag,
            symmetric=bool(self.symmetric and other.symmetric),
        )


def constant(value, alpha, class_tag=FunctionClass.HINF):
    return HalfPlaneFunction(float(alpha), body=expr.Num(complex(value)), class_tag=class_tag, outer=value != 0)


def default_witness(alpha, power=2):
    """H(z) = (power - 1)! / (z - alpha + 1)^power, bounded outer and in H^1 for power >= 2."""
    scale = float(math.factorial(power - 1))
    body = expr.Div(expr.Num(complex(scale)), expr.Pow(expr.Add(expr.Var(), expr.Num(complex(1.0 - alpha))), power))
    return HalfPlaneFunction(float(alpha), body=body, class_tag=FunctionClass.H1, outer=True)


def probe_points(beta, radius=5.0, count=24):
    """Deterministic probe set in the closed half-plane Re z >= beta."""
    x = beta + np.array([0.0, 0.1, 0.5, 1.0, 2.0, radius])
    y = np.linspace(-radius, radius, max(1, count // x.size))
    return (x[:, None] + 1j * y[None, :]).ravel()


def tail_bound(F, alpha, Y):
    """Bound of int_{|y| > Y} |F(alpha + iy)| dy from the local decay exponent at +-Y."""
    total = 0.0
    for sign in (1.0, -1.0):
        outer = abs(complex(F(np.array([alpha + 1j * sign * Y]))[0]))
        inner = abs(complex(F(np.array([alpha + 1j * sign * Y / 2]))[0]))
        if outer == 0:
            continue
        if inner == 0 or inner <= outer:
            return math.inf
        p = math.log2(inner / outer)
        if p <= 1.0:
            return math.inf
        total += outer * Y / (p - 1.0)
    return total


@dataclass(frozen=True, eq=False)
class BoundaryTable:
    """Samples F*(alpha + iy); ``theta`` is set for tables taken at y = tan(theta)."""
    y: np.ndarray
    values: np.ndarray
    alpha: float
    tail_bound: float
    theta: np.ndarray = None


def _check_abscissa(F, alpha):
    if alpha < F.alpha:
        raise HalfPlaneError(f"abscissa {alpha} lies left of the half-plane Re z > {F.alpha} of {F.text}")


def boundary_samples(F, alpha, Y, m, offset=0.0):
    """m uniform samples of F on alpha + offset + i[-Y, Y] with the tail bound beyond +-Y."""
    _check_abscissa(F, alpha)
    if m < 2 or m & (m - 1):
        raise HalfPlaneError(f"sample count must be a power of two, got {m}")
    y = np.linspace(-Y, Y, m)
    try:
        values = F(alpha + offset + 1j * y)
    except HalfPlaneError as e:
        raise HalfPlaneError(f"singularity on the line Re z = {alpha + offset}: {e}") from e
    return BoundaryTable(y, values, float(alpha), tail_bound(F, alpha + offset, Y))


def boundary_samples_circle(F, alpha, m):
    """Samples at y = tan(theta) on the midpoints of m uniform cells of (-pi/2, pi/2)."""
    _check_abscissa(F, alpha)
    theta = -np.pi / 2 + (np.arange(m) + 0.5) * np.pi / m
    y = np.tan(theta)
    return BoundaryTable(y, F(alpha + 1j * y), float(alpha), 0.0, theta)


def h1_norm(F, alpha, settings=None):
    """||F||_1 = int |F(alpha + iy)| dy, by the midpoint rule in theta with y = tan(theta)."""
    settings = settings or load_settings()
    fine = boundary_samples_circle(F, alpha, settings.outer_nodes)
    coarse = boundary_samples_circle(F, alpha, settings.outer_nodes // 2)

    def integral(table):
        width = np.pi / table.theta.size
        return float(np.sum(np.abs(table.values) * (1.0 + table.y ** 2)) * width)

    value = integral(fine)
    if not np.isfinite(value):
        raise HalfPlaneError(f"{F.text} is not integrable on Re z = {alpha}")
    return Estimate(value, abs(value - integral(coarse)))


def inverse_laplace_fft(F, alpha, grid, settings=None):
    """g(t) = exp(alpha t)/(2 pi) int F(alpha + iy) exp(iyt) dy sampled on the grid.

    Frequencies sit at 2 pi fftfreq(M, step) so the band is |y| <= pi/step.
    The half of the periodic output at negative times is dropped and its
    L1 mass is returned as the leakage.
    """
    settings = settings or load_settings()
    _check_abscissa(F, alpha)
    if F.class_tag != FunctionClass.H1:
        raise HalfPlaneError(f"inverse Laplace transform needs an H1 function, got {F.class_tag.value}")
    h = grid.step
    size = 2 * (1 << (grid.count - 1).bit_length())
    y = 2 * np.pi * np.fft.fftfreq(size, h)
    samples = F(alpha + 1j * y)
    # periodic samples of exp(-alpha t) g(t); index j >= size/2 stands for t = (j - size) h
    damped = np.fft.ifft(samples) / h
    if F.symmetric:
        damped = damped.real.astype(complex)
    values = damped[:grid.count] * np.exp(alpha * grid.times)
    # g is continuous with g(0) = 0 when F is H1; the periodic sum only carries band error there
    values[0] = 0.0
    # leakage is the mass of exp(-alpha t) g on [-horizon, 0)
    leakage = float(h * np.sum(np.abs(damped[size - (grid.count - 1):])))
    band_tail = tail_bound(F, alpha, np.pi / h) / (2 * np.pi)
    envelope = grid.horizon if alpha == 0 else math.expm1(alpha * grid.horizon) / alpha
    budget = band_tail * envelope + leakage
    if not budget <= settings.aliasing_tolerance:
        raise AliasingError(
            f"aliasing budget {budget:.3g} exceeds {settings.aliasing_tolerance:g} "
            f"for {F.text} at step {h:g}"
        )
    LOGGER.debug("inverse Laplace of %s: FFT size %d, leakage %.3g", F.text, size, leakage)
    return Estimate(GridFunction(grid, values), budget, leakage)


def _modulus_function(u):
    if isinstance(u, BoundaryTable):
        y, values = u.y, np.real(u.values)
        return lambda t: np.interp(t, y, values)
    return u


def outer_from_modulus(u, alpha, settings=None, class_tag=FunctionClass.H1):
    """Outer function on Re z > alpha with boundary modulus exp(u).

    log F(w) = c + (1/pi) int (1 - itw)/(w - it) (u(t) - c) dtheta with
    t = tan(theta), w = z - alpha and c = u(Im w); the phase is fixed so
    that F(alpha + 1) > 0.
    """
    settings = settings or load_settings()
    u_fn = _modulus_function(u)
    m = settings.outer_nodes
    theta = -np.pi / 2 + (np.arange(m) + 0.5) * np.pi / m
    t = np.tan(theta)
    with np.errstate(over="ignore", invalid="ignore"):
        u_t = np.asarray(u_fn(t), dtype=float)
    if not np.all(np.isfinite(u_t)):
        raise OuterFunctionError("modulus log is not finite on the boundary")
    if not np.isfinite(np.mean(np.abs(u_t))):
        raise OuterFunctionError("Poisson integral of the modulus diverges")
    width = np.pi / m

    def log_outer(w):
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        out = np.empty(w.shape, dtype=complex)
        for start in range(0, w.size, OUTER_CHUNK):
            chunk = w[start:start + OUTER_CHUNK]
            c = np.asarray(u_fn(chunk.imag), dtype=float)
            kernel = (1 - 1j * t[None, :] * chunk[:, None]) / (chunk[:, None] - 1j * t[None, :])
            integral = kernel @ u_t - c * np.sum(kernel, axis=1)
            out[start:start + OUTER_CHUNK] = c + integral * width / np.pi
        return out

    phase = log_outer(np.array([1.0 + 0j]))[0].imag

    def sampler(z):
        z = np.asarray(z, dtype=complex)
        w = (z - alpha).ravel()
        if np.any(w.real < 0):
            raise HalfPlaneError(f"outer function evaluated left of Re z = {alpha}")
        return np.exp(log_outer(w) - 1j * phase).reshape(z.shape)

    return HalfPlaneFunction(float(alpha), sampler=sampler, class_tag=class_tag, outer=True)


def outer_regularizer(F, n, alpha, settings=None):
    """F_n = outer function with boundary modulus exp(min(-log|F*|, n))."""
    _check_abscissa(F, alpha)

    def u_n(y):
        with np.errstate(divide="ignore"):
            modulus = np.abs(F.raw(alpha + 1j * np.asarray(y)))
            return np.minimum(-np.log(modulus), float(n))

    return outer_from_modulus(u_n, alpha, settings, class_tag=FunctionClass.HINF)
