"""Functional calculus F(-A) for half-plane functions F.

H1 functions go through the vertical-line resolvent integral, Laplace
transforms of measures go through phi, and bounded or Smirnov functions
go through fractions (FH)(-A) / H(-A) with an outer witness H.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from semigroup_calculus.algebra import TimeGrid, v_lambda, v_lambda_prime
from semigroup_calculus.config import load_settings
from semigroup_calculus.errors import (
    AbscissaError, BackendError, DivergentTailError, HalfPlaneError, RadicalQuotientError
)
from semigroup_calculus.hardy import FunctionClass, default_witness, probe_points, tail_bound
from semigroup_calculus.pettis import phi, phi_density
from semigroup_calculus.quadrature import Estimate, line_nodes, line_weights

LOGGER = logging.getLogger(__name__)

# Nodes per batched solve on the vertical line.
LINE_CHUNK = 16384
# Denominators with a larger condition number are not inverted.
SINGULAR_CONDITION = 1e13


def _line_geometry(b, alpha, settings):
    growth = b.growth_bound()
    if not alpha < -growth:
        raise AbscissaError(f"alpha = {alpha:g} must lie left of -growth_bound = {-growth:g}")
    distance = -growth - alpha
    spacing = min(settings.line_spacing, distance / 4.0)
    return line_nodes(spacing, settings.line_extent), spacing


def _line_resolvents(b, z):
    """(A + zI)^{-1} = -R(-z) for every z, solved in batches."""
    out = np.empty((z.size, b.dim, b.dim), dtype=complex)
    for start in range(0, z.size, LINE_CHUNK):
        chunk = z[start:start + LINE_CHUNK]
        out[start:start + LINE_CHUNK] = -b.resolvent_many(-chunk)
    return out


def _line_integral(samples, resolvents, y, spacing):
    """-(1/2 pi) int samples(y) (A + (alpha + iy))^{-1} dy with a trapezoid budget."""
    integrand = samples[:, None, None] * resolvents
    fine = -np.tensordot(line_weights(y.size, spacing), integrand, axes=(0, 0)) / (2 * np.pi)
    coarse = -np.tensordot(line_weights(y[::2].size, 2 * spacing), integrand[::2], axes=(0, 0)) / (2 * np.pi)
    edge = np.linalg.norm(integrand[0], 2) + np.linalg.norm(integrand[-1], 2)
    tail = float(edge) * abs(y[-1]) / (2 * np.pi)
    return fine, float(np.linalg.norm(fine - coarse, 2)) + tail


def _truncation_tail(F, alpha, y, resolvents):
    """Bound of the integrand mass beyond the outermost nodes."""
    edge = max(float(np.linalg.norm(resolvents[0], 2)), float(np.linalg.norm(resolvents[-1], 2)))
    return tail_bound(F, alpha, float(y[-1])) * edge / (2 * np.pi)


def funcalc_h1(F, b, alpha, settings=None):
    """F(-A) = -(1/2 pi) int F(alpha + iy) (A + (alpha + iy) I)^{-1} dy."""
    settings = settings or load_settings()
    if F.class_tag != FunctionClass.H1:
        raise HalfPlaneError(f"vertical-line calculus needs an H1 function, got {F.class_tag.value}")
    if alpha < F.alpha:
        raise HalfPlaneError(f"abscissa {alpha} lies left of the half-plane Re z > {F.alpha} of {F.text}")
    y, spacing = _line_geometry(b, alpha, settings)
    z = alpha + 1j * y
    samples = F(z)
    resolvents = _line_resolvents(b, z)
    truncation = _truncation_tail(F, alpha, y, resolvents)
    if not truncation <= settings.tail_tolerance:
        raise DivergentTailError(
            f"tail budget {truncation:.3g} beyond |y| = {y[-1]:g} exceeds {settings.tail_tolerance:g} for {F.text}"
        )
    value, budget = _line_integral(samples, resolvents, y, spacing)
    if budget > settings.tail_tolerance:
        LOGGER.warning("line integral budget %.3g for %s exceeds %g", budget, F.text, settings.tail_tolerance)
    LOGGER.debug("funcalc_h1 %s on %s: %d nodes, budget %.3g", F.text, b.spec, y.size, budget)
    return Estimate(value, budget)


def funcalc_measure(mu, b, settings=None):
    """L(mu)(-A) = phi(mu)."""
    try:
        return phi(b, mu, settings)
    except DivergentTailError as e:
        raise DivergentTailError(f"exponential moment of the measure is not verifiable on the horizon: {e}") from e


@dataclass(frozen=True, eq=False)
class QuasimultiplierFraction:
    """Formal quotient num / den over the image algebra of one backend."""
    num: np.ndarray
    den: np.ndarray
    den_witness: str
    backend: object
    budget: float = 0.0


def _check_witness(H, alpha):
    if not H.outer:
        raise HalfPlaneError(f"witness {H.text} is not declared outer")
    values = H.raw(probe_points(alpha + 0.1))
    if not np.all(np.isfinite(values)) or np.any(np.abs(values) == 0):
        raise HalfPlaneError(f"witness {H.text} fails the outer spot-check on the probe set")


def funcalc_quotient(F, H, b, alpha, settings=None):
    """F(-A) as (FH)(-A) / H(-A); H defaults to 1/(z - alpha + 1)^2."""
    settings = settings or load_settings()
    H = H or default_witness(alpha)
    _check_witness(H, alpha)
    product = F.product(H, FunctionClass.H1)
    if math.isinf(tail_bound(product, alpha, settings.line_extent)):
        raise HalfPlaneError(f"{F.text} times the witness {H.text} is not H1 on Re z = {alpha:g}")
    num = funcalc_h1(product, b, alpha, settings)
    den = funcalc_h1(H, b, alpha, settings)
    return QuasimultiplierFraction(
        num.value, den.value, f"outer-H1 image of {H.text}", b, num.budget + den.budget
    )


def _is_radical(b):
    growth = b.growth_bound()
    return math.isinf(growth) and growth < 0


def qm_evaluate(S, settings=None):
    """Solve den X = num; radical backends report instead of inverting."""
    den_norm = float(np.linalg.norm(S.den, 2))
    cond = float(np.linalg.cond(S.den)) if den_norm > 0 else math.inf
    if _is_radical(S.backend):
        raise RadicalQuotientError("quotient not evaluatable; radical case")
    if not cond < SINGULAR_CONDITION:
        raise RadicalQuotientError(f"quotient not evaluatable; denominator condition number {cond:.3g}")
    x = np.linalg.solve(S.den, S.num)
    num_norm = float(np.linalg.norm(S.num, 2))
    residual = float(np.linalg.norm(S.den @ x - S.num, 2))
    eps = np.finfo(float).eps
    if residual > 1e3 * eps * cond * max(num_norm, eps):
        LOGGER.warning("fraction solve residual %.3g with condition number %.3g", residual, cond)
    x_norm = float(np.linalg.norm(x, 2))
    budget = cond * (S.budget / den_norm) * (1.0 + x_norm) + eps * cond * x_norm
    return Estimate(x, budget)


def cross_residual(S1, S2):
    """||n1 d2 - n2 d1|| relative to max(||n1|| ||d2||, ||n2|| ||d1||)."""
    if S1.backend is not S2.backend:
        raise BackendError("fractions over different backends cannot be compared")
    scale = max(
        float(np.linalg.norm(S1.num, 2) * np.linalg.norm(S2.den, 2)),
        float(np.linalg.norm(S2.num, 2) * np.linalg.norm(S1.den, 2)),
        np.finfo(float).tiny,
    )
    return float(np.linalg.norm(S1.num @ S2.den - S2.num @ S1.den, 2)) / scale


def qm_equal(S1, S2, tol):
    return cross_residual(S1, S2) <= tol


def scale_fraction(S, a):
    """S_{au/av}: the same quasimultiplier written over the multiplied denominator."""
    a = np.asarray(a, dtype=complex)
    return QuasimultiplierFraction(a @ S.num, a @ S.den, S.den_witness, S.backend, S.budget * float(np.linalg.norm(a, 2)))


def fraction_power(S, k):
    if k < 1:
        raise BackendError(f"fraction powers start at 1, got {k}")
    num = np.linalg.matrix_power(S.num, k)
    den = np.linalg.matrix_power(S.den, k)
    return QuasimultiplierFraction(num, den, f"({S.den_witness})^{k}", S.backend, k * S.budget)


def generator(b, lam, grid=None, settings=None):
    """The generator as the fraction -phi(v_lambda') / phi(v_lambda)."""
    settings = settings or load_settings()
    growth = b.growth_bound()
    if not lam > growth:
        raise AbscissaError(f"lambda = {lam:g} must exceed the growth bound {growth:g}")
    grid = grid or TimeGrid.from_settings(settings)
    den = phi_density(b, v_lambda(grid, lam), settings)
    num = phi_density(b, v_lambda_prime(grid, lam), settings)
    return QuasimultiplierFraction(-num.value, den.value, "phi(v_lambda)", b, num.budget + den.budget)


def difference_quotient_check(b, u, t_list, settings=None):
    """||(T(t)u - u)/t - Au|| with A recovered from the generator fraction."""
    settings = settings or load_settings()
    u = np.asarray(u, dtype=complex)
    a = qm_evaluate(generator(b, max(1.0, b.growth_bound() + 1.0), settings=settings), settings).value
    au = a @ u
    return [
        float(np.linalg.norm((b.evaluate(t) @ u - u) / t - au, 2))
        for t in t_list
    ]


@dataclass(frozen=True)
class ProbeReport:
    value: float
    diverged: bool
    radical: bool = False


def regularity_probe(S, lam, N, witness, settings=None):
    """max_{n <= N} ||lam^n S^n witness||, stopping at the overflow guard."""
    settings = settings or load_settings()
    try:
        x = qm_evaluate(S, settings).value
    except RadicalQuotientError as e:
        LOGGER.info("regularity probe skipped: %s", e)
        return ProbeReport(math.nan, diverged=False, radical=True)
    power = np.asarray(witness, dtype=complex)
    peak = 0.0
    for n in range(1, N + 1):
        power = lam * x @ power
        peak = max(peak, float(np.linalg.norm(power, 2)))
        if peak > settings.overflow_guard:
            LOGGER.debug("regularity probe diverged at power %d", n)
            return ProbeReport(peak, diverged=True)
    return ProbeReport(peak, diverged=False)


def _mollifier(n, alpha, z):
    c = n - alpha
    return c * c / (z + c) ** 2


def _line_transform(f, alpha, target_spacing, extent, settings):
    """L(f)(alpha + iy_k) on a uniform y grid from one FFT of the Simpson-weighted samples."""
    grid = f.grid
    h = grid.step
    size = 1 << max(grid.count - 1, math.ceil(2 * np.pi / (target_spacing * h)) - 1).bit_length()
    spacing = 2 * np.pi / (size * h)
    half = min(int(extent / spacing), size // 2 - 1)
    weights = np.full(grid.count, h)
    if settings.quadrature == "simpson" and grid.count % 2 == 1:
        weights[1:-1:2] = 4 * h / 3
        weights[2:-1:2] = 2 * h / 3
        weights[0] = weights[-1] = h / 3
    else:
        weights[0] = weights[-1] = h / 2
    padded = np.zeros(size, dtype=complex)
    padded[:grid.count] = weights * f.values * np.exp(-alpha * grid.times)
    spectrum = np.fft.fft(padded)
    k = np.arange(-half, half + 1)
    return spacing * k, spectrum[k % size], spacing


def regularized_funcalc_sequence(f, b, alpha, ns, settings=None):
    """Mollified line integrals -(1/2pi) int m_n L(f) (A + (alpha + iy))^{-1} dy for each n in ns."""
    settings = settings or load_settings()
    growth = b.growth_bound()
    if not alpha < -growth:
        raise AbscissaError(f"alpha = {alpha:g} must lie left of -growth_bound = {-growth:g}")
    tail = abs(f.values[-1]) * math.exp(-alpha * f.grid.horizon)
    if tail > settings.tail_tolerance:
        raise DivergentTailError(f"f exp(-alpha t) is {tail:.3g} at the horizon")
    distance = -growth - alpha
    y, transform, spacing = _line_transform(
        f, alpha, min(settings.line_spacing, distance / 4.0), settings.line_extent, settings
    )
    z = alpha + 1j * y
    resolvents = _line_resolvents(b, z)
    results = []
    for n in ns:
        if n <= alpha:
            raise AbscissaError(f"mollifier index {n} must exceed alpha = {alpha:g}")
        value, budget = _line_integral(_mollifier(n, alpha, z) * transform, resolvents, y, spacing)
        results.append(Estimate(value, budget + tail))
    return results


def regularized_funcalc(f, b, alpha, n, settings=None):
    """n-th mollified approximant of L(f)(-A)."""
    return regularized_funcalc_sequence(f, b, alpha, [n], settings)[0]


def funcalc(F, b, alpha, settings=None):
    """F(-A) by the path its class allows."""
    if F.class_tag == FunctionClass.H1:
        return funcalc_h1(F, b, alpha, settings)
    return qm_evaluate(funcalc_quotient(F, None, b, alpha, settings), settings)
