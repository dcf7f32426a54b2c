"""Operator-valued integration phi_T(mu) = int T(t) dmu(t).

At finite dimension weak, strong and norm integrals coincide, so every
integral here is a full-matrix quadrature over the cached node operators.
"""
import logging

import numpy as np

from semigroup_calculus.algebra import TimeGrid, convolve, dirac_member
from semigroup_calculus.backends import grid_operators, operator_norms
from semigroup_calculus.config import load_settings
from semigroup_calculus.errors import DivergentTailError
from semigroup_calculus.quadrature import Estimate, grid_integral, support_count

LOGGER = logging.getLogger(__name__)

# Richardson denominators: error of the fine rule ~ (fine - coarse) / (2^p - 1)
_RICHARDSON = {"simpson": 15.0, "trapezoid": 3.0}


def _density_integral(b, f, settings):
    grid = f.grid
    values = f.values
    m = support_count(values, grid.count)
    dim = b.dim
    if m == 0:
        return np.zeros((dim, dim), dtype=complex), 0.0
    ops = grid_operators(b, grid)
    tail = 0.0
    if m == grid.count:
        tail = float(abs(values[-1]) * operator_norms(ops[-1]))
        if tail > settings.tail_tolerance:
            raise DivergentTailError(
                f"density times ||T(t)|| is {tail:.3g} at the horizon {grid.horizon}; "
                "the measure is not integrable against the semigroup weight on this grid"
            )
    integrand = values[:m, None, None] * ops[:m]
    fine = grid_integral(integrand, grid.step, settings.quadrature)
    budget = tail
    if m >= 5:
        coarse = grid_integral(integrand[::2], 2 * grid.step, settings.quadrature)
        budget += float(np.linalg.norm(fine - coarse, 2)) / _RICHARDSON[settings.quadrature]
    return fine, budget


def phi(b, mu, settings=None):
    """phi_T(mu): quadrature over the density plus the exact sum over atoms."""
    settings = settings or load_settings()
    result = np.zeros((b.dim, b.dim), dtype=complex)
    budget = 0.0
    if mu.density is not None:
        result, budget = _density_integral(b, mu.density, settings)
    for t, m in mu.atoms:
        result = result + m * b.evaluate(t)
    budget += np.finfo(float).eps * float(np.linalg.norm(result, 2))
    return Estimate(result, budget)


def phi_density(b, f, settings=None):
    from semigroup_calculus.algebra import MeasureRepr

    return phi(b, MeasureRepr.from_density(f), settings)


def homomorphism_residual(b, f, g, settings=None):
    """||phi(f*g) - phi(f) phi(g)||, the multiplicativity defect of the quadrature."""
    settings = settings or load_settings()
    fg = phi_density(b, convolve(f, g), settings).value
    product = phi_density(b, f, settings).value @ phi_density(b, g, settings).value
    return float(np.linalg.norm(fg - product, 2))


def approximate_identity(b, n, grid, settings=None):
    """e_n = phi(f_n * delta_{eps_n}) = phi(f_n) T(eps_n) with eps_n = 1/n^2."""
    settings = settings or load_settings()
    f_n = dirac_member(n, grid, settings)
    return phi_density(b, f_n, settings).value @ b.evaluate(1.0 / n ** 2)


def approximate_identity_trace(b, u, nmax, grid=None, settings=None):
    """||e_n u - u|| for n = 1..nmax."""
    settings = settings or load_settings()
    grid = grid or TimeGrid.from_settings(settings)
    u = np.asarray(u, dtype=complex)
    trace = []
    for n in range(1, nmax + 1):
        e_n = approximate_identity(b, n, grid, settings)
        trace.append(float(np.linalg.norm(e_n @ u - u, 2)))
    LOGGER.debug("approximate identity trace for %s ends at %.3g", b.spec, trace[-1] if trace else 0.0)
    return trace


def approximate_identity_norms(b, nmax, grid=None, settings=None):
    settings = settings or load_settings()
    grid = grid or TimeGrid.from_settings(settings)
    return [
        float(np.linalg.norm(approximate_identity(b, n, grid, settings), 2))
        for n in range(1, nmax + 1)
    ]
