"""Resolvents (lambda I - A)^{-1} from the Laplace formula and by continuation.

``resolvent_laplace`` integrates exp(-lambda s) T(s) over Gauss-Legendre
panels; ``resolvent_continued`` carries a resolvent from a seed point
through the resolvent set with a(I + (mu - lambda) a)^{-1}.
"""
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from semigroup_calculus.algebra import laplace
from semigroup_calculus.backends import operator_norms
from semigroup_calculus.config import load_settings
from semigroup_calculus.errors import (
    AbscissaError, BackendError, DivergentTailError, NonDiagonalizableWarning,
    SingularContinuationError
)
from semigroup_calculus.pettis import phi
from semigroup_calculus.quadrature import Estimate, gauss_panels, uniform_edges

LOGGER = logging.getLogger(__name__)

# Initial horizon is HORIZON_DECADES / (Re lambda - growth), doubled at most MAX_DOUBLINGS times.
HORIZON_DECADES = 30.0
MAX_DOUBLINGS = 8
# Continuation step rule ||delta * a_k|| <= STEP_SAFETY.
STEP_SAFETY = 0.5
MAX_CONTINUATION_STEPS = 10000
SINGULAR_NORM = 1e12
# Eigenvector matrices beyond this condition number are treated as Jordan structure.
JORDAN_CONDITION = 1e8


def _is_radical(b):
    growth = b.growth_bound()
    return math.isinf(growth) and growth < 0


def _laplace_panels(b, lam, settings):
    """Panel edges on [0, H] with H certified by the cutoff on exp(-Re lambda H) ||T(H)||."""
    # at most half a period of exp(-i Im(lambda) s) per panel
    width = settings.panel_width if lam.imag == 0 else min(settings.panel_width, math.pi / abs(lam.imag))
    if _is_radical(b):
        # finite support; panels aligned to the shift unit so T is constant on each
        per_unit = max(1, math.ceil(b.unit / width))
        return np.linspace(0.0, b.size * b.unit, b.size * per_unit + 1), 0.0
    growth = b.growth_bound()
    distance = lam.real - growth
    if not distance > settings.resolvent_margin:
        raise AbscissaError(
            f"Re(lambda) = {lam.real:g} must exceed the growth bound {growth:g} "
            f"by more than {settings.resolvent_margin:g}"
        )
    horizon = HORIZON_DECADES / distance
    for _ in range(MAX_DOUBLINGS + 1):
        tail = math.exp(-lam.real * horizon) * float(operator_norms(b.evaluate(horizon)))
        if tail <= settings.resolvent_cutoff:
            LOGGER.debug("Laplace horizon %g for lambda %s (tail %.3g)", horizon, lam, tail)
            return uniform_edges(0.0, horizon, width), tail / distance
        horizon *= 2.0
    raise DivergentTailError(
        f"exp(-Re(lambda) H) ||T(H)|| stays above {settings.resolvent_cutoff:g} up to H = {horizon / 2:g}"
    )


def _panel_integral(b, lam, edges, order):
    nodes, weights = gauss_panels(edges, order)
    ops = b.evaluate_many(nodes)
    kernel = weights * np.exp(-lam * nodes)
    value = np.tensordot(kernel, ops, axes=(0, 0))
    norm_integral = float(np.sum(weights * np.exp(-lam.real * nodes) * operator_norms(ops)))
    return value, norm_integral


def resolvent_laplace(b, lam, settings=None):
    """(lambda I - A)^{-1} = int_0^inf exp(-lambda s) T(s) ds."""
    settings = settings or load_settings()
    lam = complex(lam)
    edges, tail = _laplace_panels(b, lam, settings)
    value, norm_bound = _panel_integral(b, lam, edges, settings.panel_order)
    coarse, _ = _panel_integral(b, lam, edges, max(2, settings.panel_order - 4))
    budget = (
        float(np.linalg.norm(value - coarse, 2))
        + tail
        + np.finfo(float).eps * float(np.linalg.norm(value, 2))
    )
    norm = float(np.linalg.norm(value, 2))
    if norm > norm_bound * (1 + 1e-8) + budget + tail:
        LOGGER.warning("resolvent norm %.6g exceeds the Laplace norm bound %.6g", norm, norm_bound)
    return Estimate(value, budget)


def laplace_norm_bound(b, lam, settings=None):
    """int_0^inf exp(-Re lambda t) ||T(t)|| dt on the same panels as the resolvent."""
    settings = settings or load_settings()
    lam = complex(lam)
    edges, tail = _laplace_panels(b, lam, settings)
    _, bound = _panel_integral(b, lam, edges, settings.panel_order)
    return bound + tail


def resolvent_continued(b, mu, seed_lambda, settings=None):
    """Continue the resolvent from ``seed_lambda`` to ``mu`` along the straight segment."""
    settings = settings or load_settings()
    mu = complex(mu)
    seed = resolvent_laplace(b, seed_lambda, settings)
    a = seed.value
    current = complex(seed_lambda)
    eye = np.eye(b.dim, dtype=complex)
    steps = 0
    relative = seed.budget / max(float(np.linalg.norm(a, 2)), np.finfo(float).tiny)
    while current != mu:
        if steps >= MAX_CONTINUATION_STEPS:
            raise SingularContinuationError(
                f"continuation to {mu} did not arrive within {MAX_CONTINUATION_STEPS} steps"
            )
        remaining = mu - current
        a_norm = float(np.linalg.norm(a, 2))
        if abs(remaining) * a_norm <= STEP_SAFETY:
            delta = remaining
            target = mu
        else:
            delta = remaining / abs(remaining) * STEP_SAFETY / a_norm
            target = current + delta
        pivot = eye + delta * a
        cond = np.linalg.cond(pivot)
        if not np.isfinite(cond) or cond > SINGULAR_NORM:
            raise SingularContinuationError(f"singular pivot I + (mu - lambda) a near {target}")
        a = np.linalg.solve(pivot, a)
        current = target
        steps += 1
        if not np.all(np.isfinite(a)) or float(np.linalg.norm(a, 2)) > SINGULAR_NORM:
            raise SingularContinuationError(
                f"resolvent blows up near {current}; {mu} is in or next to the spectrum"
            )
    LOGGER.debug("continued resolvent from %s to %s in %d steps", seed_lambda, mu, steps)
    a_norm = float(np.linalg.norm(a, 2))
    budget = (relative + 4 * (steps + 1) * np.finfo(float).eps) * a_norm * max(1.0, a_norm)
    return Estimate(a, budget)


@dataclass(frozen=True)
class SpectrumReport:
    points: tuple
    radical: bool
    jordan: bool = False

    def __post_init__(self):
        if self.radical and self.points:
            raise BackendError("a radical spectrum report cannot list points")


def _eigensystem(matrix):
    w, v = scipy.linalg.eig(matrix)
    return w, v, np.linalg.cond(v) > JORDAN_CONDITION


def arveson_spectrum(b):
    """Characters of the image algebra evaluated on the generator."""
    if _is_radical(b):
        return SpectrumReport(points=(), radical=True)
    matrix = b.generator_matrix()
    if matrix is None:
        raise BackendError(f"backend {b.spec} exposes no generator matrix")
    w, _, jordan = _eigensystem(matrix)
    if jordan:
        warnings.warn(
            f"generator of {b.spec} has Jordan structure; reporting eigenvalues only",
            NonDiagonalizableWarning,
            stacklevel=2,
        )
    points = tuple(sorted((complex(x) for x in w), key=lambda z: (z.real, z.imag)))
    return SpectrumReport(points=points, radical=False, jordan=bool(jordan))


def spectral_mapping_residual(b, mu, settings=None):
    """max_i |eig_i(phi(mu)) - L(mu)(-a_i)| paired through the eigenbasis of the generator."""
    settings = settings or load_settings()
    if _is_radical(b):
        raise BackendError(f"backend {b.spec} is radical; the image algebra has no characters")
    if mu.is_zero:
        return 0.0
    matrix = b.generator_matrix()
    image = phi(b, mu, settings).value
    w, v, jordan = _eigensystem(matrix)
    if jordan:
        warnings.warn(
            "generator is not diagonalizable; pairing characters through a Schur basis",
            NonDiagonalizableWarning,
            stacklevel=2,
        )
        t, z = scipy.linalg.schur(matrix, output="complex")
        w = np.diag(t)
        mapped = np.diag(z.conj().T @ image @ z)
    else:
        mapped = np.diag(np.linalg.solve(v, image @ v))
    return float(np.max(np.abs(mapped - laplace(mu, -w, settings))))


def resolvent_identity_residual(b, lam, mu, settings=None):
    """||R(lambda) - R(mu) - (mu - lambda) R(lambda) R(mu)||."""
    r_lam = resolvent_laplace(b, lam, settings).value
    r_mu = resolvent_laplace(b, mu, settings).value
    return float(np.linalg.norm(r_lam - r_mu - (complex(mu) - complex(lam)) * r_lam @ r_mu, 2))


def holomorphy_residual(b, lam, h=1e-3, settings=None):
    """Entrywise Cauchy-Riemann defect of lambda -> R(lambda) from centered differences."""
    lam = complex(lam)

    def r(z):
        return resolvent_laplace(b, z, settings).value

    d_re = (r(lam + h) - r(lam - h)) / (2 * h)
    d_im = (r(lam + 1j * h) - r(lam - 1j * h)) / (2 * h)
    return float(np.max(np.abs(d_im - 1j * d_re)))
