"""Quadrature rules shared by the grid, Laplace and vertical-line integrals."""
import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Estimate:
    """An approximation together with its error budget.

    ``budget`` bounds discretization plus truncation plus conditioning
    contributions; ``leakage`` is only set by the inverse Laplace transform.
    """
    value: object
    budget: float
    leakage: float = 0.0


def grid_integral(values, step, rule="simpson", axis=0):
    if rule == "simpson":
        return integrate.simpson(values, dx=step, axis=axis)
    return integrate.trapezoid(values, dx=step, axis=axis)


def support_count(values, count):
    """Smallest odd node count that keeps every nonzero sample.

    Trailing zeros contribute nothing, and an odd count keeps the composite
    Simpson weights identical to those of the full grid.
    """
    nonzero = np.flatnonzero(np.abs(values) > 0)
    if nonzero.size == 0:
        return 0
    m = min(count, int(nonzero[-1]) + 3)
    if m % 2 == 0 and m < count:
        m += 1
    return m


def gauss_panels(edges, order):
    """Gauss-Legendre nodes and weights on the panels between consecutive edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = leggauss(order)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def uniform_edges(start, stop, width):
    n = max(1, int(np.ceil((stop - start) / width)))
    return np.linspace(start, stop, n + 1)


def line_nodes(spacing, extent):
    """Symmetric uniform nodes on [-extent, extent] for the vertical-line trapezoid rule."""
    half_count = int(np.ceil(extent / spacing))
    return spacing * np.arange(-half_count, half_count + 1)


def line_weights(count, spacing):
    weights = np.full(count, spacing)
    weights[0] = weights[-1] = spacing / 2.0
    return weights
