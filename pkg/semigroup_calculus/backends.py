"""Finite-dimensional semigroups t -> T(t).

Three realizations: the matrix exponential of a generator matrix, a
diagonal semigroup given by its eigenvalues, and a quantized nilpotent
shift whose image algebra is radical.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from semigroup_calculus.algebra import TimeGrid, Weight
from semigroup_calculus.errors import AbscissaError, BackendError

LOGGER = logging.getLogger(__name__)

# Lattice tolerance for quantizing t / unit in the shift backend.
LATTICE_TOL = 1e-9
# Floor applied to sampled norms so that eventually-zero semigroups still give a weight.
NORM_FLOOR = 1e-300


def _lattice_powers(base, count):
    """base^k for k = 0..count-1 by repeated doubling of the filled block."""
    dim = base.shape[0]
    powers = np.empty((count, dim, dim), dtype=complex)
    powers[0] = np.eye(dim)
    block = np.asarray(base, dtype=complex)
    filled = 1
    while filled < count:
        take = min(filled, count - filled)
        powers[filled:filled + take] = powers[:take] @ block
        filled += take
        block = block @ block
    return powers


@dataclass(frozen=True, eq=False)
class SemigroupBackend:
    """Base class; instances hash by identity so they can key the node cache."""
    kind = "abstract"

    @property
    def dim(self):
        raise NotImplementedError

    def evaluate_many(self, times):
        raise NotImplementedError

    def lattice(self, step, count):
        return self.evaluate_many(step * np.arange(count))

    def growth_bound(self):
        raise NotImplementedError

    def generator_matrix(self):
        """The generator as a matrix, or None when the backend has none."""
        return None

    def resolvent(self, lam):
        """(lam I - A)^{-1} computed directly, used as per-node resolvent and as oracle."""
        raise NotImplementedError

    def resolvent_many(self, lams):
        return np.stack([self.resolvent(lam) for lam in np.ravel(lams)])

    @property
    def spec(self):
        raise NotImplementedError

    def evaluate(self, t):
        if t < 0:
            raise BackendError(f"semigroup time must be nonnegative, got {t}")
        return self.evaluate_many(np.array([float(t)]))[0]


@dataclass(frozen=True, eq=False)
class MatrixExpBackend(SemigroupBackend):
    matrix: np.ndarray
    kind = "matrix_exp"

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise BackendError(f"generator must be square, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise BackendError("generator has non-finite entries")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def spec(self):
        return f"mat:{self.dim}x{self.dim}"

    def evaluate_many(self, times):
        times = np.asarray(times, dtype=float)
        if np.any(times < 0):
            raise BackendError("semigroup time must be nonnegative")
        # scipy's expm runs scaling-and-squaring on each matrix of the stack
        return scipy.linalg.expm(times[:, None, None] * self.matrix)

    def lattice(self, step, count):
        return _lattice_powers(scipy.linalg.expm(step * self.matrix), count)

    def growth_bound(self):
        return float(np.max(scipy.linalg.eigvals(self.matrix).real))

    def generator_matrix(self):
        return self.matrix

    def resolvent(self, lam):
        return np.linalg.solve(lam * np.eye(self.dim) - self.matrix, np.eye(self.dim, dtype=complex))

    def resolvent_many(self, lams):
        lams = np.ravel(np.asarray(lams, dtype=complex))
        eye = np.eye(self.dim, dtype=complex)
        shifted = lams[:, None, None] * eye - self.matrix
        return np.linalg.solve(shifted, np.broadcast_to(eye, shifted.shape))


@dataclass(frozen=True, eq=False)
class DiagonalBackend(SemigroupBackend):
    eigs: np.ndarray
    kind = "diagonal"

    def __post_init__(self):
        eigs = np.atleast_1d(np.asarray(self.eigs, dtype=complex))
        if eigs.ndim != 1 or eigs.size == 0:
            raise BackendError("diagonal backend needs a nonempty list of eigenvalues")
        object.__setattr__(self, "eigs", eigs)

    @property
    def dim(self):
        return self.eigs.size

    @property
    def spec(self):
        return "diag:" + ",".join(f"{e.real:g}" if e.imag == 0 else f"{e:g}" for e in self.eigs)

    def evaluate_many(self, times):
        times = np.asarray(times, dtype=float)
        if np.any(times < 0):
            raise BackendError("semigroup time must be nonnegative")
        ops = np.zeros((times.size, self.dim, self.dim), dtype=complex)
        idx = np.arange(self.dim)
        ops[:, idx, idx] = np.exp(np.outer(times, self.eigs))
        return ops

    def growth_bound(self):
        return float(np.max(self.eigs.real))

    def generator_matrix(self):
        return np.diag(self.eigs)

    def resolvent(self, lam):
        return np.diag(1.0 / (lam - self.eigs))

    def resolvent_many(self, lams):
        lams = np.ravel(np.asarray(lams, dtype=complex))
        out = np.zeros((lams.size, self.dim, self.dim), dtype=complex)
        idx = np.arange(self.dim)
        out[:, idx, idx] = 1.0 / (lams[:, None] - self.eigs)
        return out


@dataclass(frozen=True, eq=False)
class NilpotentShiftBackend(SemigroupBackend):
    """T(t) = S^ceil(t/unit) with S the sub-diagonal shift; T(0) = I.

    The semigroup law is exact on the lattice unit*N; off the lattice the
    two sides differ by at most one power of S.
    """
    size: int
    unit: float
    kind = "nilpotent_shift"

    def __post_init__(self):
        if self.size < 1:
            raise BackendError(f"shift dimension must be positive, got {self.size}")
        if not self.unit > 0:
            raise BackendError(f"shift unit must be positive, got {self.unit}")

    @property
    def dim(self):
        return self.size

    @property
    def spec(self):
        return f"nilshift:{self.size}:{self.unit:g}"

    @property
    def shift_matrix(self):
        return np.eye(self.size, k=-1, dtype=complex)

    def powers_of(self, times):
        times = np.asarray(times, dtype=float)
        if np.any(times < 0):
            raise BackendError("semigroup time must be nonnegative")
        return np.where(times > 0, np.ceil(times / self.unit - LATTICE_TOL), 0).astype(int)

    def evaluate_many(self, times):
        k = self.powers_of(times)
        idx = np.arange(self.size)
        offset = idx[:, None] - idx[None, :]
        return (offset[None, :, :] == k[:, None, None]).astype(complex)

    def growth_bound(self):
        return -math.inf

    def resolvent(self, lam):
        """Closed form c(lam) S (I - exp(-lam unit) S)^{-1}, c(lam) = (1 - exp(-lam unit))/lam."""
        lam = complex(lam)
        h = self.unit
        c = h if lam == 0 else -np.expm1(-lam * h) / lam
        s = self.shift_matrix
        eye = np.eye(self.size, dtype=complex)
        return c * s @ np.linalg.solve(eye - np.exp(-lam * h) * s, eye)

    def resolvent_many(self, lams):
        """Closed form summed as c(lam) sum_{k>=1} exp(-lam unit)^(k-1) S^k."""
        lams = np.ravel(np.asarray(lams, dtype=complex))
        h = self.unit
        safe = np.where(lams == 0, 1.0, lams)
        c = np.where(lams == 0, h, -np.expm1(-lams * h) / safe)
        q = np.exp(-lams * h)
        k = np.arange(1, self.size)
        powers = self.evaluate_many(h * k)
        coeff = c[:, None] * q[:, None] ** (k - 1)
        return np.einsum("jk,kab->jab", coeff, powers)


@functools.lru_cache(maxsize=8)
def _cached_lattice(backend, step, count):
    LOGGER.debug("Filling node cache for %s on %d nodes of step %g", backend.spec, count, step)
    ops = backend.lattice(step, count)
    ops.setflags(write=False)
    return ops


def grid_operators(backend, grid):
    """T(t_k) at every node of the grid; write-once cache per (backend, grid)."""
    return _cached_lattice(backend, grid.step, grid.count)


def evaluate(b, t):
    return b.evaluate(t)


def growth_bound(b):
    return b.growth_bound()


def operator_norms(ops):
    return np.linalg.norm(ops, ord=2, axis=(-2, -1))


def operator_norm_profile(b, grid):
    """||T(t_k)|| at every node of the grid."""
    return operator_norms(grid_operators(b, grid))


def semigroup_weight(b, grid):
    """omega_T(t) = ||T(t)|| sampled on the grid (floored to stay positive)."""
    norms = operator_norm_profile(b, grid)
    return Weight(grid, np.maximum(norms, NORM_FLOOR))


def sampled_growth_bound(b, t):
    """log ||T(t)|| / t, the sampling cross-check of growth_bound."""
    norm = float(operator_norms(b.evaluate(t)))
    if norm == 0:
        return -math.inf
    return math.log(norm) / t


def lambda_norm(b, u, lam, sample):
    """sup over sampled s >= 0 of exp(-lam s) ||T(s) u||."""
    bound = b.growth_bound()
    if not lam > bound:
        raise AbscissaError(f"lambda {lam} must exceed the growth bound {bound}")
    u = np.asarray(u, dtype=complex)
    if u.ndim == 1:
        u = u.reshape(-1, 1)
    ops = grid_operators(b, sample)
    profile = np.exp(-lam * sample.times) * operator_norms(ops @ u)
    if profile.size > 1 and profile[-1] > profile[-2] and profile[-1] > 0:
        LOGGER.warning("lambda-norm profile still increasing at the sample horizon %g", sample.horizon)
    return float(np.max(profile))


def random_stable_matrix(rng, dim=4, max_abscissa=-0.5, min_abscissa=-3.0, max_condition=100.0):
    """Random complex generator with spectral abscissa <= max_abscissa and cond(V) <= max_condition."""
    while True:
        eigs = rng.uniform(min_abscissa, max_abscissa, dim) + 1j * rng.uniform(-2.0, 2.0, dim)
        v = np.eye(dim) + 0.4 * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        if np.linalg.cond(v) <= max_condition:
            return v @ np.diag(eigs) @ np.linalg.inv(v)


def backend_from_spec(spec):
    """Parse the backend mini-syntax: diag:a1,a2,...  mat:FILE.json  nilshift:DIM:UNIT."""
    from semigroup_calculus.reports import read_operator

    kind, _, rest = spec.partition(":")
    if not rest:
        raise BackendError(f"malformed backend spec {spec!r}")
    try:
        if kind == "diag":
            return DiagonalBackend(np.array([complex(x.replace("i", "j")) for x in rest.split(",")]))
        if kind == "nilshift":
            size, unit = rest.split(":")
            return NilpotentShiftBackend(int(size), float(unit))
    except ValueError as e:
        raise BackendError(f"malformed backend spec {spec!r}: {e}") from e
    if kind == "mat":
        return MatrixExpBackend(read_operator(rest))
    raise BackendError(f"unknown backend kind {kind!r} in {spec!r}")
