"""Independent oracles and the identity battery run by ``verify``.

Each check returns a residual and the tolerance it is held to; failures
are report rows, never exceptions.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from semigroup_calculus import expr
from semigroup_calculus.algebra import (
    MeasureRepr, TimeGrid, GridFunction, convolve, fundamental_identity_check, v_lambda,
    v_lambda_prime
)
from semigroup_calculus.backends import MatrixExpBackend, backend_from_spec, random_stable_matrix
from semigroup_calculus.config import load_settings
from semigroup_calculus.errors import (
    DefectiveMatrixError, RadicalQuotientError, SemigroupError, SingularContinuationError
)
from semigroup_calculus.funcalc import (
    cross_residual, difference_quotient_check, funcalc_h1, funcalc_measure, funcalc_quotient,
    generator, qm_evaluate, regularized_funcalc_sequence
)
from semigroup_calculus.hardy import (
    FunctionClass, HalfPlaneFunction, default_witness, inverse_laplace_fft, outer_regularizer,
    probe_points
)
from semigroup_calculus.pettis import approximate_identity_norms, approximate_identity_trace, phi_density
from semigroup_calculus.resolvent import (
    arveson_spectrum, resolvent_continued, resolvent_identity_residual, resolvent_laplace,
    spectral_mapping_residual
)

LOGGER = logging.getLogger(__name__)

DEFAULT_BACKENDS = ("diag:-1,-2", "random:20", "nilshift:8:0.125")
ORACLE_CONDITION = 1e8
# Continuation targets keep this distance from the spectrum along the whole path.
PATH_CLEARANCE = 0.3
# Floor of the difference-quotient budget at t = 1e-3.
DIFFERENCE_QUOTIENT_LIMIT = 5e-3


def eig_oracle(F, A):
    """V diag(F(-a_i)) V^{-1} for diagonalizable A."""
    A = np.asarray(A, dtype=complex)
    w, v = scipy.linalg.eig(A)
    cond = np.linalg.cond(v)
    if not cond <= ORACLE_CONDITION:
        raise DefectiveMatrixError(f"eigenvector matrix condition number {cond:.3g} exceeds {ORACLE_CONDITION:g}")
    return v @ np.diag(F(-w)) @ np.linalg.inv(v)


def hausdorff(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size == 0 or b.size == 0:
        return 0.0 if a.size == b.size else math.inf
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 42
    backends: tuple = DEFAULT_BACKENDS
    settings: object = None


@dataclass(frozen=True)
class Check:
    residual: float
    budget: float
    passed: bool = None


def _rational(c, shift, power, alpha):
    """c / (z - alpha + shift)^power as an H1 function on Re z > alpha."""
    body = expr.Div(
        expr.Num(complex(c)),
        expr.Pow(expr.Add(expr.Var(), expr.Num(complex(shift - alpha))), power),
    )
    return HalfPlaneFunction(float(alpha), body=body)


def _line_alpha(b):
    return -b.growth_bound() - 0.5


def _laplace_lambda(b):
    return max(1.0, b.growth_bound() + 1.0)


def _segment_distance(p, start, end):
    direction = end - start
    tau = np.clip(((p - start) * np.conj(direction)).real / abs(direction) ** 2, 0.0, 1.0)
    return abs(start + tau * direction - p)


def _continuation_target(b, rng):
    growth = b.growth_bound()
    seed = growth + 1.0
    points = arveson_spectrum(b).points
    for _ in range(1000):
        mu = complex(rng.uniform(growth - 1.0, growth), rng.uniform(-3.0, 3.0))
        if all(_segment_distance(p, seed, mu) >= PATH_CLEARANCE for p in points):
            return seed, mu
    raise SingularContinuationError("no continuation target clear of the spectrum")


def check_resolvent_formula(b, rng, settings, group_size):
    lam = _laplace_lambda(b)
    value = resolvent_laplace(b, lam, settings).value
    return Check(float(np.linalg.norm(value - b.resolvent(lam), 2)), 1e-6)


def check_resolvent_identity(b, rng, settings, group_size):
    base = b.growth_bound() + settings.resolvent_margin + 0.2
    worst = 0.0
    for _ in range(math.ceil(50 / group_size)):
        lam, mu = base + rng.uniform(0.0, 2.0, 2) + 1j * rng.uniform(-3.0, 3.0, 2)
        worst = max(worst, resolvent_identity_residual(b, lam, mu, settings))
    return Check(worst, 1e-6)


def check_continuation(b, rng, settings, group_size):
    worst = 0.0
    for _ in range(math.ceil(10 / group_size)):
        seed, mu = _continuation_target(b, rng)
        value = resolvent_continued(b, mu, seed, settings).value
        worst = max(worst, float(np.linalg.norm(value - b.resolvent(mu), 2)))
    return Check(worst, 1e-6)


def check_continuation_into_spectrum(b, rng, settings, group_size):
    points = arveson_spectrum(b).points
    try:
        resolvent_continued(b, points[-1], b.growth_bound() + 1.0, settings)
    except SingularContinuationError:
        return Check(0.0, 0.0, True)
    return Check(math.inf, 0.0, False)


def check_semigroup_reproduction(b, rng, settings, group_size):
    alpha = _line_alpha(b)
    F = HalfPlaneFunction.from_text("exp(-0.5*z)", alpha, FunctionClass.HINF)
    value = qm_evaluate(funcalc_quotient(F, None, b, alpha, settings), settings).value
    return Check(float(np.linalg.norm(value - b.evaluate(0.5), 2)), 1e-4)


def _generator_fractions(b, settings):
    alpha = _line_alpha(b)
    F = HalfPlaneFunction.from_text("-z", alpha, FunctionClass.SMIRNOV)
    quotient = funcalc_quotient(F, default_witness(alpha, 3), b, alpha, settings)
    return quotient, generator(b, _laplace_lambda(b), settings=settings)


def check_generator_recovery(b, rng, settings, group_size):
    a = b.generator_matrix()
    worst = max(
        float(np.linalg.norm(qm_evaluate(S, settings).value - a, 2))
        for S in _generator_fractions(b, settings)
    )
    return Check(worst, 1e-4)


def check_generator_equivalence(b, rng, settings, group_size):
    return Check(cross_residual(*_generator_fractions(b, settings)), 1e-6)


def check_multiplicativity(b, rng, settings, group_size):
    alpha = _line_alpha(b)
    worst = 0.0
    for _ in range(math.ceil(20 / group_size)):
        c1, c2 = rng.uniform(0.5, 2.0, 2)
        s1, s2 = rng.uniform(1.0, 2.0, 2)
        F, G = _rational(c1, s1, 2, alpha), _rational(c2, s2, 2, alpha)
        fg = funcalc_h1(F.product(G), b, alpha, settings).value
        product = funcalc_h1(F, b, alpha, settings).value @ funcalc_h1(G, b, alpha, settings).value
        worst = max(worst, float(np.linalg.norm(fg - product, 2)))
    return Check(worst, 1e-5)


def check_spectral_mapping(b, rng, settings, group_size):
    alpha = _line_alpha(b)
    F = default_witness(alpha)
    image = funcalc_h1(F, b, alpha, settings).value
    expected = F(-np.array(arveson_spectrum(b).points))
    return Check(hausdorff(scipy.linalg.eigvals(image), expected), 1e-5)


def check_spectral_mapping_phi(b, rng, settings, group_size):
    grid = TimeGrid.from_settings(settings)
    mu = MeasureRepr.from_density(v_lambda(grid, _laplace_lambda(b)))
    return Check(spectral_mapping_residual(b, mu, settings), 1e-5)


def check_oracle_consistency(b, rng, settings, group_size):
    F = HalfPlaneFunction.from_text("exp(-0.5*z)", 0.0, FunctionClass.HINF)
    value = eig_oracle(F, b.generator_matrix())
    return Check(float(np.linalg.norm(value - b.evaluate(0.5), 2)), 1e-10)


def check_difference_quotient(b, rng, settings, group_size):
    grid = TimeGrid.from_settings(settings)
    u = phi_density(b, v_lambda(grid, _laplace_lambda(b)), settings).value
    steps = [1e-1, 1e-2, 1e-3]
    residuals = difference_quotient_check(b, u, steps, settings)
    if residuals[-1] == 0.0:
        return Check(0.0, DIFFERENCE_QUOTIENT_LIMIT, True)
    ratios = [residuals[0] / residuals[1], residuals[1] / residuals[2]]
    linear = all(5.0 <= r <= 20.0 for r in ratios)
    # the remainder is about t ||A^2 u|| / 2 at step t
    a = b.generator_matrix()
    curvature = float(np.linalg.norm(a @ (a @ u), 2))
    budget = max(DIFFERENCE_QUOTIENT_LIMIT, steps[-1] * curvature)
    return Check(residuals[-1], budget, residuals[-1] <= budget and linear)


def _is_contraction(b):
    return b.kind == "diagonal" and bool(np.all(b.eigs.real <= 0))


def check_approximate_identity(b, rng, settings, group_size):
    grid = TimeGrid.from_settings(settings)
    u = phi_density(b, v_lambda(grid, 1.0), settings).value
    trace = approximate_identity_trace(b, u, 160, grid, settings)
    marks = [trace[n - 1] for n in (4, 16, 64, 160)]
    decreasing = all(x > y for x, y in zip(marks, marks[1:]))
    return Check(trace[-1], 1e-3, decreasing and trace[-1] <= 1e-3)


def check_approximate_identity_bound(b, rng, settings, group_size):
    grid = TimeGrid.from_settings(settings)
    return Check(max(approximate_identity_norms(b, 160, grid, settings)), 1.05)


def check_regularized_calculus(b, rng, settings, group_size):
    grid = TimeGrid.from_settings(settings)
    f = v_lambda(grid, 1.0)
    target = funcalc_measure(MeasureRepr.from_density(f), b, settings).value
    alpha = _line_alpha(b)
    approximants = regularized_funcalc_sequence(f, b, alpha, [4, 16, 64, 1024], settings)
    errors = [float(np.linalg.norm(e.value - target, 2)) for e in approximants]
    decreasing = errors[0] > errors[1] > errors[2] > errors[3]
    return Check(errors[-1], 1e-3, decreasing and errors[-1] <= 1e-3)


def check_radical_resolvent(b, rng, settings, group_size):
    value = resolvent_laplace(b, -5.0, settings).value
    return Check(float(np.linalg.norm(value - b.resolvent(-5.0), 2)), 1e-8)


def check_radical_structure(b, rng, settings, group_size):
    report = arveson_spectrum(b)
    ok = report.radical and not report.points and b.growth_bound() == -math.inf
    return Check(0.0 if ok else math.inf, 0.0, ok)


def check_radical_quotient(b, rng, settings, group_size):
    try:
        qm_evaluate(generator(b, 1.0, settings=settings), settings)
    except RadicalQuotientError:
        return Check(0.0, 0.0, True)
    return Check(math.inf, 0.0, False)


def check_lattice_semigroup_law(b, rng, settings, group_size):
    unit = b.unit
    worst = 0.0
    for j in range(b.size + 1):
        for k in range(b.size + 1):
            lhs = b.evaluate((j + k) * unit)
            rhs = b.evaluate(j * unit) @ b.evaluate(k * unit)
            worst = max(worst, float(np.linalg.norm(lhs - rhs, 2)))
    return Check(worst, 1e-12)


def check_inverse_laplace(settings):
    grid = TimeGrid.from_settings(settings)
    F = HalfPlaneFunction.from_text("1/((z+2)^2)", -1.5)
    first = inverse_laplace_fft(F, -1.0, grid, settings)
    exact = GridFunction.from_function(grid, lambda t: t * np.exp(-2.0 * t))
    error = (first.value - exact).l1_norm(settings.quadrature)
    second = inverse_laplace_fft(F, -0.5, grid, settings)
    shift = (first.value - second.value).l1_norm(settings.quadrature)
    ok = error <= min(1e-4, first.budget) and shift <= 2 * (first.budget + second.budget)
    return Check(error, 1e-4, ok)


def check_convolution_theorem(settings):
    grid = TimeGrid.from_settings(settings)
    alpha = -0.5
    F = HalfPlaneFunction.from_text("1/((z+1)^2)", alpha)
    G = HalfPlaneFunction.from_text("1/((z+2)^2)", alpha)
    joint = inverse_laplace_fft(F.product(G), alpha, grid, settings).value
    separate = convolve(
        inverse_laplace_fft(F, alpha, grid, settings).value,
        inverse_laplace_fft(G, alpha, grid, settings).value,
    )
    return Check((joint - separate).l1_norm(settings.quadrature), 1e-3)


def check_outer_regularization(settings):
    alpha = 0.0
    F = HalfPlaneFunction.from_text("1/((z+1)^2)", alpha, outer=True)
    probes = probe_points(alpha + 0.5)
    sups = [
        float(np.max(np.abs(F(probes) * outer_regularizer(F, n, alpha, settings)(probes) - 1.0)))
        for n in (2, 4, 8, 12)
    ]
    decreasing = all(x > y for x, y in zip(sups, sups[1:]))
    return Check(sups[-1], 0.1, decreasing and sups[-1] <= 0.1)


def check_fundamental_identity(settings):
    worst = 0.0
    ok = True
    bound_scale = 8.0 * (1.0 + 2.0 * math.exp(-2.0))
    for t in (0.25, 0.5, 1.0):
        residuals = []
        for step in (settings.step, settings.step / 2):
            grid = TimeGrid.from_horizon(step, settings.horizon)
            r = fundamental_identity_check(v_lambda(grid, 1.0), v_lambda_prime(grid, 1.0), t, settings)
            ok = ok and r <= bound_scale * step
            residuals.append(r)
        ratio = residuals[0] / residuals[1]
        ok = ok and 1.6 <= ratio <= 2.4
        worst = max(worst, residuals[0] / (bound_scale * settings.step))
    return Check(worst, 1.0, ok)


MATRIX_CHECKS = (
    ("resolvent_formula", "Laplace resolvent against the direct inverse", check_resolvent_formula),
    ("resolvent_identity", "R(l) - R(m) = (m - l) R(l) R(m) on random pairs", check_resolvent_identity),
    ("continuation", "continued resolvent against the direct inverse", check_continuation),
    ("continuation_spectrum", "continuation into the spectrum raises", check_continuation_into_spectrum),
    ("semigroup_reproduction", "exp(-0.5z) through the quotient calculus gives T(0.5)", check_semigroup_reproduction),
    ("generator_recovery", "-z quotient and v_lambda fraction both give A", check_generator_recovery),
    ("generator_equivalence", "the two generator fractions cross-multiply", check_generator_equivalence),
    ("multiplicativity", "(FG)(-A) = F(-A) G(-A) on rational pairs", check_multiplicativity),
    ("spectral_mapping", "spectrum of F(-A) against F(-spectrum)", check_spectral_mapping),
    ("spectral_mapping_phi", "characters of phi(v_lambda) against its Laplace transform", check_spectral_mapping_phi),
    ("oracle_consistency", "eigendecomposition oracle of exp(-0.5z) against T(0.5)", check_oracle_consistency),
    ("difference_quotient", "(T(t)u - u)/t -> Au linearly in t", check_difference_quotient),
)
CONTRACTION_CHECKS = (
    ("approximate_identity", "phi(f_n) T(1/n^2) u -> u", check_approximate_identity),
    ("approximate_identity_bound", "sup ||phi(f_n) T(1/n^2)||", check_approximate_identity_bound),
    ("regularized_calculus", "mollified line integrals converge to phi(f)", check_regularized_calculus),
)
RADICAL_CHECKS = (
    ("radical_resolvent", "resolvent at lambda = -5 against the closed form", check_radical_resolvent),
    ("radical_structure", "growth bound -inf and empty radical spectrum", check_radical_structure),
    ("radical_quotient", "generator fraction reports the radical case", check_radical_quotient),
    ("lattice_semigroup_law", "T(s + t) = T(s) T(t) on the lattice", check_lattice_semigroup_law),
)
ALGEBRA_CHECKS = (
    ("inverse_laplace", "inverse Laplace of 1/(z+2)^2 against t exp(-2t)", check_inverse_laplace),
    ("convolution_theorem", "inverse of a product against the convolution of inverses", check_convolution_theorem),
    ("outer_regularization", "F F_n -> 1 on Re z >= alpha + 0.5", check_outer_regularization),
    ("fundamental_identity", "f*delta_t - f + int f'*delta_s ds is first order in the step", check_fundamental_identity),
)


def _entry(check_id, description, run):
    try:
        check = run()
    except (SemigroupError, np.linalg.LinAlgError, ArithmeticError) as e:
        LOGGER.warning("%s raised: %s", check_id, e)
        return {"id": check_id, "description": description, "residual": math.inf, "budget": 0.0, "pass": False}
    passed = check.residual <= check.budget if check.passed is None else check.passed
    return {
        "id": check_id,
        "description": description,
        "residual": float(check.residual),
        "budget": float(check.budget),
        "pass": bool(passed),
    }


def _groups(config, rng):
    for spec in config.backends:
        if spec.startswith("random:"):
            count = int(spec.partition(":")[2])
            yield spec, [MatrixExpBackend(random_stable_matrix(rng)) for _ in range(count)]
        else:
            yield spec, [backend_from_spec(spec)]


def _group_entry(label, name, description, check, group, rng, settings):
    def run():
        checks = [check(b, rng, settings, len(group)) for b in group]
        worst = max(checks, key=lambda c: c.residual)
        passed = all(c.residual <= c.budget if c.passed is None else c.passed for c in checks)
        return Check(worst.residual, worst.budget, passed)

    return _entry(f"{label}/{name}", description, run)


def run_suite(config=None):
    """Run every check on every configured backend group; deterministic for a fixed seed."""
    config = config or SuiteConfig()
    settings = config.settings or load_settings()
    rng = np.random.default_rng(config.seed)
    report = []
    for label, group in _groups(config, rng):
        radical = all(math.isinf(b.growth_bound()) for b in group)
        checks = RADICAL_CHECKS if radical else MATRIX_CHECKS
        if not radical and all(_is_contraction(b) for b in group):
            checks = checks + CONTRACTION_CHECKS
        for name, description, check in checks:
            LOGGER.info("running %s/%s", label, name)
            report.append(_group_entry(label, name, description, check, group, rng, settings))
    if report:
        for name, description, check in ALGEBRA_CHECKS:
            report.append(_entry(f"algebra/{name}", description, lambda check=check: check(settings)))
    failed = [e["id"] for e in report if not e["pass"]]
    if failed:
        LOGGER.warning("%d of %d checks failed: %s", len(failed), len(report), ", ".join(failed))
    return report
