"""Command-line driver: resolvents, spectra, F(-A), generators, inverse Laplace and verify."""
import argparse
import json
import logging
import math
import re
import sys

from semigroup_calculus import reports
from semigroup_calculus.algebra import TimeGrid
from semigroup_calculus.backends import backend_from_spec
from semigroup_calculus.config import load_settings
from semigroup_calculus.errors import SemigroupError
from semigroup_calculus.funcalc import funcalc, generator, qm_evaluate
from semigroup_calculus.hardy import FunctionClass, HalfPlaneFunction, inverse_laplace_fft, tail_bound
from semigroup_calculus.resolvent import arveson_spectrum, resolvent_continued, resolvent_laplace
from semigroup_calculus.verify import DEFAULT_BACKENDS, SuiteConfig, run_suite
from semigroup_calculus.version import get_build_date, get_current_version

LOGGER = logging.getLogger(__name__)

CLASS_CHOICES = ["auto"] + [c.value for c in FunctionClass]
# Options whose values may start with a minus sign, such as --lambda -5+0i.
SIGNED_OPTIONS = ("--lambda", "--continue-from", "--alpha")
_SIGNED_VALUE = re.compile(r"-\.?\d")


def complex_arg(text):
    """Parse ``re+imi`` (for example ``-5+0i``) or a plain real number."""
    try:
        return complex(text.strip().replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number of the form re+imi: {text!r}")


def attach_signed_values(argv):
    """Rewrite '--lambda -5+0i' as '--lambda=-5+0i' so argparse does not read the value as a flag."""
    out = []
    tokens = iter(argv)
    for token in tokens:
        if token in SIGNED_OPTIONS:
            value = next(tokens, None)
            if value is not None and _SIGNED_VALUE.match(value):
                out.append(f"{token}={value}")
                continue
            out.append(token)
            if value is not None:
                out.append(value)
            continue
        out.append(token)
    return out


def _function(args, settings):
    if args.function_class != "auto":
        return HalfPlaneFunction.from_text(args.expr, args.alpha, FunctionClass(args.function_class))
    F = HalfPlaneFunction.from_text(args.expr, args.alpha, FunctionClass.H1)
    if math.isinf(tail_bound(F, args.alpha, settings.line_extent)):
        return HalfPlaneFunction.from_text(args.expr, args.alpha, FunctionClass.HINF)
    return F


def cmd_resolvent(args, settings):
    b = backend_from_spec(args.backend)
    if args.continue_from is not None:
        est = resolvent_continued(b, args.lam, args.continue_from, settings)
    else:
        est = resolvent_laplace(b, args.lam, settings)
    meta = {"command": "resolvent", "backend": b.spec, "lambda": reports.complex_to_json(args.lam)}
    return reports.result_payload(est.value, est.budget, **meta)


def cmd_spectrum(args, settings):
    b = backend_from_spec(args.backend)
    report = arveson_spectrum(b)
    meta = {"command": "spectrum", "backend": b.spec, "radical": report.radical, "jordan": report.jordan}
    return reports.result_payload(list(report.points), 0.0, **meta)


def cmd_funcalc(args, settings):
    b = backend_from_spec(args.backend)
    F = _function(args, settings)
    est = funcalc(F, b, args.alpha, settings)
    meta = {
        "command": "funcalc",
        "backend": b.spec,
        "expr": F.text,
        "alpha": args.alpha,
        "class": F.class_tag.value,
    }
    return reports.result_payload(est.value, est.budget, **meta)


def cmd_generator(args, settings):
    b = backend_from_spec(args.backend)
    fraction = generator(b, args.lam.real, settings=settings)
    est = qm_evaluate(fraction, settings)
    meta = {
        "command": "generator",
        "backend": b.spec,
        "lambda": args.lam.real,
        "witness": fraction.den_witness,
        "numerator": reports.operator_to_json(fraction.num),
        "denominator": reports.operator_to_json(fraction.den),
    }
    return reports.result_payload(est.value, est.budget, **meta)


def cmd_invlaplace(args, settings):
    F = HalfPlaneFunction.from_text(args.expr, args.alpha, FunctionClass.H1)
    est = inverse_laplace_fft(F, args.alpha, TimeGrid.from_settings(settings), settings)
    meta = {"command": "invlaplace", "expr": F.text, "alpha": args.alpha, "leakage": est.leakage}
    return reports.result_payload(est.value, est.budget, **meta)


def cmd_verify(args, settings):
    backends = tuple(args.backend) if args.backend else DEFAULT_BACKENDS
    report = run_suite(SuiteConfig(seed=args.seed, backends=backends, settings=settings))
    return reports.suite_to_json(report)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="semigroup-calculus",
        description="Resolvents and functional calculus of finite-dimensional semigroups.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {get_current_version()} ({get_build_date()})"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output JSON file ('-' for stdout)")
    common.add_argument("--config", default=None, help="settings JSON file")
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resolvent", parents=[common], help="(lambda I - A)^{-1} by the Laplace formula")
    p.add_argument("--backend", required=True)
    p.add_argument("--lambda", dest="lam", type=complex_arg, required=True)
    p.add_argument("--continue-from", type=complex_arg, default=None,
                   help="seed point for analytic continuation to --lambda")
    p.set_defaults(handler=cmd_resolvent)

    p = sub.add_parser("spectrum", parents=[common], help="Arveson spectrum of the generator")
    p.add_argument("--backend", required=True)
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("funcalc", parents=[common], help="F(-A) for an expression F")
    p.add_argument("--backend", required=True)
    p.add_argument("--expr", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--class", dest="function_class", choices=CLASS_CHOICES, default="auto")
    p.set_defaults(handler=cmd_funcalc)

    p = sub.add_parser("generator", parents=[common], help="the generator as -phi(v')/phi(v)")
    p.add_argument("--backend", required=True)
    p.add_argument("--lambda", dest="lam", type=complex_arg, default=complex(1.0))
    p.set_defaults(handler=cmd_generator)

    p = sub.add_parser("invlaplace", parents=[common], help="inverse Laplace transform on the time grid")
    p.add_argument("--expr", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(handler=cmd_invlaplace)

    p = sub.add_parser("verify", parents=[common], help="run the identity battery")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--backend", action="append", default=None,
                   help="backend spec or random:N; repeatable")
    p.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(attach_signed_values(sys.argv[1:] if argv is None else argv))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    logging.basicConfig(
        level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        settings = load_settings(args.config)
        payload = args.handler(args, settings)
        text = reports.write_json(args.out, payload)
    except (SemigroupError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.out in (None, "-"):
        sys.stdout.write(text)
    if args.command == "verify" and not all(row["pass"] for row in payload):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
