"""Command-line front end.

Exit status: 0 success, 1 verification failure, 2 usage or file error,
3 numeric error.
"""

import argparse
import json
import sys

import numpy as np

from . import fileio
from .convergence import charfn_convergence, continuity_experiment, make_panel
from .errors import FormatError, GapError, NumericError
from .estimators import empirical_char_fn, estimate
from .fileio import SampleBatch, atomic_write
from .measures import (GaussianMeasureSpec, char_fn_gaussian, sample_G_batch,
                       sample_GAP_mixture_batch, sample_GAP_reweight_batch)
from .spectral import (DensityOperator, maximally_mixed, pure_state, thermal_oscillator,
                       thermal_state, trace_distance, validate_hermitian)
from .streams import derive_seed
from .verify import DEFAULTS, SUITES, dumps_report, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
MEASURE_NAMES = {"G": "G", "GAP-mixture": "GAP", "GAP-reweight": "GA-weighted"}
PRESETS = ("maximally-mixed", "pure", "thermal-qho")


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


def _log(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _read_rho(path):
    return DensityOperator.from_matrix(fileio.read_matrix(path))


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def cmd_density(args):
    if args.hamiltonian:
        if args.beta is None:
            raise SystemExit("density: --hamiltonian requires --beta")
        rho = thermal_state(validate_hermitian(fileio.read_matrix(args.hamiltonian)), args.beta)
    elif args.rho:
        rho = _read_rho(args.rho)
    elif args.preset:
        if args.dim is None:
            raise SystemExit("density: presets require --dim")
        if args.preset == "maximally-mixed":
            rho = maximally_mixed(args.dim)
        elif args.preset == "pure":
            rho = pure_state(np.eye(args.dim)[0])
        else:
            if args.beta is None:
                raise SystemExit("density: thermal-qho requires --beta")
            rho = thermal_oscillator(args.beta, args.dim)
    else:
        raise SystemExit("density: give one of --preset, --hamiltonian, --rho")
    _emit(fileio.dumps_matrix(rho.matrix), args.out)
    _log(args, "eigenvalues: " + " ".join("%.17g" % p for p in rho.eigenvalues))
    return EXIT_OK


def cmd_sample(args):
    rho = _read_rho(args.rho)
    measure = MEASURE_NAMES[args.measure]
    weights = None
    if args.measure == "G":
        vectors = sample_G_batch(rho, args.seed, args.n)
    elif args.measure == "GAP-mixture":
        vectors = sample_GAP_mixture_batch(rho, args.seed, args.n)
    else:
        vectors, weights = sample_GAP_reweight_batch(rho, args.seed, args.n)
    batch = SampleBatch(vectors, measure, args.seed, weights, args.rho)
    _emit(fileio.dumps_batch(batch), args.out)
    _log(args, f"wrote {args.n} {measure} samples (dim {rho.dim}, seed {args.seed})")
    return EXIT_OK


def cmd_estimate(args):
    batch = fileio.read_batch(args.batch)
    ref = _read_rho(args.ref) if args.ref else None
    if ref is not None and ref.dim != batch.dim:
        raise FormatError(f"reference dim {ref.dim} does not match batch dim {batch.dim}")
    report = estimate(batch, ref)
    report.extra["measure"] = batch.measure
    _emit(report.dumps(), args.out)
    if report.trace_distance is not None:
        _log(args, f"trace distance to reference: {report.trace_distance:.6g}")
    return EXIT_OK


def cmd_charfn(args):
    rho = _read_rho(args.rho)
    spec = GaussianMeasureSpec.centered(rho)
    batch = sample_G_batch(spec, args.seed, args.n)
    vectors = sample_G_batch(maximally_mixed(rho.dim), derive_seed(args.seed, 1), args.m) * np.sqrt(rho.dim)
    rows = []
    for v in vectors:
        emp, exact = empirical_char_fn(batch, v), char_fn_gaussian(spec, v)
        rows.append({"psi": [[float(z.real), float(z.imag)] for z in v],
                     "empirical": [emp.real, emp.imag], "closed_form": [exact.real, exact.imag],
                     "error": abs(emp - exact)})
    out = {"n": args.n, "seed": args.seed, "threshold": 4 / np.sqrt(args.n),
           "max_error": max(r["error"] for r in rows), "points": rows}
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    _log(args, f"max |empirical - closed form| = {out['max_error']:.6g} (4/sqrt(N) = {out['threshold']:.6g})")
    return EXIT_OK


def cmd_continuity(args):
    rho, sigma = _read_rho(args.rho), _read_rho(args.sigma)
    if rho.dim != sigma.dim:
        raise FormatError("rho and sigma dimensions differ")
    panel = make_panel(rho.dim, args.seed, args.m)
    report = continuity_experiment(rho, sigma, args.ns, args.n, args.seed, panel)
    if args.csv:
        _emit(report.to_csv(), args.out)
    else:
        conv = charfn_convergence(rho, sigma, args.ns, panel.anchors[1:])
        out = {"seed": args.seed, "N": args.n, "full_trace_distance": trace_distance(sigma, rho),
               "records": report.to_json(),
               "charfn": [{"n": n, "max_gap": float(g.max()), "max_bound": float(b.max())}
                          for n, g, b in zip(conv.ns, conv.gaps, conv.bounds)]}
        _emit(json.dumps(out, indent=2) + "\n", args.out)
    for rec in report.records:
        _log(args, f"n={rec.n:5d}  trace distance {rec.trace_distance:.6g}  "
                   f"max disc/se {np.max(rec.discrepancies / np.maximum(rec.standard_errors, 1e-300)):.3g}")
    return EXIT_OK


def cmd_verify(args):
    only = args.only or None
    if only and any(k not in range(1, 11) for k in only):
        raise SystemExit(f"verify: criteria are numbered 1..10, got {only}")
    echo = None if args.quiet else print
    results = run_suite(args.suite, args.seed, only, echo=echo)
    if args.out:
        atomic_write(args.out, dumps_report(results, args.suite, args.seed))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULTS["seed"],
                        help="64-bit seed (default %(default)s)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    p = argparse.ArgumentParser(
        prog="gapmeasures",
        description="Sample and verify GAP measures of density operators.",
        epilog=f"defaults: seed {DEFAULTS['seed']}, N {DEFAULTS['N']}, panel size "
               f"{DEFAULTS['panel_size']}, support cutoff {DEFAULTS['cutoff']:g}, truncation cap "
               f"{DEFAULTS['truncation_cap']}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("density", parents=[common], help="write a density operator file")
    d.add_argument("--preset", choices=PRESETS)
    d.add_argument("--dim", type=_positive_int)
    d.add_argument("--beta", type=float)
    d.add_argument("--hamiltonian", metavar="FILE", help="Hamiltonian matrix file (with --beta)")
    d.add_argument("--rho", metavar="FILE", help="existing density file to validate and rewrite")
    d.set_defaults(func=cmd_density)

    s = sub.add_parser("sample", parents=[common], help="write a sample batch")
    s.add_argument("--rho", required=True, metavar="FILE")
    s.add_argument("--measure", choices=tuple(MEASURE_NAMES), default="GAP-mixture")
    s.add_argument("--n", type=_positive_int, default=DEFAULTS["N"])
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("estimate", parents=[common], help="estimator report for a batch file")
    e.add_argument("batch", metavar="BATCH")
    e.add_argument("--ref", metavar="FILE", help="reference density operator")
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("charfn", parents=[common], help="empirical vs closed-form characteristic function")
    c.add_argument("--rho", required=True, metavar="FILE")
    c.add_argument("--n", type=_positive_int, default=DEFAULTS["N"])
    c.add_argument("--m", type=_positive_int, default=20, help="number of panel vectors")
    c.set_defaults(func=cmd_charfn)

    k = sub.add_parser("continuity", parents=[common], help="GAP continuity experiment")
    k.add_argument("--rho", required=True, metavar="FILE")
    k.add_argument("--sigma", required=True, metavar="FILE")
    k.add_argument("--ns", type=_int_list, default=[2, 4, 8, 16, 32, 64])
    k.add_argument("--n", type=_positive_int, default=50_000)
    k.add_argument("--m", type=int, default=DEFAULTS["panel_size"])
    k.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    k.set_defaults(func=cmd_continuity)

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", choices=tuple(SUITES), default="all")
    v.add_argument("--only", type=_int_list, help="comma-separated criterion numbers")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FormatError, GapError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return EXIT_USAGE
        raise


if __name__ == "__main__":
    sys.exit(main())
