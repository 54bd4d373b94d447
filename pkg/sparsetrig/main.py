"""
main.py

Command-line entry point and subcommand registration.

Subcommands:
    sweep       - success rate versus sparsity for a set of algorithms
    oversample  - smallest oversampling factor reaching a target success rate
    timing      - wall-clock scaling of the solvers in D
    noise       - OMP support recovery under complex gaussian noise
    audit       - violation fractions of the coherence / eigenvalue bounds
    recover     - one-shot recovery from a samples CSV

Exit codes:
    0 success, 2 configuration error, 3 solver abort (degenerate selection,
    singular system, unconverged least squares).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from sparsetrig.config import CONFIG, apply_overrides, load_config
from sparsetrig.core import results_io
from sparsetrig.core.basis_pursuit import BPProblem, debias, solve_bp
from sparsetrig.core.errors import EXIT_OK, ConfigError, SparseTrigError
from sparsetrig.core.greedy import StoppingRule, mp, omp, thresholding
from sparsetrig.core.measurement import MeasurementOperator
from sparsetrig.core.sampling import TWO_PI, SamplingModel, SamplingSet
from sparsetrig.core.spectrum import FrequencySet
from sparsetrig.experiments.base_experiment import (
    ALG_BP,
    ALG_MP,
    ALG_OMP,
    ALG_THRESHOLDING,
    ALGORITHMS,
    MODELS,
    ExperimentConfig,
)
from sparsetrig.experiments.coherence_audit import CoherenceAudit
from sparsetrig.experiments.noise import NoiseRun
from sparsetrig.experiments.oversampling import OversamplingSearch
from sparsetrig.experiments.success_sweep import SuccessSweep
from sparsetrig.experiments.timing import DEFAULT_DIMENSIONS, TimingRun

logger = logging.getLogger(__name__)


##    <(''<)  <( ' ' )>  (>'')>
# ARGUMENT PARSING HELPERS
##    <(''<)  <( ' ' )>  (>'')>

def parse_mrange(text):
    """'1:40' (inclusive), '1:40:2', '1,2,5' or '5' -> tuple of int."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1 or stop < start:
                raise ValueError
            return tuple(range(start, stop + 1, step))
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid sparsity range {text!r}") from None


def parse_list(cast):
    def parse(text):
        try:
            return tuple(cast(p) for p in text.split(",") if p.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from None
    return parse


def parse_algorithms(text):
    algorithms = tuple(a.strip() for a in text.split(",") if a.strip())
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown algorithms {unknown}; choose from {ALGORITHMS}")
    return algorithms


def parse_overrides(pairs):
    """['key=value', ...] -> dict, values decoded as JSON when possible."""
    overrides = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects KEY=VALUE, got {pair!r}")
        try:
            overrides[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            raise ConfigError(f"--tol value for {key!r} is not a number: {value!r}") from None
    unknown = sorted(set(overrides) - set(CONFIG))
    if unknown:
        raise ConfigError(f"unknown --tol keys: {unknown}")
    return overrides


def _add_common(parser, dim, samples, mrange, trials, model, alg):
    parser.add_argument("--dim", type=int, default=dim, help="dimension D of the frequency set")
    parser.add_argument("--grid", type=int, default=None, help="grid size m for --model fft (default D)")
    parser.add_argument("--model", choices=MODELS, default=model, help="sampling model")
    parser.add_argument("--alg", type=parse_algorithms, default=alg,
                        help=f"comma separated subset of {','.join(ALGORITHMS)}")
    parser.add_argument("--mrange", type=parse_mrange, default=parse_mrange(mrange),
                        help="sparsities: '1:40', '1:40:2', '1,2,5'")
    parser.add_argument("--samples", type=int, default=samples, help="number of samples N")
    parser.add_argument("--theta", type=float, default=None,
                        help="fixed oversampling factor, N = ceil(theta M) per row")
    parser.add_argument("--trials", type=int, default=trials, help="trials per row")
    parser.add_argument("--seed", type=int, default=CONFIG["default_seed"], help="base seed")
    parser.add_argument("--coeff", default="gaussian",
                        choices=["gaussian", "unimodular", "real-gaussian"],
                        help="coefficient style")
    parser.add_argument("--real", action="store_true",
                        help="real coefficients, Basis Pursuit in real mode")
    parser.add_argument("--replacement", action="store_true",
                        help="fft model draws grid points with replacement")
    parser.add_argument("--workers", type=int, default=CONFIG["workers"], help="thread pool size")
    parser.add_argument("--tol", action="append", metavar="KEY=VALUE",
                        help="override a tolerance from the config, repeatable")
    parser.add_argument("--out", default=CONFIG["output_dir"], help="output directory or .csv file")
    parser.add_argument("--dat", action="store_true", help="also write a gnuplot .dat companion")


def experiment_config(args, experiment, **extra):
    """ExperimentConfig from parsed common arguments."""
    style = "real-gaussian" if args.real else args.coeff
    return ExperimentConfig(
        experiment=experiment,
        dimension=args.dim,
        samples=args.samples,
        theta=args.theta,
        sparsities=args.mrange,
        trials=args.trials,
        model=args.model,
        grid=args.grid,
        distinct=not args.replacement,
        coefficient_style=style,
        algorithms=args.alg,
        seed=args.seed,
        real_mode=args.real,
        workers=args.workers,
        overrides=parse_overrides(args.tol),
        **extra,
    )


def _report(experiment, args):
    path = experiment.save(args.out, dat=args.dat)
    print(experiment.table().to_string(index=False))
    print(f"\nwrote {path}")
    return EXIT_OK


##    <(''<)  <( ' ' )>  (>'')>
# SUBCOMMAND HANDLERS
##    <(''<)  <( ' ' )>  (>'')>

def run_sweep(args):
    cfg = experiment_config(args, "success-sweep")
    return _report(SuccessSweep(cfg, include_times=args.times), args)


def run_oversample(args):
    cfg = experiment_config(args, "oversampling-search", dimensions=args.dims, target=args.target)
    return _report(OversamplingSearch(cfg), args)


def run_timing(args):
    cfg = experiment_config(args, "timing", dimensions=args.dims, repeats=args.repeats)
    return _report(TimingRun(cfg), args)


def run_noise(args):
    cfg = experiment_config(args, "noise", noise_variances=args.variances)
    return _report(NoiseRun(cfg), args)


def run_audit(args):
    cfg = experiment_config(args, "coherence-audit", eps=args.eps, delta=args.delta)
    return _report(CoherenceAudit(cfg, sample_scale=args.scale), args)


def _sampling_from_points(points, grid):
    """SamplingSet for points read from CSV; on a grid they must be grid points."""
    if grid is None:
        return SamplingSet(points, SamplingModel.continuous(points.shape[1]))
    scaled = points * grid / TWO_PI
    indices = np.rint(scaled).astype(np.int64)
    if np.max(np.abs(scaled - indices), initial=0.0) > 1e-9:
        raise ConfigError(f"sample points are not on the grid (2pi/{grid}) Z_{grid}")
    indices = np.mod(indices, grid)
    model = SamplingModel.discrete(grid, points.shape[1])
    return SamplingSet(TWO_PI * indices / grid, model, grid_indices=indices)


def run_recover(args):
    """Recover coefficients from a samples CSV and write them as CSV."""
    points, values = results_io.read_samples(args.input)
    dimension = points.shape[1]
    if dimension == 1:
        base = FrequencySet.centered(args.dim)
    else:
        if args.order is None:
            raise ConfigError("multivariate samples need --order q for the cube {-q..q}^d")
        base = FrequencySet.cube(args.order, dimension)

    sampling = _sampling_from_points(points, args.grid)
    op = MeasurementOperator(sampling, base)
    apply_overrides(parse_overrides(args.tol))

    if args.alg == ALG_OMP:
        estimate = omp(op, values, StoppingRule.default(values, args.sparsity)).coefficients
    elif args.alg == ALG_MP:
        estimate = mp(op, values, StoppingRule.default(values, args.sparsity)).coefficients
    elif args.alg == ALG_THRESHOLDING:
        if args.sparsity is None:
            raise ConfigError("thresholding needs --sparsity")
        estimate = thresholding(op, values, args.sparsity).coefficients
    else:
        solution = solve_bp(BPProblem(op, values, args.real))
        estimate = debias(op, solution.coefficients, values, args.real)

    out = results_io.resolve_result_path(args.out, Path(args.input).stem, results_io.SUFFIX_RECOVERED)
    results_io.write_coefficients(base, estimate, out)
    residual = float(np.linalg.norm(op.apply(estimate) - values))
    print(f"recovered {np.count_nonzero(estimate)} coefficients, residual {residual:.3e}")
    print(f"wrote {out}")
    return EXIT_OK


##    <(''<)  <( ' ' )>  (>'')>
# PARSER
##    <(''<)  <( ' ' )>  (>'')>

# (つ -' _ '- )つ    (つ -' _ '- )つ
# SUBCOMMAND REGISTRY
# (name, help, common defaults, extra-arguments hook, handler) in help order.
# To add a subcommand: append an entry here.
# (つ -' _ '- )つ    (つ -' _ '- )つ

def _sweep_args(p):
    p.add_argument("--times", action="store_true",
                   help="include mean wall-clock seconds (not reproducible)")


def _oversample_args(p):
    p.add_argument("--dims", type=parse_list(int), default=(64, 256, 1024),
                   help="dimensions D to search")
    p.add_argument("--target", type=float, default=CONFIG["oversampling_target"],
                   help="success rate to reach")


def _timing_args(p):
    p.add_argument("--dims", type=parse_list(int), default=DEFAULT_DIMENSIONS,
                   help="dimensions D to time")
    p.add_argument("--repeats", type=int, default=CONFIG["timing_repeats"],
                   help="timed runs per point, median reported")


def _noise_args(p):
    p.add_argument("--variances", type=parse_list(float),
                   default=(0.0, *CONFIG["noise_variances"]), help="noise variances sigma^2")


def _audit_args(p):
    p.add_argument("--eps", type=float, default=0.1, help="failure probability")
    p.add_argument("--delta", type=float, default=0.5, help="eigenvalue band half-width")
    p.add_argument("--scale", type=float, default=1.0, help="multiply the bound sample counts")


COMMANDS = [
    ("sweep", "success rate versus sparsity",
     dict(dim=CONFIG["default_dimension"], samples=CONFIG["default_samples"], mrange="1:40",
          trials=CONFIG["default_trials"], model="fft", alg=(ALG_OMP, ALG_BP)),
     _sweep_args, run_sweep),
    ("oversample", "smallest oversampling factor reaching the target rate",
     dict(dim=CONFIG["default_dimension"], samples=CONFIG["default_samples"], mrange="8",
          trials=CONFIG["oversampling_trials"], model="nfft", alg=(ALG_OMP,)),
     _oversample_args, run_oversample),
    ("timing", "wall-clock scaling in D",
     dict(dim=CONFIG["default_dimension"], samples=CONFIG["default_samples"], mrange="1",
          trials=1, model="fft", alg=(ALG_OMP, "omp-lsqr-implicit", ALG_BP)),
     _timing_args, run_timing),
    ("noise", "OMP under complex gaussian noise",
     dict(dim=300, samples=30, mrange="5", trials=1, model="nfft", alg=(ALG_OMP,)),
     _noise_args, run_noise),
    ("audit", "coherence and eigenvalue-band violation fractions",
     dict(dim=16, samples=CONFIG["default_samples"], mrange="2",
          trials=CONFIG["audit_trials"], model="fft",
          alg=(ALG_OMP,)),
     _audit_args, run_audit),
]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparsetrig",
        description="Sparse trigonometric polynomial recovery from random samples",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--config", default=None, help="JSON file of config overrides")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, help_text, defaults, extra, handler in COMMANDS:
        sub = subparsers.add_parser(name, help=help_text,
                                    formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        _add_common(sub, **defaults)
        extra(sub)
        sub.set_defaults(handler=handler)

    recover = subparsers.add_parser("recover", help="one-shot recovery from a samples CSV",
                                    formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    recover.add_argument("input", help="samples CSV with columns x1..xd, re, im")
    recover.add_argument("--dim", type=int, default=CONFIG["default_dimension"],
                         help="dimension D of the univariate frequency set")
    recover.add_argument("--order", type=int, default=None,
                         help="cube order q for multivariate samples")
    recover.add_argument("--grid", type=int, default=None,
                         help="points lie on the grid (2pi/m) Z_m^d")
    recover.add_argument("--alg", choices=[ALG_OMP, ALG_MP, ALG_THRESHOLDING, ALG_BP],
                         default=ALG_OMP, help="solver")
    recover.add_argument("--sparsity", type=int, default=None,
                         help="stop at s = M (default: residual tolerance)")
    recover.add_argument("--real", action="store_true", help="Basis Pursuit over real coefficients")
    recover.add_argument("--tol", action="append", metavar="KEY=VALUE",
                         help="override a tolerance from the config, repeatable")
    recover.add_argument("--out", default=CONFIG["output_dir"], help="output directory or .csv file")
    recover.set_defaults(handler=run_recover)
    return parser


def main(argv=None):
    """Parse arguments, run one subcommand, return the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        if args.config:
            apply_overrides(load_config(args.config))
        return args.handler(args)
    except SparseTrigError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())

# U S A G I
# sparsetrig sweep --dim 100 --samples 40 --mrange 1:40 --alg omp,bp,thresholding --trials 100
# sparsetrig recover samples.csv --dim 100 --alg omp --sparsity 5 --out recovered.csv
