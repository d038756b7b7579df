#!/usr/bin/env python3
"""
Command-line front end for spike-train goodness-of-fit analysis.

Usage:
    python cli.py simulate --model m.json --horizon 600 --seed 7 --svg
    python cli.py transform --train out/train.txt --model m.json
    python cli.py test --train out/train.txt --model m.json --level 0.05 --svg
    python cli.py fit --train out/train.txt --family invgauss --test
    python cli.py calibrate --level 0.9
    python cli.py verify-band --level 0.95
    python cli.py coverage --sizes 10,50,100 --replicates 2000 --svg
    python cli.py joint --sizes 100 --replicates 5000

Exit codes: 0 success, 1 a test rejected at the configured level, 2 usage,
input or configuration error.
"""
import argparse
import logging
import math
import sys
from pathlib import Path

from boundary import DEFAULT_BANDS, DEFAULT_OFFSET, BoundarySpec, calibrate_band, verify_band
from config import config
from errors import AnalysisError
from fit import fit_train, fitted_model_battery
from gof import Battery, run_battery
from harness import (
    DEFAULT_SIZES,
    coverage_experiment,
    joint_rejection_experiment,
    write_table,
)
from intensity import FAMILIES, load_model
from plots import render_coverage, render_joint, render_plots, render_simulation
from rescale import time_transform
from simulate import RngStream, thin_simulate
from trains import (
    TransformedTrain,
    parse_transformed,
    read_train,
    serialize_transformed,
    write_train,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_USAGE = 2

_EPILOG = """
Model files are JSON ({"hazard": {"family": "invgauss", "mu": 0.075, "sigma2": 3},
"stimulus": {"p": 20, "m": 5, "t0": 4}}) or key=value lines (family=invgauss,
stimulus.p=20, ...). Outputs go to --out-dir (default: $SPIKEGOF_OUT_DIR or "out").
"""


def _sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError("at least one sample size is required")
    return sizes


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} is not in (0, 1)")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None,
                        help="Directory for reports, tables and plots")
    common.add_argument("--svg", action="store_true", help="Also write SVG plots")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=None, help="Random seed")
    seeded.add_argument("--stream", type=int, default=0, help="Random stream id")

    modelled = argparse.ArgumentParser(add_help=False)
    modelled.add_argument("--train", required=True, help="Spike-train file")
    modelled.add_argument("--model", help="Model specification file")

    monte_carlo = argparse.ArgumentParser(add_help=False)
    monte_carlo.add_argument("--sizes", type=_sizes, default=None,
                             help="Comma-separated sample sizes")
    monte_carlo.add_argument("--replicates", type=int, default=None, help="Replicates per size")
    monte_carlo.add_argument("--threads", type=int, default=None,
                             help="Worker threads (default: machine parallelism)")
    monte_carlo.add_argument("--progress", action="store_true", help="Show a progress bar")

    parser = argparse.ArgumentParser(
        description="Goodness-of-fit tests for spike-train models",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, seeded],
                       help="Simulate a train from a model by thinning")
    p.add_argument("--model", required=True, help="Model specification file")
    p.add_argument("--horizon", type=float, required=True, help="Observation length (s)")
    p.add_argument("--train", default=None, help="Output train file (default: OUT/train.txt)")

    p = sub.add_parser("transform", parents=[common, modelled],
                       help="Write the time-transformed train")
    p.add_argument("--horizon", type=float, default=None, help="Override the train horizon")

    p = sub.add_parser("test", parents=[common, seeded, modelled],
                       help="Run the five-test battery")
    p.add_argument("--level", type=_probability, default=None, help="Significance level")
    p.add_argument("--horizon", type=float, default=None, help="Override the train horizon")
    p.add_argument("--permutations", type=int, default=None,
                   help="Serial-correlation permutations")

    p = sub.add_parser("fit", parents=[common, seeded],
                       help="Fit a renewal model to the intervals of a train")
    p.add_argument("--train", required=True, help="Spike-train file")
    p.add_argument("--family", default="invgauss", choices=sorted(FAMILIES),
                   help="Interval family")
    p.add_argument("--uncensored", action="store_true",
                   help="Ignore the stretch after the last event")
    p.add_argument("--test", action="store_true", help="Also test the fitted model")
    p.add_argument("--level", type=_probability, default=None, help="Significance level")

    p = sub.add_parser("calibrate", parents=[common],
                       help="Solve for the band slope b at a confidence level")
    p.add_argument("--level", type=_probability, default=0.95, help="Two-sided confidence")
    p.add_argument("--offset", type=float, default=DEFAULT_OFFSET, help="Fixed offset a")
    p.add_argument("--step", type=float, default=None, help="Integration step")

    p = sub.add_parser("verify-band", parents=[common],
                       help="Coverage interval of a band from the first-passage solver")
    p.add_argument("--level", type=_probability, default=0.95, help="Two-sided confidence")
    p.add_argument("--a", type=float, default=None, help="Band offset")
    p.add_argument("--b", type=float, default=None, help="Band slope")
    p.add_argument("--step", type=float, default=None, help="Integration step")

    p = sub.add_parser("coverage", parents=[common, seeded, monte_carlo],
                       help="Wiener band coverage against sample size")

    p = sub.add_parser("joint", parents=[common, seeded, monte_carlo],
                       help="Joint rejections of test pairs")
    p.add_argument("--level", type=_probability, default=0.05, help="Significance level")
    return parser


def _out_dir(args) -> Path:
    out = Path(args.out_dir or config.SPIKEGOF_OUT_DIR)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _rng(args) -> RngStream:
    seed = config.DEFAULT_SEED if args.seed is None else args.seed
    return RngStream(seed, args.stream)


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def _transformed(args) -> TransformedTrain:
    """A `# scale=lambda` file is taken as already transformed; anything else
    needs --model."""
    text = Path(args.train).read_text(encoding="ascii")
    if text.lstrip().startswith("# scale=lambda"):
        return parse_transformed(text)
    if not args.model:
        raise AnalysisError("--model is required unless --train is already transformed")
    train = read_train(args.train, args.horizon)
    return time_transform(train, load_model(args.model))


def _finish_battery(battery: Battery, args, out: Path) -> int:
    _write(out / "battery.json", battery.to_json() + "\n")
    if args.svg:
        render_plots(battery, out)
    for report in battery:
        verdict = "reject" if report.rejects(battery.level) else "pass"
        p = "" if report.p_value is None else f" p={report.p_value:.4g}"
        print(f"{report.test_name:<14} {verdict}{p}")
    for name, reason in battery.skipped.items():
        print(f"{name:<14} skipped ({reason})")
    return EXIT_REJECTED if battery.rejected() else EXIT_OK


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    train = thin_simulate(model, args.horizon, _rng(args))
    out = _out_dir(args)
    path = write_train(Path(args.train) if args.train else out / "train.txt", train)
    logger.info(f"Simulated {train.n} events on (0, {args.horizon:g}] into {path}")
    print(f"{train.n} events written to {path}")
    if args.svg:
        tt = time_transform(train, model) if train.n > 1 else None
        render_simulation(train, model, tt, out)
    return EXIT_OK


def cmd_transform(args) -> int:
    tt = _transformed(args)
    out = _out_dir(args)
    _write(out / "transformed.txt", serialize_transformed(tt))
    print(f"{tt.n} transformed events, total {tt.total:.10g}")
    return EXIT_OK


def cmd_test(args) -> int:
    tt = _transformed(args)
    battery = run_battery(tt, level=args.level, n_perm=args.permutations, rng=_rng(args))
    return _finish_battery(battery, args, _out_dir(args))


def cmd_fit(args) -> int:
    train = read_train(args.train)
    result = fit_train(train, args.family, censored=not args.uncensored)
    out = _out_dir(args)
    _write(out / "fit.json", result.to_json() + "\n")
    print(result.to_json())
    if not args.test:
        return EXIT_OK
    battery = fitted_model_battery(
        train, args.family, level=args.level, censored=not args.uncensored,
        fit=result, rng=_rng(args),
    )
    return _finish_battery(battery, args, out)


def cmd_calibrate(args) -> int:
    spec = calibrate_band(1.0 - args.level, args.offset, args.step)
    print(f"a={spec.a:.15g}")
    print(f"b={spec.b:.15g}")
    return EXIT_OK


def cmd_verify_band(args) -> int:
    if args.a is None and args.b is None:
        band = next(
            (b for lv, b in DEFAULT_BANDS.items() if math.isclose(lv, args.level)), None
        )
        if band is None:
            band = calibrate_band(1.0 - args.level, DEFAULT_OFFSET, args.step)
    elif args.a is None or args.b is None:
        raise AnalysisError("give both --a and --b, or neither")
    else:
        band = BoundarySpec(args.a, args.b, args.level)
    if args.step is not None:
        band = BoundarySpec(band.a, band.b, band.level, args.step)
    low, high = verify_band(band)
    print(f"a={band.a:.15g} b={band.b:.15g} step={band.step:g}")
    print(f"coverage in [{low:.15g}, {high:.15g}]")
    return EXIT_OK


def cmd_coverage(args) -> int:
    rows = coverage_experiment(
        sizes=args.sizes or DEFAULT_SIZES,
        replicates=args.replicates or 10_000,
        seed=args.seed,
        threads=args.threads,
        progress=args.progress,
    )
    out = _out_dir(args)
    write_table(rows, out / "coverage.csv")
    if args.svg:
        render_coverage(rows, out)
    for row in rows:
        mark = "" if row.inside_band else "  (outside band)"
        print(f"n={row.n:<5} level={row.level:g} coverage={row.empirical:.4f}{mark}")
    return EXIT_OK


def cmd_joint(args) -> int:
    rows = joint_rejection_experiment(
        sizes=args.sizes or (100,),
        replicates=args.replicates or 10_000,
        level=args.level,
        seed=args.seed,
        threads=args.threads,
        progress=args.progress,
    )
    out = _out_dir(args)
    write_table(rows, out / "joint.csv")
    if args.svg:
        render_joint(rows, out)
    for row in rows:
        print(f"n={row.n:<5} {row.pair:<16} {row.joint_count} "
              f"(band {row.band_low}..{row.band_high})")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "transform": cmd_transform,
    "test": cmd_test,
    "fit": cmd_fit,
    "calibrate": cmd_calibrate,
    "verify-band": cmd_verify_band,
    "coverage": cmd_coverage,
    "joint": cmd_joint,
}


def _configure_logging(verbose: bool) -> None:
    # An unknown LOG_LEVEL falls back to INFO here; config.validate() reports it.
    level = getattr(logging, "getLevelNamesMapping", logging._nameToLevel.copy)().get(config.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=level,
    )
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def run(argv: list[str] | None = None) -> int:
    """Parse argv, run one subcommand and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.verbose)
        config.validate()
        return COMMANDS[args.command](args)
    except SystemExit as e:
        # argparse usage errors and --help, and a failed config validation
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except AnalysisError as e:
        logger.error(e.user_message)
        print(f"error: {e.user_message}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        # out-of-domain numeric arguments and undecodable input files
        logger.error(f"Invalid input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
