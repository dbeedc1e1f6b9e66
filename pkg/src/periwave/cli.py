"""Command-line entry point: ``periwave <subcommand> [options]``."""
import argparse
import sys

from .errors import ConfigurationError, NumericalError
from .experiments import EXPERIMENTS, ExperimentConfig

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3, 64

USAGE = ("usage: periwave {%s} [--config FILE] [--out DIR] [--seed N] "
         "[--n-times N] [--tol KEY=VALUE ...]" % ",".join(EXPERIMENTS))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def _parser(name):
    p = _Parser(prog=f"periwave {name}", description=EXPERIMENTS[name].__doc__)
    p.add_argument("--config", help="TOML config; built-in defaults when omitted")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="override [experiment] seed")
    p.add_argument("--n-times", type=int, help="override [experiment] n_times")
    p.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                   help="override a verdict tolerance; repeatable")
    return p


def _tolerance_overrides(items):
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--tol expects KEY=VALUE, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise ConfigurationError(f"--tol value for {key!r} is not a number") from None
    return out


def build_config(args):
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig.default()
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.n_times is not None:
        config = config.with_changes("experiment", n_times=args.n_times)
    if args.tol:
        config = config.with_tolerances(_tolerance_overrides(args.tol))
    return config


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in EXPERIMENTS:
        if argv and argv[0] in ("-h", "--help"):
            print(USAGE)
            return EXIT_OK
        print(USAGE, file=sys.stderr)
        return EXIT_USAGE
    name = argv[0]
    try:
        args = _parser(name).parse_args(argv[1:])
        config = build_config(args)
        report = EXPERIMENTS[name](config)
        csv_path, json_path = report.write(args.out)
    except ConfigurationError as exc:
        print(f"periwave {name}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"periwave {name}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for v in report.verdicts:
        flag = " (tolerance overridden)" if v.overridden else ""
        print(f"{v.status.upper():7s} {v.name}: {v.value} [{v.tolerance}]{flag}")
    print(f"wrote {csv_path} and {json_path}")
    print(f"determinism hash {report.determinism_hash()}")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
