"""``iss`` command line: deal, recover, verify, density.

Exit status: 0 success, 1 a failed check or an unqualified recovery,
2 a configuration or input error.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import sys
from typing import Sequence, TextIO

from ..dealing import fmt, read_dealings, write_dealings
from ..errors import BadParameter, CsvFormatError, NotQualified, SharingError, UnknownScheme
from ..rng import substream
from . import registry
from .config import ExperimentConfig, build_config, read_config_file
from .density import run_density, write_density
from .report import write_reports
from .suites import run_verify

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULT_TRIALS = {"deal": 1, "verify": 100_000, "density": 1_000_000, "recover": 1}

# scheme parameters accepted as --flags (dashes become underscores)
PARAMS = {
    "n": "participant count / truncation",
    "k": "threshold",
    "labels": "comma-separated participant labels",
    "sigma": "anchor standard deviation (gauss-threshold)",
    "lam": "security parameter lambda",
    "max-k": "largest random degree",
    "sigmas": "comma-separated standard deviations (l2, wrapped-normal density)",
    "ratio": "geometric ratio of l2 sigmas",
    "base": "composite base, e.g. '0,1;1,2'",
    "M": "Wiener grid resolution",
    "gaps": "excluded intervals, e.g. '0.2:0.3,0.6:0.65'",
    "epsilon": "dense qualification gap threshold",
    "depth": "binary tree depth",
    "times": "comma-separated participant times (wiener-limit)",
    "r-values": "comma-separated obfuscating values",
    "R": "lattice radius",
    "d": "strip width (strip) or comma-separated distances (projective density)",
    "program": "Hilbert program file",
    "participant": "participant index (projective density)",
    "method": "projective density method: binning or rotational",
    "bins": "histogram bins",
    "tol": "conditioning tolerance (projective binning)",
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iss", description="Continuous-domain secret sharing laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("deal", "deal secrets and write share CSV"),
        ("recover", "recover secrets from share CSV"),
        ("verify", "run a scheme's verification suite"),
        ("density", "emit density curves"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scheme", help="scheme name: " + ", ".join(registry.scheme_names() + ["wrapped-normal"]))
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--workers", type=int)
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="any scheme parameter, repeatable")
        if name == "recover":
            p.add_argument("--in", dest="input", default="-", help="share CSV (default stdin)")
            p.add_argument("--participants", help="comma-separated participant indices to use")
        for flag, help_text in PARAMS.items():
            p.add_argument(f"--{flag}", dest=f"p_{flag.replace('-', '_')}", help=help_text)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_values = read_config_file(args.config) if args.config else {}
    file_values.setdefault("trials", str(DEFAULT_TRIALS[args.command]))
    overrides = {"scheme": args.scheme, "out": args.out}
    for key in ("trials", "seed", "workers"):
        value = getattr(args, key)
        overrides[key] = None if value is None else str(value)
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise BadParameter(f"--param expects KEY=VALUE, got {item!r}")
        overrides[key.strip().replace("-", "_")] = value.strip()
    for key, value in vars(args).items():
        if key.startswith("p_") and value is not None:
            overrides[key[2:]] = value
    return build_config(file_values, overrides)


@contextlib.contextmanager
def open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_deal(cfg: ExperimentConfig, out: TextIO) -> int:
    scheme = registry.build(cfg)
    write_dealings((scheme.deal(substream(cfg.seed, i)) for i in range(cfg.trials)), out)
    return EXIT_OK


def cmd_recover(cfg: ExperimentConfig, args: argparse.Namespace, out: TextIO) -> int:
    scheme = registry.build(cfg)
    if args.input == "-":
        trials = read_dealings(sys.stdin)
    else:
        try:
            with open(args.input, newline="") as fh:
                trials = read_dealings(fh)
        except OSError as exc:
            raise BadParameter(f"cannot read {args.input}: {exc}") from None
    keep = None
    if args.participants:
        try:
            keep = {int(t) for t in args.participants.split(",") if t.strip()}
        except ValueError:
            raise BadParameter(f"--participants must be integers, got {args.participants!r}") from None
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("trial", "estimate", "conditional_variance"))
    for trial in sorted(trials):
        shares = trials[trial].shares
        if keep is not None:
            shares = {p: v for p, v in shares.items() if p in keep}
        rec = registry.recover_trial(cfg.scheme, scheme, shares)
        writer.writerow((trial, fmt(rec.estimate), fmt(rec.conditional_variance)))
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig, out: TextIO) -> int:
    reports = run_verify(cfg)
    write_reports(reports, out)
    failed = [r.check for r in reports if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(reports)} checks failed: {', '.join(sorted(failed))}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_density(cfg: ExperimentConfig, out: TextIO) -> int:
    header, rows = run_density(cfg)
    write_density(header, rows, out)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        with open_out(cfg.out) as out:
            if args.command == "deal":
                return cmd_deal(cfg, out)
            if args.command == "recover":
                return cmd_recover(cfg, args, out)
            if args.command == "verify":
                return cmd_verify(cfg, out)
            return cmd_density(cfg, out)
    except NotQualified as exc:
        print(f"not qualified: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except CsvFormatError as exc:
        print(f"malformed CSV: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BadParameter, UnknownScheme) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SharingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
