"""Command line entry point ``fou-sheet``.

Usage::

    fou-sheet <kind> [--config PATH] [--seed N] [--out PATH] [overrides]

Exit codes: 0 success, 1 invalid configuration or arguments, 2 failure
while running, 3 file I/O error. ``FOU_SHEET_WORKERS`` sets the number of
worker threads.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import KINDS, parse_config
from .errors import ExperimentError, ParseError, ValidationError
from .experiments import run_experiment, write_report

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _horizons(text: str):
    out = []
    for part in text.split(","):
        part = part.strip().lower()
        if not part:
            continue
        if "x" in part:
            t, s = part.split("x", 1)
            out.append((float(t), float(s)))
        else:
            out.append((float(part), float(part)))
    if not out:
        raise argparse.ArgumentTypeError("need at least one horizon")
    return tuple(out)


def _floats(text: str):
    return tuple(float(p) for p in text.split(",") if p.strip())


def build_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="fou-sheet", description="Fractional OU sheet experiments.")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", dest="output_path", help="report stem; writes STEM.json and STEM.csv")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--horizons", type=_horizons, help="comma list, T or TxS")
    p.add_argument("--cell-step", dest="cell_step", type=float)
    p.add_argument("--replications", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--lemma-alphas", dest="lemma_alphas", type=_floats)
    p.add_argument("--lemma-betas", dest="lemma_betas", type=_floats)
    p.add_argument("--i-know-this-is-slow", dest="allow_slow", action="store_true", default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    source = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                source = fh.read()
        except OSError as exc:
            print(f"fou-sheet: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    try:
        cfg = parse_config(source, overrides)
    except ParseError as exc:
        print(f"fou-sheet: {args.config or '<config>'}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"fou-sheet: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for w in cfg.warnings:
        print(f"fou-sheet: warning: {w}", file=sys.stderr)
    try:
        report = run_experiment(cfg)
    except ExperimentError as exc:
        print(f"fou-sheet: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        jpath, cpath = write_report(report, cfg.output_path)
    except OSError as exc:
        print(f"fou-sheet: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"fou-sheet: wrote {jpath} and {cpath} in {report.wall_clock:.2f} s", file=sys.stderr)
    for key, val in sorted(report.summary.items()):
        print(f"{key}: {val}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
