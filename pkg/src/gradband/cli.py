"""Command-line interface.

Subcommands::

    gradband gen-maps --n 10 --count 20 --density 0.15 --seed 0 --out-dir corpus/
    gradband run-experiment --maps corpus/ --config exp.ini --out runs/exp1
    gradband aggregate --out runs/exp1
    gradband plot --run-record runs/exp1/maps/<map>/record.json --out figs/
    gradband print-config > exp.ini

Exit codes: 0 success, 1 usage error, 2 data error, 3 experiment failure.
GRADBAND_OUT_DIR supplies the default output directory and GRADBAND_WORKERS
the number of map-level worker processes.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, default_config_text, load_config
from .gridmap import MapError
from .plotting import RecordSchemaError, render_record

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FAILED = 0, 1, 2, 3

log = logging.getLogger("gradband")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_dir(value: str | None, what: str) -> Path:
    value = value or os.environ.get("GRADBAND_OUT_DIR")
    if not value:
        raise UsageError(f"{what} is required (or set GRADBAND_OUT_DIR)")
    return Path(value)


def _workers(default: int) -> int:
    raw = os.environ.get("GRADBAND_WORKERS")
    if raw is None:
        return default
    try:
        workers = int(raw)
    except ValueError:
        raise UsageError(f"GRADBAND_WORKERS must be an integer, got {raw!r}") from None
    if workers < 1:
        raise UsageError("GRADBAND_WORKERS must be >= 1")
    return workers


def cmd_gen_maps(args) -> int:
    from .experiment import generate_corpus

    if not 0.0 <= args.density < 1.0:
        raise UsageError(f"--density must lie in [0, 1), got {args.density}")
    if args.n < 5 or args.count < 1:
        raise UsageError("--n must be >= 5 and --count >= 1")
    out = _out_dir(args.out_dir, "--out-dir")
    manifest = generate_corpus(args.n, args.count, args.density, args.seed, out)
    print(f"{args.count} maps of {args.n}x{args.n} in {out} ({len(manifest['maps'])} in manifest)")
    return EXIT_OK


def cmd_run_experiment(args) -> int:
    from .experiment import run_experiment

    cfg = load_config(args.config)
    out = _out_dir(args.out, "--out")
    summary = run_experiment(args.maps, cfg, out, workers=_workers(cfg.experiment.workers))
    _print_summary(summary)
    ok = sum(c["maps_ok"] for c in summary["size_classes"])
    if summary["maps"] and not ok:
        print("every map failed; see summary.json", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_aggregate(args) -> int:
    from .experiment import aggregate

    out = _out_dir(args.out, "--out")
    if not (out / "maps").is_dir():
        raise FileNotFoundError(f"{out} holds no per-map records")
    _print_summary(aggregate(out))
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        record = json.loads(Path(args.run_record).read_text())
    except json.JSONDecodeError as exc:
        raise RecordSchemaError(f"{args.run_record} is not JSON: {exc}") from exc
    summary = json.loads(Path(args.summary).read_text()) if args.summary else None
    images = render_record(record, _out_dir(args.out, "--out"), args.format, summary)
    for path in images:
        print(path)
    return EXIT_OK


def cmd_print_config(args) -> int:
    sys.stdout.write(default_config_text())
    return EXIT_OK


def _print_summary(summary: dict) -> None:
    def pct(v):
        return "   n/a" if v is None else f"{100 * v:6.2f}"

    print("size  maps  ok  gen%    imm%    speedup")
    for c in summary["size_classes"]:
        speed = "   n/a" if c["speedup"] is None else f"{c['speedup']:6.2f}"
        print(f"{c['size_n']:>4}  {c['maps']:>4}  {c['maps_ok']:>2}  {pct(c['generation_precision'])}  {pct(c['immune_precision'])}  {speed}")
    if summary["failures"]:
        print(f"{len(summary['failures'])} map(s) failed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradband", description="Gradient-band adversarial examples and retraining for grid path finding.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-maps", help="generate a seeded map corpus with a manifest")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--density", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_gen_maps)

    p = sub.add_parser("run-experiment", help="train, attack and immunize every map of a corpus")
    p.add_argument("--maps", required=True, help="corpus directory or its manifest.json")
    p.add_argument("--config", help="INI file; see print-config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run_experiment)

    p = sub.add_parser("aggregate", help="recompute the summary from stored per-map records")
    p.add_argument("--out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("plot", help="render the figures for one run record")
    p.add_argument("--run-record", required=True)
    p.add_argument("--summary", help="corpus summary.json for the precision curve")
    p.add_argument("--out")
    p.add_argument("--format", default="svg", choices=("svg", "pdf", "png"))
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("print-config", help="print the default configuration")
    p.set_defaults(func=cmd_print_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    from .experiment import DataError

    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gradband: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DataError, MapError, RecordSchemaError, OSError, json.JSONDecodeError) as exc:
        print(f"gradband: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        log.exception("experiment failed")
        print(f"gradband: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
