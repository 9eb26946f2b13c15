"""Command-line entry points.

``grampa run --config exp.json --out results/`` executes a declared sweep
and writes results.csv plus summary.json (phantom runs also emit PGM
reconstructions).  ``grampa ptc --config exp.json --out results/`` bisects
the 50%-success phase-transition curve and writes ptc_curve.csv.  Exit code
0 means the sweep completed (individual trial divergences are recorded, not
fatal); config or I/O problems exit nonzero.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .fileio import write_pgm
from .problems import shepp_logan


def _add_common(parser):
    parser.add_argument("--config", required=True, help="experiment JSON document")
    parser.add_argument("--out", required=True, help="output directory (created if absent)")
    parser.add_argument("--workers", type=int, default=1, help="parallel trial processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grampa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a declared experiment sweep")
    _add_common(run_p)
    run_p.add_argument("--trials", type=int, default=None, help="override trial count")
    run_p.add_argument("--seed", type=int, default=None, help="override base seed")

    ptc_p = sub.add_parser("ptc", help="estimate the 50%%-success phase-transition curve")
    _add_common(ptc_p)
    return parser


def _emit_phantom_images(out: Path, spec, results) -> None:
    n = spec.size
    write_pgm(out / "phantom.pgm", shepp_logan(n).reshape(n, n))
    by_lines: dict[int, list] = {}
    for r in results:
        by_lines.setdefault(int(r.sweep["lines"]), []).append(r)
    for lines, rs in sorted(by_lines.items()):
        chosen = sorted(rs, key=lambda r: r.nsnr)[len(rs) // 2]
        if chosen.x_hat is not None:
            write_pgm(out / f"recon_lines{lines:03d}.pgm", np.clip(chosen.x_hat, 0, 1).reshape(n, n))


def cmd_run(args) -> int:
    spec = harness.load_spec(args.config)
    spec = harness.with_overrides(spec, trials=args.trials, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = harness.run_experiment(spec, workers=args.workers, keep_estimates=True)
    harness.write_results_csv(out / "results.csv", results)
    harness.write_summary_json(out / "summary.json", harness.summarize(spec, results))
    if spec.kind == "phantom":
        _emit_phantom_images(out, spec, results)
    return 0


def cmd_ptc(args) -> int:
    spec = harness.load_spec(args.config)
    if spec.kind != "ptc":
        raise harness.ConfigError("the ptc command needs a kind='ptc' config")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = harness.estimate_ptc(spec, workers=args.workers)
    harness.write_ptc_csv(out / "ptc_curve.csv", rows)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_ptc(args)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
