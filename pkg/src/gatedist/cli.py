"""``gatedist`` command line.

Exit codes: 0 success, 2 bad input (including I/O errors), 3 convergence
failure after the reseed budget is spent.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiments import (
    ENSEMBLE_COLUMNS,
    SCAN_COLUMNS,
    UBB_COLUMNS,
    UBB_SUMMARY_COLUMNS,
    ExperimentConfig,
    analyze,
    ensemble,
    scan2q,
    to_csv,
    ubb_demo,
)
from .fileio import json_safe, load_gate_source, write_matrix
from .gates import GateFamilySpec
from .linalg import ConvergenceError, DomainError, ShapeError

EXIT_INPUT = 2
EXIT_CONVERGENCE = 3

log = logging.getLogger("gatedist")


def _add_common(p, *names):
    if "d" in names:
        p.add_argument("--d", type=int, help="local dimension")
    if "samples" in names:
        p.add_argument("--samples", type=int, help="number of random gates")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    if "res" in names:
        p.add_argument("--res", type=int, help="grid points per Weyl-chamber axis")
    if "eps" in names:
        p.add_argument("--eps", type=float, help="near-dual perturbation strength")
    p.add_argument("--tol", type=float, help="solver tolerance override")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="solver iteration budget override")
    if "jobs" in names:
        p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--reproducible", action="store_true", default=None,
                   help="omit the timestamp header so reruns are byte-identical")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    if "plot" in names:
        p.add_argument("--plot", action="store_true", default=None,
                       help="also render a PNG next to --out")


def build_parser():
    parser = argparse.ArgumentParser(prog="gatedist", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="report distances, bounds and invariants for one gate")
    p.add_argument("source", help="matrix file, gate-spec file, or inline JSON")
    _add_common(p)

    p = sub.add_parser("gen", help="write the matrix file for a gate spec")
    p.add_argument("source", nargs="?", help="gate-spec file or inline JSON")
    p.add_argument("--family", help="family tag (instead of a spec)")
    p.add_argument("--params", help="JSON object of family parameters")
    _add_common(p, "d")

    p = sub.add_parser("scan2q", help="two-qubit Weyl-chamber scan (e_p, g_t, K_D)")
    _add_common(p, "res", "plot")

    p = sub.add_parser("ensemble", help="K_D vs its lower bound over random families")
    p.add_argument("--families", help="comma-separated subset of diagonal,cue,near_dual,block")
    _add_common(p, "d", "samples", "eps", "jobs", "plot")

    p = sub.add_parser("ubb-demo", help="UBB map on random gates")
    _add_common(p, "d", "samples", "jobs", "plot")
    return parser


def _config(args, experiment, **defaults):
    overrides = {k: getattr(args, k, None) for k in
                 ("d", "samples", "seed", "res", "eps", "tol", "max_iter", "jobs", "out",
                  "reproducible", "plot")}
    if getattr(args, "families", None):
        overrides["families"] = tuple(f.strip() for f in args.families.split(",") if f.strip())
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config:
        cfg = ExperimentConfig.from_json_file(args.config, **{**defaults, **overrides})
        cfg.experiment = experiment
        return cfg
    return ExperimentConfig(experiment=experiment, **{**defaults, **overrides})


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _figure_path(cfg):
    if not cfg.out:
        raise DomainError("--plot needs --out")
    return str(Path(cfg.out).with_suffix(".png"))


def cmd_analyze(args):
    cfg = _config(args, "analyze")
    gate, spec = load_gate_source(args.source)
    kw = {"seed": cfg.seed}
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    if cfg.max_iter is not None:
        kw["max_iter"] = cfg.max_iter
    report = analyze(gate, spec, **kw)
    _emit(json.dumps(json_safe(report), indent=2) + "\n", cfg.out)
    return 0


def cmd_gen(args):
    if args.source:
        src = args.source.strip()
        text = src if src.startswith("{") else Path(src).read_text()
        spec = GateFamilySpec.from_json(text)
    elif args.family:
        params = json.loads(args.params) if args.params else {}
        spec = GateFamilySpec(args.family, args.d or 2, params, args.seed or 0)
    else:
        raise DomainError("gen needs a spec or --family")
    gate = spec.build()
    if args.out:
        write_matrix(args.out, gate.matrix, gate.d)
    else:
        from .fileio import matrix_to_dict

        sys.stdout.write(json.dumps(matrix_to_dict(gate.matrix, gate.d)) + "\n")
    return 0


def cmd_scan2q(args):
    cfg = _config(args, "scan2q", d=2)
    rows = scan2q(cfg.res)
    _emit(to_csv(rows, SCAN_COLUMNS, f"scan2q res={cfg.res}", cfg.reproducible), cfg.out)
    if cfg.plot:
        from .plotting import plot_scan2q

        plot_scan2q(rows, _figure_path(cfg))
    return 0


def cmd_ensemble(args):
    cfg = _config(args, "ensemble")
    rows = ensemble(cfg)
    head = f"ensemble d={cfg.d} samples={cfg.samples} seed={cfg.seed} eps={cfg.eps}"
    _emit(to_csv(rows, ENSEMBLE_COLUMNS, head, cfg.reproducible), cfg.out)
    failed = sum(1 for r in rows if r["error"])
    if failed:
        log.warning("%d of %d ensemble rows failed", failed, len(rows))
    if cfg.plot:
        from .plotting import plot_ensemble

        plot_ensemble(rows, _figure_path(cfg), cfg.d)
    return 0


def cmd_ubb_demo(args):
    cfg = _config(args, "ubb-demo", samples=100)
    steps, summaries = ubb_demo(cfg)
    head = f"ubb-demo d={cfg.d} samples={cfg.samples} seed={cfg.seed}"
    _emit(to_csv(steps, UBB_COLUMNS, head, cfg.reproducible), cfg.out)
    summary_csv = to_csv(summaries, UBB_SUMMARY_COLUMNS, head, cfg.reproducible)
    if cfg.out:
        Path(cfg.out).with_suffix(".summary.csv").write_text(summary_csv)
    else:
        sys.stderr.write(summary_csv)
    if cfg.plot:
        from .plotting import plot_ubb

        plot_ubb(steps, _figure_path(cfg), cfg.d)
    failed = [s["sample"] for s in summaries if not s["converged"]]
    if failed:
        log.error("UBB did not converge for samples %s", failed)
        return EXIT_CONVERGENCE
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "gen": cmd_gen,
    "scan2q": cmd_scan2q,
    "ensemble": cmd_ensemble,
    "ubb-demo": cmd_ubb_demo,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConvergenceError as exc:
        print(f"gatedist: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ShapeError, DomainError, ValueError, KeyError, TypeError) as exc:
        print(f"gatedist: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"gatedist: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
