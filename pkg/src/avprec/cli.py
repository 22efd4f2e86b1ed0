"""Command-line interface: ``avprec <command> [options]``.

Exit codes: 0 success, 1 check or convergence failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import harness
from .config import ConfigError, ExperimentConfig, load_config
from .errors import DenseGuardError, HierarchyError, NotSPDError, SingularShiftError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="flat key = value configuration file")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed for x* and x0")
    p.add_argument("--out", metavar="DIR", help="directory for CSV output (default: config output_path)")
    p.add_argument("--long-run", action="store_true", help="include the finest meshes and all table cells")
    p.add_argument("--force-large", action="store_true", help="lift the dense size guard")
    p.add_argument("--workers", type=int, default=1, help="worker threads for table cells")
    for f in dataclasses.fields(ExperimentConfig):
        if f.name in ("seed", "output_path"):
            continue
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, metavar=f.name.upper(),
                       help=f"override config key {f.name}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avprec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("solve", "run one solver and write run/history CSVs"),
                       ("table-sizes", "largest problem sizes with c*h_l >= delta"),
                       ("table-mesh", "MINRES-AV-MG iteration counts across meshes"),
                       ("table-early-coarse", "MINRES-AV-MG versus early-coarse GMRES(k)-MG"),
                       ("spectrum", "eigenvalues of TA and T|A| with the interval-bound check"),
                       ("selftest", "run the invariant checks")):
        _add_common(sub.add_parser(name, help=text, description=text))
    return parser


def _config(args) -> ExperimentConfig:
    overrides = {f.name: getattr(args, f.name, None) for f in dataclasses.fields(ExperimentConfig)
                 if f.name != "output_path"}
    return load_config(args.config, overrides)


def _run(args) -> int:
    if args.command == "selftest":
        from .selftest import selftest

        return EXIT_OK if selftest() else EXIT_FAIL
    cfg = _config(args)
    out = Path(args.out or cfg.output_path)
    if args.command == "solve":
        rec = harness.run(cfg, out)
        print(f"{cfg.solver}: n={rec.n} n0={rec.n0} iterations={rec.iterations} converged={rec.converged} "
              f"final_metric={rec.final_metric:.3e}")
        return EXIT_OK if rec.converged else EXIT_FAIL
    if args.command == "table-sizes":
        for c2, d, n in harness.table_sizes(fine_exponent=cfg.fine_exponent, out_dir=out):
            print(f"c2={c2:g} delta={d:.4g} n={n}")
        return EXIT_OK
    if args.command == "table-mesh":
        rows = harness.table_mesh_independence(harness.mesh_cells(args.long_run), cfg, args.workers, out)
        for c2, d, k, n, its, conv in rows:
            print(f"c2={c2:g} delta={d:.4g} h=2^-{k} n={n} iterations={its}{'' if conv else ' (not converged)'}")
        return EXIT_OK if all(r[5] for r in rows) else EXIT_FAIL
    if args.command == "table-early-coarse":
        for c2, label, k, side, its, conv in harness.table_early_coarse(base=cfg, workers=args.workers,
                                                                         out_dir=out):
            tag = label if label == "MINR" else f"GMR({k}) {side}"
            print(f"c2={c2:g} {tag}: {its if conv else '-'}")
        return EXIT_OK
    if args.command == "spectrum":
        rep, summary = harness.spectrum_report(cfg, force_large=args.force_large, out_dir=out)
        for k, v in summary.items():
            print(f"{k}={v}")
        return EXIT_OK if rep.bound_violations == 0 else EXIT_FAIL
    raise AssertionError(args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ConfigError, HierarchyError, SingularShiftError, DenseGuardError) as exc:
        print(f"avprec: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotSPDError as exc:
        print(f"avprec: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
