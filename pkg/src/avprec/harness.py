"""Experiment driver: problem generation, solver runs and table data as CSV.

Every CSV starts with the comment line ``# schema=avprec-v1`` followed by a
header row. Bodies depend only on the configuration, so reruns are
byte-identical; wall times go to separate ``*_meta.csv`` files.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import avmg, grid, krylov, operators, rng
from .config import ExperimentConfig
from .errors import DenseGuardError
from .grid import GridHierarchy, GridLevel
from .spectral import SpectralReport, cluster_stats, corollary_violations, preconditioned_spectrum

SCHEMA = "avprec-v1"
RUN_COLUMNS = ("solver", "dim", "fine_exponent", "c2", "delta", "m_l", "restart", "side", "tol", "maxit",
               "seed", "early_coarse", "metric", "n", "n0", "iterations", "converged", "final_metric", "branches")
HISTORY_COLUMNS = ("iter", "metric")
SIZE_COLUMNS = ("c2", "delta", "n")
MESH_COLUMNS = ("c2", "delta", "fine_exponent", "n", "iterations", "converged")
EARLY_COLUMNS = ("c2", "method", "restart", "side", "iterations", "converged")
SPECTRUM_COLUMNS = ("j", "lambda", "mu")
SPECTRUM_SUMMARY_COLUMNS = ("solver", "c2", "delta", "n", "p", "delta0", "delta1", "ratio",
                            "bound_violations", "attained_upper", "attained_lower", "corollary_violations",
                            "cluster_fraction")

DEFAULT_SPECTRUM_GUARD = 3969

REFERENCE_SIZE_C2 = (300.0, 400.0, 1500.0, 3000.0, 4000.0)
REFERENCE_SIZE_DELTAS = (1.0 / 3.0, 0.5, 0.75, 1.0)
REFERENCE_MESH_EXPONENTS = (6, 7, 8, 9, 10, 11)
REFERENCE_EARLY_RESTARTS = (5, 10, 20, 25, 35)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def to_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(columns, rows))
    return path


def read_csv(path) -> list:
    """Rows of a CSV written by :func:`write_csv`, as dicts of strings."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


@dataclass
class Problem:
    hierarchy: GridHierarchy
    A: operators.LinearOperator
    b: np.ndarray
    x_true: np.ndarray
    x0: np.ndarray


def generate_problem(config: ExperimentConfig) -> Problem:
    """Seeded ``x*`` and ``x0`` (uniform on ``[-1, 1)``) and ``b = (L - c2 I) x*``.

    ``x*`` is draws ``0..n-1`` of the splitmix64 stream, ``x0`` draws ``n..2n-1``.
    """
    H = grid.build_hierarchy(config.dim, config.fine_exponent, config.c2)
    n = H.fine.n
    x_true = rng.uniform(config.seed, n)
    x0 = rng.uniform(config.seed, n, offset=n)
    A = operators.shifted_laplacian(H.fine, config.c2)
    return Problem(H, A, A(x_true), x_true, x0)


def ideal_preconditioner(level: GridLevel, c2: float) -> operators.LinearOperator:
    """Exact ``|L - c2 I|^{-1}`` in the sine eigenbasis."""
    t = np.abs(grid.laplacian_eigenvalues(level) - c2)
    return operators.sine_basis_function(level, 1.0 / t, f"|L[{level.n1d}]-{c2:g}I|^-1", True)


def build_preconditioner(config: ExperimentConfig, hierarchy: GridHierarchy):
    """Preconditioner operator for ``config.solver`` and the per-level branch labels."""
    s = config.solver
    if s == "minres-avmg":
        P = avmg.AVMGPreconditioner(hierarchy, avmg.AVMGConfig(delta=config.delta, m=config.m_l))
        return P.as_operator(), P.branch_choices
    if s == "minres-laplace":
        return operators.poisson_inverse(hierarchy.fine), []
    if s == "minres-ideal":
        return ideal_preconditioner(hierarchy.fine, config.c2), []
    P = avmg.IndefiniteMGPreconditioner(hierarchy, early_coarse=config.early_coarse)
    return P.as_operator(), P.branch_choices


def _solve_spec(config: ExperimentConfig) -> krylov.SolveSpec:
    return krylov.SolveSpec(config.tol, config.metric, config.maxit, config.restart, config.side)


@dataclass
class RunRecord:
    config: ExperimentConfig
    n: int
    n0: int
    iterations: int
    converged: bool
    final_metric: float
    history: list = field(repr=False)
    wall_time: float
    branches: list

    def row(self) -> tuple:
        c = self.config
        br = ";".join(f"{n1d}:{kind}" for n1d, kind in self.branches)
        return (c.solver, c.dim, c.fine_exponent, c.c2, c.delta, c.m_l, c.restart, c.side, c.tol, c.maxit,
                c.seed, c.early_coarse, krylov.SolveSpec(metric=c.metric).metric, self.n, self.n0,
                self.iterations, self.converged, self.final_metric, br)


def run(config: ExperimentConfig, out_dir=None) -> RunRecord:
    """Build, precondition and solve one problem; write ``run.csv`` and ``history.csv`` if ``out_dir``."""
    prob = generate_problem(config)
    T, branches = build_preconditioner(config, prob.hierarchy)
    spec = _solve_spec(config)
    t0 = time.perf_counter()
    if config.solver.startswith("minres"):
        out = krylov.pminres(prob.A, T, prob.b, prob.x0, spec, prob.x_true)
    elif config.solver == "gmres-mg":
        out = krylov.gmres_restarted(prob.A, T, prob.b, prob.x0, spec, prob.x_true)
    else:
        out = krylov.bicgstab(prob.A, T, prob.b, prob.x0, spec, prob.x_true)
    wall = time.perf_counter() - t0
    n0 = prob.hierarchy.coarse.n
    if config.solver == "gmres-mg" and config.early_coarse:
        n0 = avmg.early_coarse_hierarchy(prob.hierarchy).coarse.n
    rec = RunRecord(config, prob.hierarchy.fine.n, n0, out.iterations, out.converged, out.final_metric,
                    list(out.history), wall, branches)
    if out_dir is not None:
        out_dir = Path(out_dir)
        write_csv(out_dir / "run.csv", RUN_COLUMNS, [rec.row()])
        write_csv(out_dir / "history.csv", HISTORY_COLUMNS, enumerate(rec.history))
        write_csv(out_dir / "run_meta.csv", ("wall_time",), [(wall,)])
    return rec


def largest_size_with_ch(c2: float, delta: float, dim: int = 2, fine_exponent: int = 8) -> int:
    """Largest problem size on the standard-coarsening ladder from ``h = 2**-fine_exponent`` with ``c*h >= delta``."""
    c = np.sqrt(c2)
    for k in range(fine_exponent, 0, -1):
        lev = GridLevel(dim, 2 ** k - 1)
        if c * lev.h >= delta:
            return lev.n
    raise ValueError(f"no level with c*h >= {delta} for c2={c2}")


def table_sizes(c2_values=REFERENCE_SIZE_C2, deltas=REFERENCE_SIZE_DELTAS, fine_exponent: int = 8, out_dir=None) -> list:
    rows = [(float(c2), float(d), largest_size_with_ch(c2, d, 2, fine_exponent)) for d in deltas for c2 in c2_values]
    if out_dir is not None:
        write_csv(Path(out_dir) / "table_sizes.csv", SIZE_COLUMNS, rows)
    return rows


def _parallel(fn, items, workers: int) -> list:
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(workers) as ex:
        return list(ex.map(fn, items))


def mesh_cells(long_run: bool = False) -> list:
    """``(c2, delta, fine_exponent)`` cells run by default, or all reference cells with ``long_run``."""
    deltas = (1.0 / 3.0, 0.75)
    if long_run:
        return [(c2, d, k) for c2 in (300.0, 400.0, 1500.0, 3000.0) for d in deltas for k in REFERENCE_MESH_EXPONENTS]
    cells = [(c2, d, k) for c2 in (300.0, 400.0) for d in deltas for k in (6, 7, 8, 9)]
    cells += [(c2, d, k) for c2 in (1500.0, 3000.0) for d in deltas for k in (7, 8)]
    return cells


def table_mesh_independence(cells=None, base: ExperimentConfig = ExperimentConfig(), workers: int = 1,
                            out_dir=None) -> list:
    """MINRES-AV-MG iteration counts for each ``(c2, delta, fine_exponent)`` cell."""
    cells = mesh_cells() if cells is None else cells

    def one(cell):
        c2, d, k = cell
        rec = run(base.replace(solver="minres-avmg", c2=float(c2), delta=float(d), fine_exponent=int(k)))
        return (float(c2), float(d), int(k), rec.n, rec.iterations, rec.converged), rec.wall_time

    results = _parallel(one, list(cells), workers)
    rows = [r for r, _ in results]
    if out_dir is not None:
        write_csv(Path(out_dir) / "table_mesh.csv", MESH_COLUMNS, rows)
        write_csv(Path(out_dir) / "table_mesh_meta.csv", ("c2", "delta", "fine_exponent", "wall_time"),
                  [r[:3] + (t,) for r, t in results])
    return rows


def table_early_coarse(c2_values=(1500.0, 3000.0, 4000.0), restarts=REFERENCE_EARLY_RESTARTS,
                       sides=("left", "right"), base: ExperimentConfig = ExperimentConfig(), workers: int = 1,
                       out_dir=None) -> list:
    """MINRES-AV-MG versus early-coarse GMRES(k)-MG at ``h = 2**-base.fine_exponent``."""
    jobs = []
    for c2 in c2_values:
        jobs.append(("MINR", base.replace(solver="minres-avmg", c2=float(c2))))
        for k in restarts:
            for side in sides:
                jobs.append(("GMR", base.replace(solver="gmres-mg", c2=float(c2), restart=int(k), side=side,
                                                 early_coarse=True)))

    def one(job):
        label, cfg = job
        rec = run(cfg)
        restart = cfg.restart if label == "GMR" else ""
        side = cfg.side if label == "GMR" else ""
        return (cfg.c2, label, restart, side, rec.iterations, rec.converged), rec.wall_time

    results = _parallel(one, jobs, workers)
    rows = [r for r, _ in results]
    if out_dir is not None:
        write_csv(Path(out_dir) / "table_early_coarse.csv", EARLY_COLUMNS, rows)
        write_csv(Path(out_dir) / "table_early_coarse_meta.csv", EARLY_COLUMNS[:4] + ("wall_time",),
                  [r[:4] + (t,) for r, t in results])
    return rows


def time_ratios(config: ExperimentConfig, others=("bicgstab-mg", "gmres-mg")) -> dict:
    """Wall-time ratios ``t_other / t_AV`` against MINRES-AV-MG; informational only."""
    t_av = run(config.replace(solver="minres-avmg")).wall_time
    out = {}
    for s in others:
        rec = run(config.replace(solver=s))
        out[s] = (rec.wall_time / t_av) if rec.converged else float("nan")
    return out


def spectrum_report(config: ExperimentConfig, guard: int = DEFAULT_SPECTRUM_GUARD, force_large: bool = False,
                    out_dir=None, radius: float = 0.25):
    """Spectra of ``TA`` and ``T|A|`` for the preconditioner of ``config.solver`` (MINRES solvers only)."""
    if not config.solver.startswith("minres"):
        raise ValueError("spectrum_report needs an SPD preconditioner (a minres-* solver)")
    H = grid.build_hierarchy(config.dim, config.fine_exponent, config.c2)
    n = H.fine.n
    if n > guard and not force_large:
        raise DenseGuardError(f"spectrum of n={n} exceeds the guard {guard}; pass --force-large to override")
    T, _ = build_preconditioner(config, H)
    A = operators.shifted_laplacian(H.fine, config.c2)
    rep = preconditioned_spectrum(T, A, guard=max(guard, n), method="lapack")
    stats = cluster_stats(rep, radius=radius)
    summary = (config.solver, config.c2, config.delta, rep.n, rep.p, rep.delta0, rep.delta1, rep.ratio,
               rep.bound_violations, rep.attained_upper, rep.attained_lower, corollary_violations(rep),
               stats["fraction_total"])
    if out_dir is not None:
        out_dir = Path(out_dir)
        write_csv(out_dir / "spectrum.csv", SPECTRUM_COLUMNS,
                  ((j + 1, float(rep.lam[j]), float(rep.mu[j])) for j in range(rep.n)))
        write_csv(out_dir / "spectrum_summary.csv", SPECTRUM_SUMMARY_COLUMNS, [summary])
    return rep, dict(zip(SPECTRUM_SUMMARY_COLUMNS, summary))
