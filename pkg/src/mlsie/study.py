"""Refinement studies: errors, observed rates and stability measurements per level."""

from __future__ import annotations

import contextlib
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidArgument, MlsieError
from .fredholm import FredholmProblem, PointFunction, condition_estimate, operator_norm_FN, solve_collocation
from .geometry import DomainBox, generate_nodes
from .linalg import inf_norm_inverse
from .mls import build_model
from .quadrature import box_rule

CSV_COLUMNS = (
    "level",
    "N",
    "h",
    "delta",
    "quad_points",
    "err_uN_inf",
    "err_vN_inf",
    "rate_uN",
    "rate_vN",
    "phi_inv_norm",
    "c1",
    "fn_norm",
    "assemble_ms",
    "solve_ms",
)
DIAGNOSE_COLUMNS = ("level", "N", "h", "q", "cqu", "delta", "phi_inv_norm", "c1", "fn_norm", "condition")


@dataclass
class StudyConfig:
    box: DomainBox
    m: int
    levels: list[int]
    lam: float = 1.0
    kernel: str | None = None
    rhs: str | None = None
    exact: str | None = None
    node_kind: str = "uniform-grid"
    quad_kind: str = "gl"
    quad_n: int = 8
    # "level": one panel per trial-grid spacing, so the rule refines with the nodes
    quad_panels: int | str = "level"
    sigma: float | None = None
    weight: str = "wendland-c2"
    seed: int = 0
    oversample: float = 1.0
    eval_per_axis: int | None = None
    timing: bool = False

    def __post_init__(self):
        if self.m < 0:
            raise InvalidArgument("m must be >= 0")
        if not self.levels or any(n < 1 for n in self.levels):
            raise InvalidArgument("levels must be a nonempty list of positive node counts per axis")
        if self.oversample < 1.0:
            raise InvalidArgument("oversampling ratio must be >= 1")
        if self.quad_panels != "level" and not (isinstance(self.quad_panels, int) and self.quad_panels >= 1):
            raise InvalidArgument("quad_panels must be 'level' or a positive integer")

    @property
    def dim(self) -> int:
        return self.box.dim

    def panels_for(self, n_per_axis: int) -> int:
        return max(1, n_per_axis - 1) if self.quad_panels == "level" else int(self.quad_panels)

    def eval_grid(self) -> np.ndarray:
        n = self.eval_per_axis or (1001 if self.dim == 1 else 101)
        return self.box.grid(n)


@dataclass
class LevelResult:
    level: int
    N: int
    h: float
    delta: float
    quad_points: int | None = None
    err_uN_inf: float | None = None
    err_vN_inf: float | None = None
    rate_uN: float | None = None
    rate_vN: float | None = None
    phi_inv_norm: float | None = None
    c1: float | None = None
    fn_norm: float | None = None
    assemble_ms: float | None = None
    solve_ms: float | None = None


@dataclass
class ConvergenceReport:
    rows: list[LevelResult] = field(default_factory=list)
    failure: dict | None = None
    solutions: list = field(default_factory=list, repr=False)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


def observed_rate(e_prev, e_cur, h_prev, h_cur) -> float | None:
    """``log(e_prev / e_cur) / log(h_prev / h_cur)``; None when undefined."""
    if None in (e_prev, e_cur) or e_prev <= 0 or e_cur <= 0 or h_prev == h_cur:
        return None
    return math.log(e_prev / e_cur) / math.log(h_prev / h_cur)


def _fill_rates(rows: list[LevelResult]) -> None:
    for prev, cur in zip(rows, rows[1:]):
        cur.rate_uN = observed_rate(prev.err_uN_inf, cur.err_uN_inf, prev.h, cur.h)
        cur.rate_vN = observed_rate(prev.err_vN_inf, cur.err_vN_inf, prev.h, cur.h)


def _test_points(cfg: StudyConfig, X, n: int):
    if cfg.oversample == 1.0:
        return X
    ny = int(round((n - 1) * cfg.oversample ** (1.0 / cfg.dim))) + 1
    return generate_nodes(cfg.node_kind, ny, cfg.box, cfg.seed + 1)


def _solve_level(cfg: StudyConfig, problem: FredholmProblem, n: int):
    X = generate_nodes(cfg.node_kind, n, cfg.box, cfg.seed)
    model = build_model(X, cfg.m, cfg.weight, cfg.sigma)
    rule = box_rule(cfg.quad_kind, cfg.quad_n, cfg.box, cfg.panels_for(n))
    return solve_collocation(problem, model, _test_points(cfg, X, n), rule)


def convergence_study(problem: FredholmProblem, cfg: StudyConfig) -> ConvergenceReport:
    """Solve at every level and measure sup-norm errors on a dense grid.

    Without an exact solution the errors are taken against a solve on a grid
    twice as fine as the last level. A failing level stops the study; the
    rows computed so far are kept and ``report.failure`` describes the error.
    """
    grid = cfg.eval_grid()
    report = ConvergenceReport()
    if problem.exact is not None:
        ref_u = ref_v = problem.exact(grid)
    else:
        n_ref = 2 * (cfg.levels[-1] - 1) + 1
        try:
            ref = _solve_level(cfg, problem, n_ref)
            ref_u, ref_v = ref.uN(grid), ref.vN(grid)
        except MlsieError as exc:
            report.failure = {"level": "reference", "n_per_axis": n_ref, "error": f"{type(exc).__name__}: {exc}"}
            return report
    for level, n in enumerate(cfg.levels, start=1):
        try:
            sol = _solve_level(cfg, problem, n)
            shape_grid = sol.model.shape_matrix(grid)
            u_grid = shape_grid @ sol.coeffs
            v_grid = sol.vN(grid)
            row = LevelResult(
                level=level,
                N=sol.model.N,
                h=sol.model.X.fill,
                delta=sol.model.delta,
                quad_points=len(sol.rule),
                err_uN_inf=float(np.abs(u_grid - ref_u).max()),
                err_vN_inf=float(np.abs(v_grid - ref_v).max()),
                phi_inv_norm=inf_norm_inverse(sol.phi_y) if len(sol.Y) == sol.model.N else None,
                c1=float(np.abs(shape_grid).sum(axis=1).max()),
                fn_norm=operator_norm_FN(problem, sol.rule, grid),
            )
            if cfg.timing:
                row.assemble_ms = sol.timings["assemble_ms"]
                row.solve_ms = sol.timings["solve_ms"]
        except MlsieError as exc:
            report.failure = {"level": level, "n_per_axis": n, "error": f"{type(exc).__name__}: {exc}"}
            break
        report.rows.append(row)
        report.solutions.append(sol)
    _fill_rates(report.rows)
    return report


def approximation_study(exact: Callable, cfg: StudyConfig) -> ConvergenceReport:
    """Pure MLS approximation ``s_{u,X}`` of ``exact`` at every level; no integral operator."""
    grid = cfg.eval_grid()
    truth = exact(grid)
    report = ConvergenceReport()
    for level, n in enumerate(cfg.levels, start=1):
        try:
            X = generate_nodes(cfg.node_kind, n, cfg.box, cfg.seed)
            t0 = time.perf_counter()
            model = build_model(X, cfg.m, cfg.weight, cfg.sigma)
            shape_grid = model.shape_matrix(grid)
            t1 = time.perf_counter()
            approx = shape_grid @ exact(X.points)
            t2 = time.perf_counter()
            row = LevelResult(
                level=level,
                N=model.N,
                h=X.fill,
                delta=model.delta,
                err_uN_inf=float(np.abs(approx - truth).max()),
                phi_inv_norm=inf_norm_inverse(model.shape_matrix(X.points)),
                c1=float(np.abs(shape_grid).sum(axis=1).max()),
            )
            if cfg.timing:
                row.assemble_ms = 1e3 * (t1 - t0)
                row.solve_ms = 1e3 * (t2 - t1)
        except MlsieError as exc:
            report.failure = {"level": level, "n_per_axis": n, "error": f"{type(exc).__name__}: {exc}"}
            break
        report.rows.append(row)
    _fill_rates(report.rows)
    return report


def diagnostics_study(problem: FredholmProblem | None, cfg: StudyConfig) -> list[dict]:
    """Geometry and stability measurements per level, without error norms."""
    grid = cfg.eval_grid()
    records = []
    for level, n in enumerate(cfg.levels, start=1):
        X = generate_nodes(cfg.node_kind, n, cfg.box, cfg.seed)
        model = build_model(X, cfg.m, cfg.weight, cfg.sigma)
        rec = {
            "level": level,
            "N": model.N,
            "h": X.fill,
            "q": X.sep if len(X) > 1 else None,
            "cqu": X.cqu if len(X) > 1 else None,
            "delta": model.delta,
            "phi_inv_norm": inf_norm_inverse(model.shape_matrix(X.points)),
            "c1": model.stability_constant(grid),
            "fn_norm": None,
            "condition": None,
        }
        if problem is not None:
            sol = _solve_level(cfg, problem, n)
            rec["fn_norm"] = operator_norm_FN(problem, sol.rule, grid)
            rec["condition"] = condition_estimate(sol.matrix)
        records.append(rec)
    return records


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _json_value(v):
    if v is None:
        return None
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


@contextlib.contextmanager
def _output(path):
    if str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_records(records: list[dict], columns, path, fmt: str = "csv", failure: dict | None = None) -> None:
    if fmt not in ("csv", "jsonl"):
        raise InvalidArgument(f"unknown output format {fmt!r}")
    with _output(path) as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for rec in records:
                writer.writerow([format_value(rec[c]) for c in columns])
            if failure is not None:
                fh.write("# failure: " + json.dumps(failure, sort_keys=True) + "\n")
        else:
            for rec in records:
                fh.write(json.dumps({c: _json_value(rec[c]) for c in columns}) + "\n")
            if failure is not None:
                fh.write(json.dumps({"failure": failure}, sort_keys=True) + "\n")


def emit_report(report: ConvergenceReport, path, fmt: str = "csv") -> None:
    """Write the report as CSV (fixed header, 17 significant digits) or JSON lines."""
    if not report.rows and report.failure is None:
        raise InvalidArgument("empty report")
    write_records([asdict(r) for r in report.rows], CSV_COLUMNS, path, fmt, report.failure)


def read_report_csv(path) -> list[dict]:
    """Parse a CSV written by :func:`emit_report`; empty cells become None."""
    out = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    for rec in reader:
        row = {}
        for key, text in rec.items():
            if text == "":
                row[key] = None
            elif key in ("level", "N", "quad_points"):
                row[key] = int(text)
            else:
                row[key] = float(text)
        out.append(row)
    return out


def exact_function(source: str, dim: int) -> PointFunction:
    return PointFunction(source, dim, "exact solution")
