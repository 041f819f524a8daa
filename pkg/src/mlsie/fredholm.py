"""Discrete MLS collocation for ``lam*u(x) + int_box k(x,s) u(s) ds = f(x)``."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr
from .errors import (
    ExprEvalError,
    InvalidArgument,
    ProjectionUndefinedError,
    RankDeficientError,
    SingularMatrixError,
    SolvabilityError,
)
from .geometry import DomainBox, PointSet
from .linalg import inf_norm, inf_norm_inverse, lu_solve, qr_lstsq
from .mls import MlsModel
from .quadrature import QuadratureRule, box_rule, integrate

REFERENCE_GL_ORDER = 64
RESIDUAL_RTOL = 1e-9
_BLOCK_ENTRIES = 4_000_000


def _row_blocks(n_rows: int, n_cols: int):
    """Row slices keeping ``rows * n_cols`` below a fixed memory budget."""
    step = max(1, _BLOCK_ENTRIES // max(1, n_cols))
    for lo in range(0, n_rows, step):
        yield slice(lo, lo + step)


def _as_points(x, dim: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim < 2:
        pts = pts.reshape(-1, dim)
    return pts


def _bind(points: np.ndarray, prefix: str, as_column: bool) -> dict:
    d = points.shape[1]
    cols = [points[:, a] for a in range(d)]
    if as_column is not None:
        cols = [c[:, None] if as_column else c[None, :] for c in cols]
    if d == 1:
        return {prefix: cols[0]}
    return {f"{prefix}{a + 1}": cols[a] for a in range(d)}


class PointFunction:
    """A function of ``x`` given by an expression; called on ``(n, d)`` arrays."""

    def __init__(self, source: str, dim: int, role: str = "function"):
        self.source = source
        self.dim = dim
        self.role = role
        self.ast = expr.parse(source, dim, expr.variables_for(dim, "x"))

    def __call__(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        try:
            vals = expr.evaluate(self.ast, _bind(pts, "x", None))
        except ExprEvalError as exc:
            bad = _first_failing(lambda p: expr.evaluate(self.ast, _bind(p, "x", None)), pts)
            raise type(exc)(f"{self.role} {self.source!r} at x={bad}: {exc}") from exc
        return np.broadcast_to(np.asarray(vals, dtype=float), (pts.shape[0],)).copy()


class KernelFunction:
    """A kernel ``k(x, s)`` given by an expression; returns the ``(n_x, n_s)`` matrix."""

    def __init__(self, source: str, dim: int):
        self.source = source
        self.dim = dim
        self.ast = expr.parse(source, dim)

    def __call__(self, x, s) -> np.ndarray:
        xp = _as_points(x, self.dim)
        sp = _as_points(s, self.dim)
        s_bind = _bind(sp, "s", False)
        try:
            vals = expr.evaluate(self.ast, {**_bind(xp, "x", True), **s_bind})
        except ExprEvalError as exc:
            bad = _first_failing(lambda p: expr.evaluate(self.ast, {**_bind(p, "x", True), **s_bind}), xp)
            raise type(exc)(f"kernel {self.source!r} at x={bad}: {exc}") from exc
        return np.broadcast_to(np.asarray(vals, dtype=float), (xp.shape[0], sp.shape[0])).copy()


def _first_failing(fn, pts):
    for p in pts:
        try:
            fn(p[None, :])
        except ExprEvalError:
            return [float(v) for v in p]
    return None


class ManufacturedRhs:
    """``f = lam*u + int k(., s) u(s) ds`` with a fixed high-order reference rule."""

    def __init__(self, lam: float, kernel, exact, box: DomainBox, order: int = REFERENCE_GL_ORDER):
        self.lam = lam
        self.kernel = kernel
        self.exact = exact
        self.order = order
        self.rule = box_rule("gl", order, box)
        self._u_ref = exact(self.rule.nodes) * self.rule.weights

    def __call__(self, x) -> np.ndarray:
        pts = _as_points(x, self.rule.dim)
        out = np.empty(pts.shape[0])
        for rows in _row_blocks(pts.shape[0], len(self.rule)):
            chunk = pts[rows]
            out[rows] = self.lam * self.exact(chunk) + self.kernel(chunk, self.rule.nodes) @ self._u_ref
        return out


@dataclass(frozen=True, eq=False)
class FredholmProblem:
    lam: float
    kernel: Callable
    rhs: Callable
    box: DomainBox
    exact: Callable | None = None
    label: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lam == 0:
            raise InvalidArgument("lambda must be nonzero for a second-kind equation")

    @property
    def dim(self) -> int:
        return self.box.dim

    @classmethod
    def from_expressions(
        cls,
        lam: float,
        kernel: str,
        box: DomainBox,
        rhs: str | None = None,
        exact: str | None = None,
        reference_order: int = REFERENCE_GL_ORDER,
    ) -> "FredholmProblem":
        """Build from expression strings; without ``rhs`` the right-hand side is manufactured from ``exact``."""
        d = box.dim
        k = KernelFunction(kernel, d)
        u = PointFunction(exact, d, "exact solution") if exact else None
        if rhs:
            f = PointFunction(rhs, d, "right-hand side")
        elif u is not None:
            f = ManufacturedRhs(float(lam), k, u, box, reference_order)
        else:
            raise InvalidArgument("need a right-hand side or an exact solution")
        label = {"lambda": lam, "kernel": kernel, "rhs": rhs, "exact": exact}
        return cls(lam=float(lam), kernel=k, rhs=f, box=box, exact=u, label=label)


def assemble(problem: FredholmProblem, model: MlsModel, Y: PointSet, rule: QuadratureRule):
    """Collocation matrix ``B`` (``M x N``) and right-hand side ``f(Y)``.

    ``B[i, j] = lam*phi_j(y_i) + sum_k k(y_i, tau_k) phi_j(tau_k) w_k``; shape
    values at the quadrature nodes are computed once and shared by all rows.
    """
    B, rhs, _ = _assemble_parts(problem, model, Y, rule)
    return B, rhs


def _assemble_parts(problem, model, Y, rule):
    if len(Y) < model.N:
        raise InvalidArgument(f"need at least as many test points ({len(Y)}) as trial points ({model.N})")
    phi_y = model.shape_matrix(Y.points)
    phi_tau = model.shape_matrix(rule.nodes)
    K = problem.kernel(Y.points, rule.nodes)
    integral = (K * rule.weights) @ phi_tau
    B = problem.lam * phi_y + integral
    # size of the two terms before they combine; pivots are judged against it
    scale = abs(problem.lam) * inf_norm(phi_y) + inf_norm(integral)
    return B, problem.rhs(Y.points), {"phi_y": phi_y, "phi_tau": phi_tau, "scale": scale}


def assemble_reference(problem: FredholmProblem, model: MlsModel, Y: PointSet, rule: QuadratureRule) -> np.ndarray:
    """Entry-by-entry assembly with fresh shape evaluations; slow, for cross-checks."""
    M, N = len(Y), model.N
    B = np.zeros((M, N))
    for i, y in enumerate(Y.points):
        row_shape = model.shape_values(y).dense(N)
        for j in range(N):
            total = 0.0
            for tau, w in zip(rule.nodes, rule.weights):
                phi_j_tau = model.shape_values(tau).dense(N)[j]
                total += float(problem.kernel(y, tau)[0, 0]) * phi_j_tau * w
            B[i, j] = problem.lam * row_shape[j] + total
    return B


@dataclass(eq=False)
class CollocationSolution:
    problem: FredholmProblem
    model: MlsModel
    Y: PointSet
    rule: QuadratureRule
    coeffs: np.ndarray  # approximate nodal values u~_j
    matrix: np.ndarray
    rhs: np.ndarray
    phi_y: np.ndarray
    phi_tau: np.ndarray
    method: str
    residual: float = field(init=False)
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residual = float(np.abs(self.matrix @ self.coeffs - self.rhs).max())
        self.u_tau = self.phi_tau @ self.coeffs

    def eval_uN(self, x) -> float:
        return self.model.approximate(self.coeffs, x)

    def uN(self, points) -> np.ndarray:
        return self.model.approximate_many(self.coeffs, points)

    def vN(self, points) -> np.ndarray:
        """Iterated solution ``(f - F_N u_N) / lam`` at many points."""
        pts = _as_points(points, self.model.X.dim)
        out = np.empty(pts.shape[0])
        weighted = self.u_tau * self.rule.weights
        for rows in _row_blocks(pts.shape[0], len(self.rule)):
            chunk = pts[rows]
            out[rows] = (self.problem.rhs(chunk) - self.problem.kernel(chunk, self.rule.nodes) @ weighted) / self.problem.lam
        return out

    def eval_vN(self, x) -> float:
        return float(self.vN(x)[0])


def solve_collocation(
    problem: FredholmProblem,
    model: MlsModel,
    Y: PointSet | None = None,
    rule: QuadratureRule | None = None,
    method: str = "auto",
) -> CollocationSolution:
    """Assemble and solve the collocation system.

    ``method`` is ``"lu"`` (square systems), ``"qr"`` (least squares, needed
    when there are more test than trial points) or ``"auto"``.
    """
    Y = Y if Y is not None else model.X
    if rule is None:
        raise InvalidArgument("a quadrature rule is required")
    t0 = time.perf_counter()
    B, rhs, parts = _assemble_parts(problem, model, Y, rule)
    t1 = time.perf_counter()
    square = B.shape[0] == B.shape[1]
    if method == "auto":
        method = "lu" if square else "qr"
    if method == "lu" and not square:
        raise InvalidArgument("LU needs a square system; use method='qr' when oversampling")
    try:
        coeffs = lu_solve(B, rhs, scale=parts["scale"]) if method == "lu" else qr_lstsq(B, rhs)
    except (SingularMatrixError, RankDeficientError) as exc:
        cond = float(np.linalg.cond(B))
        raise SolvabilityError(f"collocation system not solvable ({exc}); 2-norm condition ~ {cond:.3e}", cond) from exc
    t2 = time.perf_counter()
    sol = CollocationSolution(problem, model, Y, rule, coeffs, B, rhs, parts["phi_y"], parts["phi_tau"], method)
    sol.timings = {"assemble_ms": 1e3 * (t1 - t0), "solve_ms": 1e3 * (t2 - t1)}
    if square and sol.residual > RESIDUAL_RTOL * max(1.0, float(np.abs(rhs).max())):
        raise SolvabilityError(f"collocation residual {sol.residual:.3e} exceeds tolerance", condition_estimate(B))
    return sol


def eval_uN(sol: CollocationSolution, x) -> float:
    return sol.eval_uN(x)


def eval_vN(sol: CollocationSolution, x) -> float:
    return sol.eval_vN(x)


def apply_FN(problem: FredholmProblem, rule: QuadratureRule, u: Callable, x) -> float:
    """``sum_k k(x, tau_k) u(tau_k) w_k`` at a single point ``x``."""
    xp = _as_points(x, rule.dim)
    return integrate(rule, lambda s: problem.kernel(xp, s)[0] * u(s))


def operator_norm_FN(problem: FredholmProblem, rule: QuadratureRule, probes) -> float:
    """``max_x sum_k |w_k k(x, tau_k)|`` over the probe points."""
    pts = _as_points(probes, rule.dim)
    if pts.shape[0] == 0:
        raise InvalidArgument("need at least one probe point")
    best = 0.0
    for rows in _row_blocks(pts.shape[0], len(rule)):
        K = problem.kernel(pts[rows], rule.nodes)
        best = max(best, float(np.abs(K * rule.weights).sum(axis=1).max()))
    return best


def projection_interpolate(model: MlsModel, Y: PointSet, samples) -> np.ndarray:
    """Coefficients ``c`` of the member of span{phi_j} matching ``samples`` at ``Y``."""
    if len(Y) != model.N:
        raise InvalidArgument("projection needs as many test points as trial points")
    try:
        return lu_solve(model.shape_matrix(Y.points), samples)
    except SingularMatrixError as exc:
        raise ProjectionUndefinedError(f"shape matrix at the test points is singular ({exc})") from exc


def condition_estimate(B) -> float | None:
    """``||B||_inf * ||B^{-1}||_inf`` for square ``B``; None otherwise."""
    B = np.asarray(B)
    if B.shape[0] != B.shape[1]:
        return None
    try:
        return inf_norm(B) * inf_norm_inverse(B)
    except SingularMatrixError:
        return float("inf")


@dataclass
class Diagnostics:
    phi_inv_norm: float | None = None
    c1_measured: float | None = None
    fn_norm: float | None = None
    cqu_measured: float | None = None
    condition: float | None = None


def diagnose(sol: CollocationSolution, probes) -> Diagnostics:
    square = len(sol.Y) == sol.model.N
    return Diagnostics(
        phi_inv_norm=inf_norm_inverse(sol.phi_y) if square else None,
        c1_measured=sol.model.stability_constant(probes),
        fn_norm=operator_norm_FN(sol.problem, sol.rule, probes),
        cqu_measured=sol.model.X.cqu if sol.model.N > 1 else None,
        condition=condition_estimate(sol.matrix),
    )
