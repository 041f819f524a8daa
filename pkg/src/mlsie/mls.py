"""Moving least squares shape functions and the approximation operator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, NoCoverageError, NonUnisolventError, NotPositiveDefiniteError
from .geometry import DomainBox, NeighborIndex, PointSet
from .linalg import cholesky_factor, cholesky_solve
from .polybasis import PolyBasis
from .weights import WeightSpec

RETRY_GROWTH = 1.3
MAX_RETRIES = 3


def default_sigma(m: int) -> float:
    """Support factor delta / h giving roughly 2Q neighbours on quasi-uniform sets."""
    return 2.0 * (m + 1)


@dataclass(frozen=True)
class ShapeEval:
    """Nonzero shape values at one point; ``values[i]`` belongs to node ``indices[i]``."""

    x: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    delta: float

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.indices] = self.values
        return out


@dataclass(frozen=True, eq=False)
class MlsModel:
    X: PointSet
    basis: PolyBasis
    weight: WeightSpec
    sigma: float
    scale: float
    index: NeighborIndex = field(repr=False)
    max_retries: int = MAX_RETRIES
    retry_growth: float = RETRY_GROWTH

    @property
    def delta(self) -> float:
        return self.weight.delta

    @property
    def m(self) -> int:
        return self.basis.degree

    @property
    def N(self) -> int:
        return len(self.X)

    def local_system(self, x, delta: float, raw: bool = False):
        """Neighbour indices, weights and basis rows at ``x`` for support ``delta``.

        ``raw=True`` uses plain monomials instead of the basis shifted to ``x``
        and scaled by ``self.scale``; only meant for conditioning comparisons.
        """
        J = self.index.query(x, delta)
        pts = self.X.points[J]
        w = self.weight(np.linalg.norm(pts - x, axis=1), delta)
        if raw:
            P = self.basis.monomials(pts)
        else:
            P = self.basis.eval_shifted_scaled(pts, x, self.scale)
        return J, w, P

    def gram(self, x, raw: bool = False) -> np.ndarray:
        """The moment matrix ``P W P^T`` at ``x`` (stored as ``Q x Q``)."""
        x = np.asarray(x, dtype=float).reshape(-1)
        _, w, P = self.local_system(x, self.delta, raw=raw)
        return (P * w[:, None]).T @ P

    def shape_values(self, x) -> ShapeEval:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.X.dim:
            raise InvalidArgument(f"point has dimension {x.shape[0]}, expected {self.X.dim}")
        delta = self.delta
        rhs = np.zeros(self.basis.Q)
        rhs[0] = 1.0  # basis centred at x, so p(x) = e_1
        for attempt in range(self.max_retries + 1):
            J, w, P = self.local_system(x, delta)
            if J.size == 0:
                raise NoCoverageError(x, delta)
            A = (P * w[:, None]).T @ P
            try:
                lam = cholesky_solve(A, rhs)
            except NotPositiveDefiniteError:
                if attempt == self.max_retries:
                    raise NonUnisolventError(x, J, delta) from None
                delta *= self.retry_growth
                continue
            return ShapeEval(x=x, indices=J, values=w * (P @ lam), delta=delta)
        raise AssertionError("unreachable")

    def shape_matrix(self, points) -> np.ndarray:
        """Dense matrix with entry ``(i, j) = phi_j(points[i])``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.X.dim and self.X.dim == 1:
            pts = pts.reshape(-1, 1)
        out = np.zeros((pts.shape[0], self.N))
        for i, y in enumerate(pts):
            ev = self.shape_values(y)
            out[i, ev.indices] = ev.values
        return out

    def approximate(self, u, x) -> float:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.N,):
            raise InvalidArgument(f"expected {self.N} nodal values, got shape {u.shape}")
        ev = self.shape_values(x)
        return float(ev.values @ u[ev.indices])

    def approximate_many(self, u, points) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.N,):
            raise InvalidArgument(f"expected {self.N} nodal values, got shape {u.shape}")
        return self.shape_matrix(points) @ u

    def stability_constant(self, probes) -> float:
        """Measured ``max_x sum_j |phi_j(x)|`` over the probe points."""
        return float(np.abs(self.shape_matrix(probes)).sum(axis=1).max())


def build_model(
    X: PointSet,
    m: int,
    weight_kind: str = "wendland-c2",
    sigma: float | None = None,
    box: DomainBox | None = None,
    scale: str | float = "fill",
) -> MlsModel:
    """Assemble an MLS model with support radius ``delta = sigma * h_X``.

    ``scale`` picks the basis scaling: ``"fill"`` (fill distance, default),
    ``"delta"`` (support radius) or an explicit positive number.
    """
    if m < 0:
        raise InvalidArgument("degree m must be >= 0")
    sigma = default_sigma(m) if sigma is None else float(sigma)
    if not sigma > 0:
        raise InvalidArgument("support factor sigma must be positive")
    if box is not None and box != X.box:
        X = PointSet(X.points, box, kind=X.kind, n_per_axis=X.n_per_axis)
    h = X.fill
    delta = sigma * h
    if not delta > 0:
        raise InvalidArgument(f"computed support radius {delta} is not positive")
    if scale == "fill":
        s = h
    elif scale == "delta":
        s = delta
    else:
        s = float(scale)
        if not s > 0:
            raise InvalidArgument("basis scale must be positive")
    return MlsModel(
        X=X,
        basis=PolyBasis(X.dim, m),
        weight=WeightSpec(weight_kind, delta),
        sigma=sigma,
        scale=s,
        index=NeighborIndex(X.points, delta),
    )


def cholesky_diag_ratio(A) -> float:
    """Ratio of the largest to smallest diagonal entry of the Cholesky factor."""
    d = np.diag(cholesky_factor(A, rtol=0.0))
    return float(d.max() / d.min())
