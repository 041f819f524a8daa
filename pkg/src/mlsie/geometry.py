"""Domain boxes, scattered node sets and fixed-radius neighbor search."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidArgument

NODE_KINDS = ("uniform-grid", "halton", "perturbed-grid")
HALTON_BASES = (2, 3)


@dataclass(frozen=True)
class DomainBox:
    """Axis-aligned box ``[lower_1, upper_1] x ... x [lower_d, upper_d]``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) != len(upper):
            raise InvalidArgument("lower and upper bounds differ in dimension")
        if len(lower) not in (1, 2):
            raise InvalidArgument(f"only d in {{1, 2}} is supported, got d={len(lower)}")
        if any(not (a < b) for a, b in zip(lower, upper)):
            raise InvalidArgument(f"degenerate box: lower={lower}, upper={upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unit(cls, dim: int = 1) -> "DomainBox":
        return cls((0.0,) * dim, (1.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        pts = np.atleast_2d(points)
        lo = np.asarray(self.lower) - tol
        hi = np.asarray(self.upper) + tol
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def grid(self, n_per_axis: int) -> np.ndarray:
        """Tensor grid with ``n_per_axis`` equispaced values per axis, endpoints included."""
        if n_per_axis < 1:
            raise InvalidArgument("n_per_axis must be >= 1")
        axes = []
        for a, b in zip(self.lower, self.upper):
            axes.append(np.array([(a + b) / 2]) if n_per_axis == 1 else np.linspace(a, b, n_per_axis))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class PointSet:
    """Ordered scattered nodes inside a box.

    Indices are 0-based; ``points[j]`` is the node called x_{j+1} in the
    usual 1-based notation.
    """

    points: np.ndarray
    box: DomainBox
    kind: str = "scattered"
    n_per_axis: int | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if self.box.dim == 1 else pts.reshape(1, -1)
        if pts.shape[0] < 1:
            raise InvalidArgument("point set must contain at least one point")
        if pts.shape[1] != self.box.dim:
            raise InvalidArgument(f"points have dimension {pts.shape[1]}, box has {self.box.dim}")
        if not np.all(self.box.contains(pts)):
            raise InvalidArgument("all points must lie inside the domain box")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def default_probe_per_axis(self) -> int:
        # 10x refinement of the equivalent grid; 10*(n-1)+1 hits every midpoint of a uniform grid.
        n = self.n_per_axis or max(1, round(len(self) ** (1.0 / self.dim)))
        return max(11, 10 * (n - 1) + 1)

    @cached_property
    def fill(self) -> float:
        return fill_distance(self, self.box, self.default_probe_per_axis())

    @cached_property
    def sep(self) -> float:
        return separation_distance(self)

    @property
    def cqu(self) -> float:
        """Measured quasi-uniformity ratio h / q."""
        return self.fill / self.sep


def _radical_inverse(i: int, base: int) -> float:
    inv, f = 0.0, 1.0 / base
    while i > 0:
        i, digit = divmod(i, base)
        inv += digit * f
        f /= base
    return inv


def generate_nodes(kind: str, n_per_axis: int, box: DomainBox, seed: int = 0) -> PointSet:
    """Build ``n_per_axis**d`` nodes of the requested kind inside ``box``.

    ``perturbed-grid`` moves every coordinate that is not on the box boundary
    by a uniform offset in ``[-0.25, 0.25]`` grid spacings; ``seed`` is only
    used by that kind.
    """
    if n_per_axis < 1:
        raise InvalidArgument("n_per_axis must be >= 1")
    d = box.dim
    lo = np.asarray(box.lower)
    hi = np.asarray(box.upper)
    if kind == "uniform-grid":
        pts = box.grid(n_per_axis)
    elif kind == "halton":
        count = n_per_axis**d
        unit = np.array(
            [[_radical_inverse(i, HALTON_BASES[a]) for a in range(d)] for i in range(1, count + 1)]
        )
        pts = lo + unit * (hi - lo)
    elif kind == "perturbed-grid":
        pts = box.grid(n_per_axis)
        if n_per_axis > 1:
            spacing = (hi - lo) / (n_per_axis - 1)
            rng = np.random.default_rng(seed)
            offsets = rng.uniform(-0.25, 0.25, size=pts.shape) * spacing
            interior = (pts > lo) & (pts < hi)
            pts = pts + np.where(interior, offsets, 0.0)
    else:
        raise InvalidArgument(f"unknown node kind {kind!r}; expected one of {NODE_KINDS}")
    return PointSet(pts, box, kind=kind, n_per_axis=n_per_axis)


def fill_distance(X: PointSet, box: DomainBox | None = None, probe_per_axis: int | None = None) -> float:
    """Largest distance from a probe-grid point to its nearest node.

    This under-estimates the true supremum over the box by at most half the
    probe diagonal.
    """
    if len(X) == 0:
        raise InvalidArgument("empty point set")
    box = box or X.box
    probe_per_axis = probe_per_axis or X.default_probe_per_axis()
    if probe_per_axis < 2:
        raise InvalidArgument("probe_per_axis must be >= 2")
    probes = box.grid(probe_per_axis)
    dist, _ = cKDTree(X.points).query(probes, k=1)
    return float(dist.max())


def separation_distance(X: PointSet) -> float:
    """Half the smallest pairwise distance between nodes (exact)."""
    if len(X) < 2:
        raise InvalidArgument("separation distance needs at least two points")
    dist, _ = cKDTree(X.points).query(X.points, k=2)
    return 0.5 * float(dist[:, 1].min())


class NeighborIndex:
    """Uniform bucket grid for closed-ball radius queries.

    Buckets have side ``cell``; a query with radius ``r`` scans the
    ``ceil(r / cell)`` ring of buckets around the query cell, so radii other
    than the build radius remain exact.
    """

    def __init__(self, points, cell: float):
        if not cell > 0:
            raise InvalidArgument("cell size must be positive")
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.cell = float(cell)
        self.origin = self.points.min(axis=0)
        keys = np.floor((self.points - self.origin) / self.cell).astype(np.int64)
        buckets: dict[tuple[int, ...], list[int]] = {}
        for j, key in enumerate(map(tuple, keys)):
            buckets.setdefault(key, []).append(j)
        self.buckets = {k: np.array(v, dtype=np.intp) for k, v in buckets.items()}
        self._kmin = keys.min(axis=0)
        self._kmax = keys.max(axis=0)

    def query(self, x, radius: float) -> np.ndarray:
        """Indices ``j`` (ascending) with ``||x - x_j|| <= radius``."""
        if not radius > 0:
            raise InvalidArgument("radius must be positive")
        x = np.asarray(x, dtype=float).reshape(-1)
        center = np.floor((x - self.origin) / self.cell).astype(np.int64)
        # one extra ring absorbs rounding in the bucket keys
        reach = int(math.ceil(radius / self.cell)) + 1
        lo = np.maximum(center - reach, self._kmin)
        hi = np.minimum(center + reach, self._kmax)
        if np.any(lo > hi):
            return np.empty(0, dtype=np.intp)
        found = []
        for key in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
            bucket = self.buckets.get(key)
            if bucket is not None:
                found.append(bucket)
        if not found:
            return np.empty(0, dtype=np.intp)
        cand = np.concatenate(found)
        diff = self.points[cand] - x
        keep = np.sqrt(np.einsum("ij,ij->i", diff, diff)) <= radius
        return np.sort(cand[keep])


def neighbors(idx: NeighborIndex, x, delta: float) -> np.ndarray:
    return idx.query(x, delta)


def brute_force_neighbors(points, x, delta: float) -> np.ndarray:
    pts = np.atleast_2d(points)
    diff = pts - np.asarray(x, dtype=float).reshape(-1)
    return np.flatnonzero(np.sqrt(np.einsum("ij,ij->i", diff, diff)) <= delta)
