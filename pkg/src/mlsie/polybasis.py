"""Multi-indices and the shifted, scaled monomial basis of P^d_m."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import InvalidArgument


def multi_indices(d: int, m: int) -> list[tuple[int, ...]]:
    """All ``alpha`` in N_0^d with ``|alpha| <= m``, graded lexicographic.

    Within a total degree the first coordinate carries the largest power,
    e.g. ``(2, 2) -> (0,0), (1,0), (0,1), (2,0), (1,1), (0,2)``.
    """
    if d < 1 or m < 0:
        raise InvalidArgument("need d >= 1 and m >= 0")
    out = []
    for total in range(m + 1):
        out.extend(_compositions(total, d))
    return out


def _compositions(total: int, d: int):
    if d == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, d - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class PolyBasis:
    dim: int
    degree: int

    def __post_init__(self):
        if self.dim < 1 or self.degree < 0:
            raise InvalidArgument("need dim >= 1 and degree >= 0")
        alphas = np.array(multi_indices(self.dim, self.degree), dtype=np.int64)
        alphas.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)

    @property
    def indices(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in a) for a in self.alphas]

    @property
    def Q(self) -> int:
        return comb(self.degree + self.dim, self.dim)

    @property
    def orders(self) -> np.ndarray:
        return self.alphas.sum(axis=1)

    def monomials(self, y) -> np.ndarray:
        """Raw monomials ``y^alpha``; rows are points, columns basis functions."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return np.prod(y[:, None, :] ** self.alphas[None, :, :], axis=2)

    def eval_shifted_scaled(self, y, center, h: float) -> np.ndarray:
        """``(y - center)^alpha / h^|alpha|`` for one point (Q-vector) or many (n x Q)."""
        if not h > 0:
            raise InvalidArgument("scale h must be positive")
        y = np.asarray(y, dtype=float)
        single = y.ndim == 1
        z = (np.atleast_2d(y) - np.asarray(center, dtype=float).reshape(1, -1)) / h
        vals = self.monomials(z)
        return vals[0] if single else vals


def eval_shifted_scaled(basis: PolyBasis, y, center, h: float) -> np.ndarray:
    return basis.eval_shifted_scaled(y, center, h)
