"""Compactly supported radial weight profiles phi(r), r = ||x - x_j|| / delta."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

WEIGHT_KINDS = ("wendland-c2", "quartic", "bump")


def _wendland_c2(r):
    return (1.0 - r) ** 4 * (4.0 * r + 1.0)


def _quartic(r):
    return 1.0 - 6.0 * r**2 + 8.0 * r**3 - 3.0 * r**4


def _bump(r):
    with np.errstate(divide="ignore", over="ignore"):
        return np.exp(1.0 - 1.0 / (1.0 - r * r))


_PROFILES = {"wendland-c2": _wendland_c2, "quartic": _quartic, "bump": _bump}


def weight_value(kind: str, r):
    """Profile value at scaled radius ``r``; exactly zero for ``r >= 1``."""
    try:
        profile = _PROFILES[kind]
    except KeyError:
        raise InvalidArgument(f"unknown weight kind {kind!r}; expected one of {WEIGHT_KINDS}") from None
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise InvalidArgument("scaled radius must be nonnegative")
    inside = r < 1.0
    out = np.zeros_like(r)
    out[inside] = profile(r[inside])
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WeightSpec:
    kind: str = "wendland-c2"
    delta: float = 1.0

    def __post_init__(self):
        if self.kind not in _PROFILES:
            raise InvalidArgument(f"unknown weight kind {self.kind!r}")
        if not self.delta > 0:
            raise InvalidArgument("support radius delta must be positive")

    def __call__(self, dist, delta: float | None = None):
        """Weights ``K((x - x_j) / delta)`` from distances ``||x - x_j||``."""
        return weight_value(self.kind, np.asarray(dist, dtype=float) / (delta or self.delta))
