"""Gauss-Legendre and trapezoid rules on intervals and boxes."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericalFailure
from .geometry import DomainBox

NEWTON_TOL = 1e-14
NEWTON_MAX_ITER = 100
RULE_KINDS = ("gl", "trap")


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray  # (Q_N, d)
    weights: np.ndarray  # (Q_N,)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes.reshape(-1, 1)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if nodes.shape[0] != weights.shape[0]:
            raise InvalidArgument("node and weight counts differ")
        if weights.size == 0:
            raise InvalidArgument("empty quadrature rule")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]


def _legendre_and_derivative(n: int, x: np.ndarray):
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def gauss_legendre_1d(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """``n``-point Gauss-Legendre rule on ``[a, b]``; Newton iteration from Chebyshev-like guesses."""
    if n < 1:
        raise InvalidArgument("need at least one node")
    if not a < b:
        raise InvalidArgument("need a < b")
    if n == 1:
        x = np.array([0.0])
        w = np.array([2.0])
    else:
        k = np.arange(1, n + 1)
        x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
        for _ in range(NEWTON_MAX_ITER):
            p, dp = _legendre_and_derivative(n, x)
            dx = p / dp
            x = x - dx
            if np.max(np.abs(dx)) <= NEWTON_TOL:
                break
        else:
            raise NumericalFailure(f"Gauss-Legendre Newton iteration did not converge for n={n}")
        _, dp = _legendre_and_derivative(n, x)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
        x, w = x[::-1], w[::-1]
        # symmetrize: nodes come in +/- pairs
        x = 0.5 * (x - x[::-1])
        w = 0.5 * (w + w[::-1])
    half = 0.5 * (b - a)
    return QuadratureRule(nodes=(a + b) / 2 + half * x, weights=half * w)


def composite_trapezoid_1d(n: int, a: float = 0.0, b: float = 1.0) -> QuadratureRule:
    if n < 2:
        raise InvalidArgument("trapezoid rule needs at least two points")
    if not a < b:
        raise InvalidArgument("need a < b")
    x = np.linspace(a, b, n)
    w = np.full(n, (b - a) / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return QuadratureRule(nodes=x, weights=w)


def tensor_rule(rules: list[QuadratureRule], box: DomainBox | None = None) -> QuadratureRule:
    """Cartesian product of 1D rules; weights multiply."""
    if box is not None and len(rules) != box.dim:
        raise InvalidArgument(f"{len(rules)} axis rules for a {box.dim}-dimensional box")
    nodes = np.meshgrid(*(r.nodes[:, 0] for r in rules), indexing="ij")
    weights = np.meshgrid(*(r.weights for r in rules), indexing="ij")
    return QuadratureRule(
        nodes=np.stack([g.ravel() for g in nodes], axis=1),
        weights=np.prod(np.stack([g.ravel() for g in weights], axis=1), axis=1),
    )


def composite_rule_1d(kind: str, n: int, panels: int, a: float, b: float) -> QuadratureRule:
    """``kind`` rule with ``n`` points on each of ``panels`` equal subintervals of ``[a, b]``."""
    make = {"gl": gauss_legendre_1d, "trap": composite_trapezoid_1d}.get(kind)
    if make is None:
        raise InvalidArgument(f"unknown quadrature kind {kind!r}; expected one of {RULE_KINDS}")
    if panels < 1:
        raise InvalidArgument("need at least one panel")
    if kind == "trap":
        return composite_trapezoid_1d(panels * (n - 1) + 1, a, b)
    edges = np.linspace(a, b, panels + 1)
    parts = [make(n, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    return QuadratureRule(
        nodes=np.concatenate([r.nodes for r in parts]),
        weights=np.concatenate([r.weights for r in parts]),
    )


def box_rule(kind: str, n: int, box: DomainBox, panels: int = 1) -> QuadratureRule:
    """The same 1D rule (``n`` points per panel) on every axis of ``box``."""
    return tensor_rule([composite_rule_1d(kind, n, panels, a, b) for a, b in zip(box.lower, box.upper)], box)


def parse_rule_spec(text: str) -> tuple[str, int]:
    """Parse ``gl:<n>`` or ``trap:<n>``."""
    match = re.fullmatch(r"\s*(gl|trap)\s*:\s*(\d+)\s*", text)
    if not match:
        raise InvalidArgument(f"bad quadrature spec {text!r}; expected gl:<n> or trap:<n>")
    kind, n = match.group(1), int(match.group(2))
    if n < (1 if kind == "gl" else 2):
        raise InvalidArgument(f"too few points in quadrature spec {text!r}")
    return kind, n


def integrate(rule: QuadratureRule, g) -> float:
    """``sum_k g(tau_k) w_k``; ``g`` receives the ``(Q_N, d)`` node array."""
    vals = np.asarray(g(rule.nodes), dtype=float)
    if vals.ndim == 0:
        vals = np.full(len(rule), float(vals))
    return float(vals.reshape(-1) @ rule.weights)
