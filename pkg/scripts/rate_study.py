"""Observed convergence rates for the manufactured problem under several quadrature choices.

    python3 scripts/rate_study.py --m 1 2 --levels 11 21 41 81

Prints one block per (m, quadrature) pair with the per-level sup-norm errors
of u_N and v_N and the observed rates. Compares a level-scaled composite
Gauss rule with a single fixed Gauss panel and a fixed trapezoid rule.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from mlsie import DomainBox, FredholmProblem
from mlsie.study import StudyConfig, convergence_study


@dataclass(frozen=True)
class QuadChoice:
    label: str
    kind: str
    n: int
    panels: int | str


CHOICES = (
    QuadChoice("gl:8, one panel per spacing", "gl", 8, "level"),
    QuadChoice("gl:8, single panel", "gl", 8, 1),
    QuadChoice("trap:21, fixed", "trap", 21, 1),
)


def fmt(v):
    return "      -" if v is None else f"{v:9.3e}" if abs(v) < 1e-2 or abs(v) > 1e3 else f"{v:9.4f}"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--levels", type=int, nargs="+", default=[11, 21, 41, 81])
    ap.add_argument("--kernel", default="exp(x-s)")
    ap.add_argument("--exact", default="sin(pi*x)")
    args = ap.parse_args()

    box = DomainBox.unit(1)
    problem = FredholmProblem.from_expressions(1.0, args.kernel, box, exact=args.exact)
    for m in args.m:
        for q in CHOICES:
            cfg = StudyConfig(box=box, m=m, levels=args.levels, quad_kind=q.kind, quad_n=q.n, quad_panels=q.panels)
            report = convergence_study(problem, cfg)
            print(f"\nm={m}  {q.label}")
            print("    N   Q_N   err_uN     err_vN     rate_uN   rate_vN")
            for r in report.rows:
                print(f"{r.N:5d} {r.quad_points:5d} {fmt(r.err_uN_inf)} {fmt(r.err_vN_inf)} {fmt(r.rate_uN)} {fmt(r.rate_vN)}")
            if report.failure:
                print("  failed:", report.failure)


if __name__ == "__main__":
    main()
