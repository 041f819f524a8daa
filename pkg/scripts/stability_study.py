"""Stability measurements across refinement: ||Phi^-1||_inf, the Lebesgue-type constant C1 and h/q.

    python3 scripts/stability_study.py --m 1 2 3 --sigma-factors 1.0 1.5 --nodes uniform-grid perturbed-grid
"""

from __future__ import annotations

import argparse

from mlsie import DomainBox, generate_nodes
from mlsie.linalg import inf_norm_inverse
from mlsie.mls import build_model, default_sigma


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--levels", type=int, nargs="+", default=[21, 41, 81, 161])
    ap.add_argument("--sigma-factors", type=float, nargs="+", default=[1.0],
                    help="multiples of the default support factor 2(m+1)")
    ap.add_argument("--nodes", nargs="+", default=["uniform-grid"])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    box = DomainBox.unit(1)
    probes = box.grid(1001)
    for kind in args.nodes:
        for m in args.m:
            for factor in args.sigma_factors:
                sigma = factor * default_sigma(m)
                print(f"\n{kind}  m={m}  sigma={sigma:g}")
                print("    N   h/q      ||Phi^-1||   C1")
                for n in args.levels:
                    X = generate_nodes(kind, n, box, seed=args.seed)
                    model = build_model(X, m, sigma=sigma)
                    phi_inv = inf_norm_inverse(model.shape_matrix(X.points))
                    print(f"{n:5d} {X.cqu:8.4f} {phi_inv:12.6f} {model.stability_constant(probes):9.6f}")


if __name__ == "__main__":
    main()
