"""Command line front end.

Exit codes: 0 success, 1 numerical or I/O failure (partial report written),
2 configuration error (nothing written).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ExprError, InvalidArgument, MlsieError
from .fredholm import FredholmProblem
from .geometry import NODE_KINDS, DomainBox
from .quadrature import parse_rule_spec
from .study import (
    DIAGNOSE_COLUMNS,
    StudyConfig,
    approximation_study,
    convergence_study,
    diagnostics_study,
    emit_report,
    exact_function,
    write_records,
)
from .weights import WEIGHT_KINDS

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _panels(text: str):
    if str(text) == "level":
        return "level"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'level' or an integer, got {text!r}") from None


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags override its values")
    common.add_argument("--dim", type=int, default=1, choices=(1, 2))
    common.add_argument("--domain", type=_float_list, help="a,b (1D) or a1,b1,a2,b2 (2D); default unit box")
    common.add_argument("--lambda", dest="lam", type=float, default=1.0)
    common.add_argument("--kernel", help="kernel k(x,s), e.g. 'exp(x-s)'")
    common.add_argument("--rhs", help="right-hand side f(x)")
    common.add_argument("--exact", help="exact solution u(x); manufactures f when --rhs is absent")
    common.add_argument("--m", type=int, default=1, help="polynomial degree")
    common.add_argument("--levels", type=_int_list, default=[11, 21, 41], help="nodes per axis, e.g. 11,21,41")
    common.add_argument("--nodes", default="uniform-grid", choices=NODE_KINDS)
    common.add_argument("--quad", default="gl:8", help="gl:<n> or trap:<n> points per panel and axis")
    common.add_argument("--quad-panels", type=_panels, default="level", help="'level' (one per grid spacing) or a count")
    common.add_argument("--sigma", type=float, help="support radius / fill distance; default 2(m+1)")
    common.add_argument("--weight", default="wendland-c2", choices=WEIGHT_KINDS)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--oversample", type=float, default=1.0, help="test/trial point ratio M/N")
    common.add_argument("--eval-points", type=int, help="dense error grid per axis (1001 in 1D, 101 in 2D)")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", default="csv", choices=("csv", "jsonl"))
    common.add_argument("--timing", action="store_true", help="fill assemble_ms/solve_ms (breaks byte-reproducibility)")
    common.add_argument("--values", help="solve only: also write trial points and nodal values to this CSV")
    if defaults:
        known = {a.dest for a in common._actions}
        unknown = sorted(set(defaults) - known - {"help"})
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        common.set_defaults(**defaults)

    parser = argparse.ArgumentParser(prog="mlsie", description="MLS collocation for second-kind Fredholm equations")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("approx", parents=[common], help="MLS approximation study of --exact")
    sub.add_parser("solve", parents=[common], help="solve at the first level of --levels")
    sub.add_parser("study", parents=[common], help="collocation convergence study over --levels")
    sub.add_parser("diagnose", parents=[common], help="geometry and stability diagnostics per level")
    return parser


def read_config_file(path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _parse_args(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    defaults = None
    if known.config:
        try:
            defaults = read_config_file(known.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        defaults = {("lam" if k == "lambda" else k): v for k, v in defaults.items()}
        if "timing" in defaults:
            defaults["timing"] = defaults["timing"].lower() in ("1", "true", "yes")
    return build_parser(defaults).parse_args(argv)


def _box(args) -> DomainBox:
    if args.domain is None:
        return DomainBox.unit(args.dim)
    if len(args.domain) != 2 * args.dim:
        raise ConfigError(f"--domain needs {2 * args.dim} numbers for dim={args.dim}")
    return DomainBox(tuple(args.domain[0::2]), tuple(args.domain[1::2]))


def _study_config(args, box: DomainBox) -> StudyConfig:
    kind, n = parse_rule_spec(args.quad)
    return StudyConfig(
        box=box,
        m=args.m,
        levels=args.levels,
        lam=args.lam,
        kernel=args.kernel,
        rhs=args.rhs,
        exact=args.exact,
        node_kind=args.nodes,
        quad_kind=kind,
        quad_n=n,
        quad_panels=args.quad_panels,
        sigma=args.sigma,
        weight=args.weight,
        seed=args.seed,
        oversample=args.oversample,
        eval_per_axis=args.eval_points,
        timing=args.timing,
    )


def _validate(args):
    """Parse and check everything up front so a bad config never writes output."""
    box = _box(args)
    cfg = _study_config(args, box)
    if args.sigma is not None and not args.sigma > 0:
        raise ConfigError("--sigma must be positive")
    if args.eval_points is not None and args.eval_points < 2:
        raise ConfigError("--eval-points must be >= 2")
    problem = exact = None
    if args.command == "approx":
        if not args.exact:
            raise ConfigError("approx needs --exact")
        exact = exact_function(args.exact, args.dim)
    elif args.command in ("solve", "study") or args.kernel:
        if not args.kernel:
            raise ConfigError(f"{args.command} needs --kernel")
        if not (args.rhs or args.exact):
            raise ConfigError(f"{args.command} needs --rhs or --exact")
        if args.lam == 0:
            raise ConfigError("--lambda must be nonzero")
        problem = FredholmProblem.from_expressions(args.lam, args.kernel, box, rhs=args.rhs, exact=args.exact)
    if args.command == "solve":
        cfg.levels = cfg.levels[:1]
    return cfg, problem, exact


def run(argv=None) -> int:
    try:
        args = _parse_args(argv)
        cfg, problem, exact = _validate(args)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    except (ConfigError, InvalidArgument, ExprError) as exc:
        print(f"mlsie: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "diagnose":
            records = diagnostics_study(problem, cfg)
            write_records(records, DIAGNOSE_COLUMNS, args.out, args.format)
            return EXIT_OK
        if args.command == "approx":
            report = approximation_study(exact, cfg)
        else:
            report = convergence_study(problem, cfg)
        emit_report(report, args.out, args.format)
        if args.command == "solve" and args.values and report.failure is None:
            _write_values(args.values, report.solutions[-1])
    except OSError as exc:
        print(f"mlsie: I/O error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MlsieError as exc:
        print(f"mlsie: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if report.failure is not None:
        print(f"mlsie: numerical failure: {report.failure['error']}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _write_values(path, sol) -> None:
    names = ["x"] if sol.model.X.dim == 1 else ["x1", "x2"]
    with open(path, "w") as fh:
        fh.write(",".join(names + ["u_tilde"]) + "\n")
        for p, u in zip(sol.model.X.points, sol.coeffs):
            fh.write(",".join("%.17g" % v for v in (*p, u)) + "\n")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
