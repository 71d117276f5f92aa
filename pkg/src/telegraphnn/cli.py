"""Command-line experiment runner.

    telegraphnn solve --example 2 --seed 0 --out runs/ex2
    telegraphnn solve --example 1 --baseline --check --out runs/ex1
    telegraphnn solve --config my_problem.json --out runs/custom

Flag values override config-file values, which override example presets.
``--check`` exits nonzero when a reproduction threshold is violated.
"""

from __future__ import annotations

import argparse
import sys

from .runner import RunConfig, run_example


def _widths(text):
    return tuple(int(w) for w in text.replace(",", " ").split())


def _grid(text):
    return tuple(int(w) for w in text.replace("x", " ").replace(",", " ").split())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="telegraphnn", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="train on a preset example or custom problem")
    s.add_argument("--example", choices=["1", "2", "3", "4", "custom"], default=None)
    s.add_argument("--config", default=None, help="JSON config file")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--family", default=None,
                   help="legendre | chebyshev1 | jacobi:A:B")
    s.add_argument("--widths", type=_widths, default=None,
                   help="layer widths, e.g. '1,8,16,8,1'")
    s.add_argument("--adam-iters", type=int, default=None, dest="adam_iters")
    s.add_argument("--lbfgs-iters", type=int, default=None, dest="lbfgs_iters")
    s.add_argument("--n-interior", type=int, default=None, dest="n_interior")
    s.add_argument("--n-boundary", type=int, default=None, dest="n_boundary")
    s.add_argument("--n-test", type=int, default=None, dest="n_test")
    s.add_argument("--grid-shape", type=_grid, default=None, dest="grid_shape",
                   help="report grid, e.g. 101 or 33x33")
    s.add_argument("--backend", choices=["auto", "ext", "numpy"], default=None)
    s.add_argument("--baseline", action="store_true", default=None,
                   help="also train the tanh-only twin on the same points")
    s.add_argument("--pin-exact", action="store_true", default=None, dest="pin_exact",
                   help="skip training; evaluate the exact solution in the pipeline")
    s.add_argument("--check", action="store_true",
                   help="exit nonzero if reproduction thresholds are violated")
    s.add_argument("--out", default=None, help="output directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = dict(
        example=args.example,
        seed=args.seed,
        family=args.family,
        widths=args.widths,
        adam_iters=args.adam_iters,
        lbfgs_iters=args.lbfgs_iters,
        n_interior=args.n_interior,
        n_boundary=args.n_boundary,
        n_test=args.n_test,
        grid_shape=args.grid_shape,
        backend=args.backend,
        baseline=args.baseline,
        pin_exact=args.pin_exact,
    )
    cfg = RunConfig.resolve(config_file=args.config, **overrides)
    result = run_example(cfg, out_dir=args.out)

    for v in [result.jdnn] + ([result.dnn] if result.dnn else []):
        print(
            f"{v.method}: loss={v.loss_total:.3e} train_rel_l2={v.train_report.rel_l2:.3e} "
            f"test_rel_l2={v.test_report.rel_l2:.3e} grid_linf={v.grid_report.linf:.3e}"
            + (f" stop={v.stop_reason}" if v.stop_reason else "")
        )
    if result.jdnn.diverged:
        print("training diverged; trace retained in outputs", file=sys.stderr)
        return 2
    if args.check and not result.check_ok:
        for failure in result.check_failures:
            print(f"check failed: {failure}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
