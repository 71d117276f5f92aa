"""End-to-end experiment runner: presets, training, reports, and file outputs.

A run resolves its configuration (preset -> config file -> explicit
overrides), samples seeded collocation sets, trains the polynomial-layer
network (and optionally its tanh twin from the same init stream and point
sets), and writes:

    manifest.json     resolved configuration, PRNG name, backend, stop data
    errors_random.csv method, layers, train/test relative-L2
    errors_grid.csv   method, Linf, L2, RMS on the report grid
    trace_jdnn.csv    iteration, loss (trace_dnn.csv with --baseline)
    field.csv         grid point, exact, predicted, |residual|
    params_jdnn.txt   flat best-checkpoint parameter vector

With ``pin_exact`` the exact solution replaces the network (no training);
useful for validating that the residual discretization vanishes where it
should.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff, engine, metrics
from .network import Architecture, ParamSet, init_params
from .optim import AdamConfig, DivergedError, LbfgsConfig, fit
from .orthopoly import PolyFamily
from .sampler import PRNG_NAME, SampleSpec, collocation_for, default_grid_shape, report_grid
from .telegraph import (
    EXAMPLES,
    CollocationSet,
    PinnedExactPredictor,
    TelegraphProblem,
    loss_at,
)

__all__ = ["RunConfig", "RunResult", "run_example", "compare_baseline", "CHECK_THRESHOLDS"]

PRESETS = {
    1: dict(family="legendre", widths=(1, 8, 16, 16, 32, 16, 16, 8, 1),
            n_interior=200, n_test=100, adam_iters=5000),
    2: dict(family="legendre", widths=(1, 10, 20, 60, 80, 60, 20, 10, 1),
            n_interior=200, n_test=100, adam_iters=2000),
    3: dict(family="chebyshev1", widths=(2, 8, 16, 32, 64, 32, 16, 8, 1),
            n_interior=100, n_test=100, adam_iters=5000),
    4: dict(family="chebyshev1", widths=(2, 4, 8, 16, 32, 32, 16, 8, 1),
            n_interior=100, n_test=100, adam_iters=5000),
}

# Reproduction gates used by --check (test-set relative L2, grid max error).
CHECK_THRESHOLDS = {
    1: {"test_rel_l2": 5e-3, "grid_linf": 2e-4},
    2: {"test_rel_l2": 1e-4},
    3: {"test_rel_l2": 5e-4},
    4: {"test_rel_l2": 6.3e-3, "grid_linf": 3e-3},
}


@dataclass
class RunConfig:
    """Fully resolvable run description; unset fields fall back to presets."""

    example: object = "custom"
    family: str = None
    widths: tuple = None
    n_interior: int = None
    n_boundary: int = 100
    n_test: int = None
    grid_shape: tuple = None
    seed: int = 0
    adam_iters: int = None
    adam_lr: float = 1e-3
    lbfgs_iters: int = 50000
    lbfgs_grad_tol: float = 1e-9
    lbfgs_rel_loss_tol: float = 1e-12
    baseline: bool = False
    pin_exact: bool = False
    backend: str = None
    # custom-problem fields (ignored for presets)
    dim: int = 1
    alpha: float = 0.5
    damping_u: float = 1.0
    domain: tuple = ((0.0,), (1.0,))
    t1: float = 0.6
    t2: float = 0.8
    t3: float = 1.0
    f: str = "0.0"
    exact: str = None

    @classmethod
    def resolve(cls, example="custom", config_file=None, **overrides) -> "RunConfig":
        """Merge preset defaults, a JSON config file, and explicit overrides
        (that precedence order; later wins)."""
        values = {}
        if config_file:
            with open(config_file) as fh:
                values.update(json.load(fh))
        if "example" in overrides and overrides["example"] is not None:
            example = overrides["example"]
        elif "example" in values:
            example = values["example"]
        example = int(example) if str(example) in {"1", "2", "3", "4"} else example
        merged = dict(PRESETS.get(example, {}))
        merged.update(values)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        merged["example"] = example
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(merged) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**merged)

    def problem(self) -> TelegraphProblem:
        if self.example in EXAMPLES:
            return EXAMPLES[self.example]()
        if self.exact is None:
            raise ValueError("custom problems need an 'exact' expression")
        exact = _expr_fn(self.exact, self.dim)
        f = _expr_fn(self.f, self.dim)
        return TelegraphProblem(
            dim=self.dim,
            alpha=self.alpha,
            damping_u=self.damping_u,
            domain_lo=tuple(self.domain[0]),
            domain_hi=tuple(self.domain[1]),
            t1=self.t1,
            t2=self.t2,
            t3=self.t3,
            f=f,
            u_t1=lambda x: exact(x, self.t1),
            u_t2=lambda x: exact(x, self.t2),
            boundary_value=exact,
            exact=exact,
            name="custom",
        )

    def architecture(self, problem: TelegraphProblem) -> Architecture:
        if self.widths is None or self.family is None:
            raise ValueError("widths and family must be set (preset or explicit)")
        return Architecture(
            widths=tuple(self.widths),
            family=PolyFamily.parse(self.family),
            domain_lo=problem.domain_lo,
            domain_hi=problem.domain_hi,
        )

    def sample_spec(self) -> SampleSpec:
        if self.n_interior is None or self.n_test is None:
            raise ValueError("point counts must be set (preset or explicit)")
        return SampleSpec(
            seed=self.seed,
            n_interior=self.n_interior,
            n_boundary=self.n_boundary,
            n_test=self.n_test,
            grid_shape=tuple(self.grid_shape) if self.grid_shape else None,
        )

    def adam_config(self) -> AdamConfig:
        iters = 5000 if self.adam_iters is None else self.adam_iters
        return AdamConfig(lr=self.adam_lr, max_iters=iters)

    def lbfgs_config(self) -> LbfgsConfig:
        return LbfgsConfig(
            grad_tol=self.lbfgs_grad_tol,
            rel_loss_tol=self.lbfgs_rel_loss_tol,
            max_iters=self.lbfgs_iters,
        )


def _expr_fn(expr: str, dim: int):
    """Tiny expression DSL for custom problems: x1[, x2], t plus sin/cos/exp/tanh.

    Uses the generic math helpers so jets flow through for residual fields."""
    code = compile(str(expr), "<config>", "eval")
    env = {
        "sin": autodiff.sin,
        "cos": autodiff.cos,
        "exp": autodiff.exp,
        "tanh": autodiff.tanh,
        "pi": math.pi,
    }

    def fn(x, t):
        loc = {"x1": x[0], "t": t}
        if dim == 2:
            loc["x2"] = x[1]
        return eval(code, {"__builtins__": {}}, {**env, **loc})

    return fn


@dataclass
class VariantResult:
    """Reports and artifacts for one trained (or pinned) model."""

    method: str
    train_report: metrics.ErrorReport
    test_report: metrics.ErrorReport
    grid_report: metrics.ErrorReport
    loss_total: float
    mse_res: float
    mse_bc: float
    losses: list = field(default_factory=list)
    adam_iters: int = 0
    best_iter: int = -1
    stop_reason: str = ""
    theta: np.ndarray = None
    diverged: bool = False
    grid_values: np.ndarray = None
    grid_residual: np.ndarray = None


@dataclass
class RunResult:
    config: RunConfig
    problem: TelegraphProblem
    arch: Architecture
    points: CollocationSet
    grid: np.ndarray
    jdnn: VariantResult
    dnn: VariantResult = None
    check_failures: list = field(default_factory=list)

    @property
    def check_ok(self) -> bool:
        return not self.check_failures


def _exact_values(problem, pts) -> np.ndarray:
    return np.array([problem.exact(tuple(x), problem.t3) for x in np.atleast_2d(pts)], dtype=float)


def _pinned_variant(problem, points, grid) -> VariantResult:
    pred = PinnedExactPredictor(problem)
    rep = loss_at(problem, pred, points)

    def values(pts):
        return np.array([pred.value(tuple(x)) for x in pts])

    def reports(pts, label):
        return metrics.error_report(_exact_values(problem, pts), values(pts), label)

    grid_u = values(grid)
    grid_lap = np.array([pred.value_and_laplacian(tuple(x))[1] for x in grid])
    c_u, lap_coef = problem.residual_weights()
    grid_res = c_u * grid_u + lap_coef * grid_lap + np.array(
        [problem.residual_const(tuple(x)) for x in grid]
    )
    out = VariantResult(
        method="pinned-exact",
        train_report=reports(points.interior, "train"),
        test_report=reports(points.test, "test"),
        grid_report=metrics.error_report(_exact_values(problem, grid), grid_u, "grid"),
        loss_total=rep.total,
        mse_res=rep.mse_res,
        mse_bc=rep.mse_bc,
    )
    out.grid_values = grid_u
    out.grid_residual = grid_res
    return out


def _train_variant(problem, arch, points, grid, cfg: RunConfig, method: str) -> VariantResult:
    plan = engine.TrainingPlan.build(problem, arch, points)
    theta0 = init_params(arch, cfg.seed).flatten()
    backend = cfg.backend if cfg.backend not in (None, "auto") else None
    fg = plan.objective(backend)
    diverged = False
    try:
        result = fit(fg, theta0, cfg.adam_config(), cfg.lbfgs_config())
        theta = result.theta
        losses = result.losses
        adam_iters = result.adam_iters
        best_iter = result.best_iter
        stop = result.stop_reason
    except DivergedError as err:
        diverged = True
        theta = theta0
        losses = list(err.trace.losses) if err.trace else []
        adam_iters = len(losses)
        best_iter = -1
        stop = "diverged"
    total, mse_res, mse_bc, _ = plan.loss_and_grad(theta, backend)

    def reports(pts, label):
        u_pred = engine.predict(arch, theta, pts, backend=backend)
        return metrics.error_report(_exact_values(problem, pts), u_pred, label)

    grid_u, grid_lap = engine.predict(arch, theta, grid, want_derivs=True, backend=backend)
    c_u, lap_coef = problem.residual_weights()
    grid_res = c_u * grid_u + lap_coef * grid_lap + np.array(
        [problem.residual_const(tuple(x)) for x in grid]
    )
    out = VariantResult(
        method=method,
        train_report=reports(points.interior, "train"),
        test_report=reports(points.test, "test"),
        grid_report=metrics.error_report(_exact_values(problem, grid), grid_u, "grid"),
        loss_total=total,
        mse_res=mse_res,
        mse_bc=mse_bc,
        losses=losses,
        adam_iters=adam_iters,
        best_iter=best_iter,
        stop_reason=stop,
        theta=theta,
        diverged=diverged,
    )
    out.grid_values = grid_u
    out.grid_residual = grid_res
    return out


def run_example(cfg: RunConfig, out_dir=None) -> RunResult:
    """Train per config (or pin the exact solution) and optionally write outputs."""
    problem = cfg.problem()
    arch = cfg.architecture(problem)
    spec = cfg.sample_spec()
    points = collocation_for(problem, spec)
    grid = report_grid(
        problem.domain_lo,
        problem.domain_hi,
        spec.grid_shape or default_grid_shape(problem.dim),
    )

    if cfg.pin_exact:
        jdnn = _pinned_variant(problem, points, grid)
        dnn = None
    else:
        jdnn = _train_variant(problem, arch, points, grid, cfg, "JDNN")
        dnn = (
            _train_variant(problem, arch.tanh_twin(), points, grid, cfg, "SimpleDNN")
            if cfg.baseline
            else None
        )

    result = RunResult(
        config=cfg, problem=problem, arch=arch, points=points, grid=grid,
        jdnn=jdnn, dnn=dnn,
    )
    thresholds = CHECK_THRESHOLDS.get(cfg.example, {})
    if not cfg.pin_exact:
        if jdnn.diverged:
            result.check_failures.append("training diverged")
        if "test_rel_l2" in thresholds and jdnn.test_report.rel_l2 > thresholds["test_rel_l2"]:
            result.check_failures.append(
                f"test rel_l2 {jdnn.test_report.rel_l2:.3e} > {thresholds['test_rel_l2']:.1e}"
            )
        if "grid_linf" in thresholds and jdnn.grid_report.linf > thresholds["grid_linf"]:
            result.check_failures.append(
                f"grid linf {jdnn.grid_report.linf:.3e} > {thresholds['grid_linf']:.1e}"
            )
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


def compare_baseline(cfg: RunConfig, out_dir=None) -> RunResult:
    """Train both variants from the same seed stream and point sets."""
    if not cfg.baseline:
        cfg = RunConfig(**{**asdict(cfg), "baseline": True})
    return run_example(cfg, out_dir)


def _layers_label(widths) -> str:
    return "[" + " ".join(str(w) for w in widths) + "]"


def _write(path, lines):
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_outputs(result: RunResult, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    cfg = result.config
    fmt = metrics.format_value
    variants = [result.jdnn] + ([result.dnn] if result.dnn else [])

    rows = ["method,layers,train_rel_l2,test_rel_l2"]
    for v in variants:
        rows.append(
            ",".join(
                [v.method, _layers_label(result.arch.widths),
                 fmt(v.train_report.rel_l2), fmt(v.test_report.rel_l2)]
            )
        )
    _write(os.path.join(out_dir, "errors_random.csv"), rows)

    rows = ["method,linf,l2,rms"]
    for v in variants:
        rows.append(metrics.grid_csv_row(v.method, v.grid_report))
    _write(os.path.join(out_dir, "errors_grid.csv"), rows)

    head = ("x" if result.problem.dim == 1 else "x1,x2") + ",u_exact,u_pred,abs_residual"
    rows = [head]
    u_exact = _exact_values(result.problem, result.grid)
    for x, ue, up, rr in zip(result.grid, u_exact, result.jdnn.grid_values,
                             result.jdnn.grid_residual):
        coords = ",".join(fmt(c) for c in x)
        rows.append(f"{coords},{fmt(ue)},{fmt(up)},{fmt(abs(rr))}")
    _write(os.path.join(out_dir, "field.csv"), rows)

    for v, tag in ((result.jdnn, "jdnn"), (result.dnn, "dnn")):
        if v is None or not v.losses:
            continue
        rows = ["iteration,loss"] + [
            f"{i},{fmt(val)}" for i, val in enumerate(v.losses)
        ]
        _write(os.path.join(out_dir, f"trace_{tag}.csv"), rows)

    if result.jdnn.theta is not None:
        ParamSet.unflatten(result.arch, result.jdnn.theta).save_text(
            os.path.join(out_dir, "params_jdnn.txt")
        )

    manifest = {
        "config": asdict(cfg),
        "resolved": {
            "prng": PRNG_NAME,
            "backend": cfg.backend or engine.default_backend(),
            "family": result.arch.family.label(),
            "degrees": list(result.arch.degrees),
            "widths": list(result.arch.widths),
            "n_params": result.arch.n_params,
            "grid_shape": list(cfg.grid_shape or default_grid_shape(result.problem.dim)),
            "problem": result.problem.name,
            "version": _version(),
        },
        "results": {
            v.method: {
                "train_rel_l2": v.train_report.rel_l2,
                "test_rel_l2": v.test_report.rel_l2,
                "grid_linf": v.grid_report.linf,
                "grid_l2": v.grid_report.l2,
                "grid_rms": v.grid_report.rms,
                "loss_total": v.loss_total,
                "mse_res": v.mse_res,
                "mse_bc": v.mse_bc,
                "iterations": len(v.losses),
                "adam_iters": v.adam_iters,
                "best_iter": v.best_iter,
                "stop_reason": v.stop_reason,
                "diverged": v.diverged,
            }
            for v in variants
        },
        "check_failures": result.check_failures,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _version() -> str:
    from . import __version__

    return __version__
