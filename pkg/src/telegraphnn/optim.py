"""Full-batch Adam followed by L-BFGS with a strong-Wolfe line search.

Both optimizers work on a flat parameter vector through a single callback
``fg(theta) -> (loss, grad)`` and record per-iteration losses plus the
best-loss checkpoint; the returned model after the combined schedule is that
checkpoint, not the last iterate.  L-BFGS steps are only accepted when both
strong-Wolfe inequalities verify, and each accepted step's line-search data is
kept so the conditions can be asserted after the fact.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AdamConfig",
    "LbfgsConfig",
    "StepRecord",
    "TrainTrace",
    "FitResult",
    "DivergedError",
    "adam_run",
    "lbfgs_run",
    "fit",
]


class DivergedError(RuntimeError):
    """Loss became non-finite during optimization; the trace so far is attached."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_iters: int = 5000

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")


@dataclass
class LbfgsConfig:
    memory: int = 10
    grad_tol: float = 1e-9
    rel_loss_tol: float = 1e-12
    max_iters: int = 50000
    c1: float = 1e-4
    c2: float = 0.9

    def __post_init__(self):
        if not (0.0 < self.c1 < self.c2 < 1.0):
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")


@dataclass
class StepRecord:
    """Accepted line-search step: enough to re-check the Wolfe inequalities."""

    alpha: float
    f0: float
    g0_dot_d: float
    f1: float
    g1_dot_d: float


@dataclass
class TrainTrace:
    losses: list = field(default_factory=list)
    best_loss: float = math.inf
    best_theta: np.ndarray = None
    best_iter: int = -1
    steps: list = field(default_factory=list)
    n_evals: int = 0
    stop_reason: str = ""

    def record(self, loss, theta):
        it = len(self.losses)
        self.losses.append(loss)
        if loss < self.best_loss:
            self.best_loss = loss
            self.best_theta = np.array(theta, copy=True)
            self.best_iter = it


def adam_run(fg, theta0, cfg: AdamConfig):
    """Bias-corrected full-batch Adam; returns (final theta, trace).

    Runs exactly max_iters steps (no early stopping); raises DivergedError on
    a non-finite loss.
    """
    theta = np.array(theta0, dtype=float, copy=True)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    trace = TrainTrace()
    for t in range(1, cfg.max_iters + 1):
        f, g = fg(theta)
        trace.n_evals += 1
        if not math.isfinite(f):
            trace.stop_reason = "diverged"
            raise DivergedError(f"loss became {f!r} at iteration {t - 1}", trace)
        trace.record(f, theta)
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g
        m_hat = m / (1.0 - cfg.beta1 ** t)
        v_hat = v / (1.0 - cfg.beta2 ** t)
        theta -= cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps)
    trace.stop_reason = "max_iters"
    return theta, trace


def _cubic_min(a, fa, dfa, b, fb, dfb):
    """Minimizer of the cubic interpolant on [a, b]; None if degenerate."""
    d1 = dfa + dfb - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - dfa * dfb
    if disc < 0.0:
        return None
    d2 = math.copysign(math.sqrt(disc), b - a)
    denom = dfb - dfa + 2.0 * d2
    if denom == 0.0:
        return None
    x = b - (b - a) * (dfb + d2 - d1) / denom
    return x if math.isfinite(x) else None


def _zoom(phi, a_lo, f_lo, df_lo, a_hi, f_hi, df_hi, f0, df0, c1, c2, max_iters=25):
    for _ in range(max_iters):
        a = _cubic_min(a_lo, f_lo, df_lo, a_hi, f_hi, df_hi)
        width = abs(a_hi - a_lo)
        lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
        if a is None or not (lo + 0.1 * width <= a <= hi - 0.1 * width):
            a = 0.5 * (a_lo + a_hi)
        if width < 1e-16 * max(1.0, abs(a_lo)):
            return None
        f, df, payload = phi(a)
        if not math.isfinite(f) or f > f0 + c1 * a * df0 or f >= f_lo:
            a_hi, f_hi, df_hi = a, f, df
        else:
            if abs(df) <= -c2 * df0:
                return a, f, df, payload
            if df * (a_hi - a_lo) >= 0.0:
                a_hi, f_hi, df_hi = a_lo, f_lo, df_lo
            a_lo, f_lo, df_lo = a, f, df
    return None


def _strong_wolfe(phi, f0, df0, alpha0, c1, c2, max_expand=12, alpha_max=1e6):
    """Bracket-and-zoom strong Wolfe search on phi(a) = f(x + a d).

    ``phi`` returns (f, df, payload); payload rides along so the caller gets
    the gradient at the accepted point without re-evaluating.
    """
    if df0 >= 0.0:
        return None
    a_prev, f_prev, df_prev = 0.0, f0, df0
    a = alpha0
    for i in range(max_expand):
        f, df, payload = phi(a)
        if not math.isfinite(f) or f > f0 + c1 * a * df0 or (f >= f_prev and i > 0):
            return _zoom(phi, a_prev, f_prev, df_prev, a, f, df, f0, df0, c1, c2)
        if abs(df) <= -c2 * df0:
            return a, f, df, payload
        if df >= 0.0:
            return _zoom(phi, a, f, df, a_prev, f_prev, df_prev, f0, df0, c1, c2)
        # curvature still negative: extrapolate ahead, cubic guess when sane
        guess = _cubic_min(a_prev, f_prev, df_prev, a, f, df)
        a_prev, f_prev, df_prev = a, f, df
        if guess is not None and 1.1 * a < guess < 10.0 * a:
            a = min(guess, alpha_max)
        else:
            a = min(2.0 * a, alpha_max)
    return None


def _two_loop(g, mem):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(mem):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if mem:
        s, y, _ = mem[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(mem, reversed(alphas)):
        b = rho * (y @ q)
        q += s * (a - b)
    return q


def lbfgs_run(fg, theta0, cfg: LbfgsConfig):
    """Two-loop-recursion L-BFGS with strong-Wolfe steps; returns (best theta, trace).

    Stops on gradient norm, relative loss decrease, iteration cap, or after a
    failed line search whose steepest-descent fallback also fails.
    """
    x = np.array(theta0, dtype=float, copy=True)
    f, g = fg(x)
    trace = TrainTrace()
    trace.n_evals = 1
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        trace.stop_reason = "diverged"
        raise DivergedError("non-finite initial loss or gradient", trace)
    trace.record(f, x)
    if np.max(np.abs(g)) <= cfg.grad_tol:
        trace.stop_reason = "grad_tol"
        return x, trace
    mem = deque(maxlen=cfg.memory)

    for k in range(cfg.max_iters):
        d = -_two_loop(g, mem)
        if d @ g >= 0.0:
            d = -g

        def phi(a, _d=d):
            fa, ga = fg(x + a * _d)
            trace.n_evals += 1
            return fa, ga @ _d, ga

        alpha0 = min(1.0, 1.0 / max(np.sum(np.abs(g)), 1e-12)) if k == 0 else 1.0
        hit = _strong_wolfe(phi, f, g @ d, alpha0, cfg.c1, cfg.c2)
        if hit is None and not np.array_equal(d, -g):
            d = -g
            hit = _strong_wolfe(phi, f, g @ d, alpha0, cfg.c1, cfg.c2)
        if hit is None:
            trace.stop_reason = "line_search_failure"
            break
        alpha, f_new, df_new, g_new = hit
        trace.steps.append(
            StepRecord(alpha=alpha, f0=f, g0_dot_d=g @ d, f1=f_new, g1_dot_d=df_new)
        )
        x_new = x + alpha * d
        trace.record(f_new, x_new)
        s = x_new - x
        y = g_new - g
        sy = s @ y
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            mem.append((s, y, 1.0 / sy))
        decrease = f - f_new
        x, f, g = x_new, f_new, g_new
        if np.max(np.abs(g)) <= cfg.grad_tol:
            trace.stop_reason = "grad_tol"
            break
        if decrease <= cfg.rel_loss_tol * max(abs(f), abs(f_new), 1.0):
            trace.stop_reason = "rel_loss_tol"
            break
    else:
        trace.stop_reason = "max_iters"
    return np.array(trace.best_theta, copy=True), trace


@dataclass
class FitResult:
    """Outcome of the Adam -> L-BFGS schedule."""

    theta: np.ndarray
    losses: list
    adam_iters: int
    best_loss: float
    best_iter: int
    lbfgs_steps: list
    stop_reason: str


def fit(fg, theta0, adam_cfg: AdamConfig, lbfgs_cfg: LbfgsConfig) -> FitResult:
    """Run Adam to its iteration cap, hand off to L-BFGS, return the best-loss
    checkpoint over the combined trace."""
    theta_adam, tr_a = adam_run(fg, theta0, adam_cfg)
    theta_l, tr_l = lbfgs_run(fg, theta_adam, lbfgs_cfg)
    losses = list(tr_a.losses) + list(tr_l.losses)
    if tr_l.best_loss <= tr_a.best_loss:
        best_theta, best_loss = tr_l.best_theta, tr_l.best_loss
        best_iter = len(tr_a.losses) + tr_l.best_iter
    else:
        best_theta, best_loss = tr_a.best_theta, tr_a.best_loss
        best_iter = tr_a.best_iter
    return FitResult(
        theta=np.array(best_theta, copy=True),
        losses=losses,
        adam_iters=len(tr_a.losses),
        best_loss=best_loss,
        best_iter=best_iter,
        lbfgs_steps=tr_l.steps,
        stop_reason=tr_l.stop_reason,
    )
