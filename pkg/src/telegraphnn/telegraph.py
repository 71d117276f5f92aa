"""Telegraph-equation problems, the time-discretized residual, and the loss.

One implicit time step: given solution snapshots at t1 and t2 (uniform step
dt), the unknown field at t3 = t2 + dt satisfies

    (1 + 2*alpha*dt) * u3 - 2*(1 + alpha*dt) * u2 + u1 - dt^2 * N(u3) = 0
    N(w) = -damping_u * w + laplacian(w) + f(x, t3)

The residual of that relation over interior collocation points, plus squared
Dirichlet mismatch at t3 on the boundary, is the training loss.  Spatial
derivatives inside N are exact (second-order jets), only time is discretized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff
from .autodiff import Jet2
from .network import Architecture, ParamSet, forward
from .orthopoly import PolyFamily

__all__ = [
    "TelegraphProblem",
    "CollocationSet",
    "LossReport",
    "NetworkPredictor",
    "PinnedExactPredictor",
    "spatial_operator_N",
    "residual",
    "loss",
    "operator_n_at",
    "residual_at",
    "loss_at",
    "example1",
    "example2",
    "example3",
    "example4",
    "EXAMPLES",
]


@dataclass
class TelegraphProblem:
    """One telegraph problem instance with snapshot data at two time levels.

    ``damping_u`` is the coefficient of the undifferentiated u term (beta or
    beta^2 depending on the chosen form; identical for the shipped examples,
    where beta = 1).  Snapshots and boundary data are callables of the spatial
    point; ``f`` and ``boundary_value`` additionally take the time.
    """

    dim: int
    alpha: float
    damping_u: float
    domain_lo: tuple
    domain_hi: tuple
    t1: float
    t2: float
    t3: float
    f: callable
    u_t1: callable
    u_t2: callable
    boundary_value: callable
    exact: callable = None
    name: str = "custom"

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        self.domain_lo = tuple(float(v) for v in self.domain_lo)
        self.domain_hi = tuple(float(v) for v in self.domain_hi)
        if len(self.domain_lo) != self.dim or len(self.domain_hi) != self.dim:
            raise ValueError("domain bounds must match dim")
        d1 = self.t2 - self.t1
        d2 = self.t3 - self.t2
        if d1 <= 0 or abs(d1 - d2) > 1e-12 * max(1.0, abs(d2)):
            raise ValueError("need uniform time levels t1 < t2 < t3")

    @property
    def dt(self) -> float:
        return self.t3 - self.t2

    def residual_weights(self):
        """Coefficients (c_u, lap_coef) so that
        Res = c_u * u3 + lap_coef * laplacian(u3) + const(x)."""
        dt = self.dt
        c_u = 1.0 + 2.0 * self.alpha * dt + dt * dt * self.damping_u
        return c_u, -dt * dt

    def residual_const(self, x) -> float:
        """Point terms of the residual that do not involve the unknown field."""
        dt = self.dt
        return (
            -2.0 * (1.0 + self.alpha * dt) * self.u_t2(x)
            + self.u_t1(x)
            - dt * dt * self.f(x, self.t3)
        )


@dataclass
class CollocationSet:
    """Interior residual points, boundary points, and held-out test points."""

    interior: np.ndarray
    boundary: np.ndarray
    test: np.ndarray = None


@dataclass
class LossReport:
    mse_res: float
    mse_bc: float

    @property
    def total(self) -> float:
        return self.mse_res + self.mse_bc


class NetworkPredictor:
    """Reference (scalar-path) predictor over a network parameter set."""

    def __init__(self, arch: Architecture, theta: ParamSet):
        self.arch = arch
        self.theta = theta

    def value(self, x) -> float:
        return float(forward(self.arch, self.theta, x))

    def value_and_laplacian(self, x):
        val = None
        lap = 0.0
        for s in range(self.arch.dim):
            jet = forward(self.arch, self.theta, x, seed_dir=s)
            if s == 0:
                val = jet.v
            lap += jet.d2
        return val, lap


class PinnedExactPredictor:
    """Predictor that returns the problem's exact solution at t3 (debug path)."""

    def __init__(self, problem: TelegraphProblem):
        if problem.exact is None:
            raise ValueError("problem has no exact solution to pin")
        self.problem = problem

    def value(self, x) -> float:
        return float(self.problem.exact(x, self.problem.t3))

    def value_and_laplacian(self, x):
        p = self.problem
        val = p.exact(x, p.t3)
        lap = 0.0
        for s in range(p.dim):
            jets = [
                Jet2(float(x[j]), 1.0 if j == s else 0.0, 0.0) for j in range(p.dim)
            ]
            lap += p.exact(jets, p.t3).d2
        return float(val), float(lap)


def operator_n_at(problem: TelegraphProblem, predictor, x) -> float:
    """Spatial operator N(u) = -damping_u*u + laplacian(u) + f(x, t3)."""
    val, lap = predictor.value_and_laplacian(x)
    return -problem.damping_u * val + lap + problem.f(x, problem.t3)


def residual_at(problem: TelegraphProblem, predictor, x) -> float:
    dt = problem.dt
    val = predictor.value(x)
    n_op = operator_n_at(problem, predictor, x)
    return (
        (1.0 + 2.0 * problem.alpha * dt) * val
        - 2.0 * (1.0 + problem.alpha * dt) * problem.u_t2(x)
        + problem.u_t1(x)
        - dt * dt * n_op
    )


def loss_at(problem: TelegraphProblem, predictor, points: CollocationSet) -> LossReport:
    interior = np.atleast_2d(np.asarray(points.interior, dtype=float))
    boundary = np.atleast_2d(np.asarray(points.boundary, dtype=float))
    if interior.size == 0 or boundary.size == 0:
        raise ValueError("collocation sets must be non-empty")
    res = [residual_at(problem, predictor, tuple(x)) for x in interior]
    mse_res = float(np.mean(np.square(res)))
    mism = [
        predictor.value(tuple(x)) - problem.boundary_value(tuple(x), problem.t3)
        for x in boundary
    ]
    if problem.dim == 1:
        mse_bc = float(np.sum(np.square(mism)))
    else:
        mse_bc = float(np.mean(np.square(mism)))
    return LossReport(mse_res=mse_res, mse_bc=mse_bc)


def spatial_operator_N(problem: TelegraphProblem, arch: Architecture, theta: ParamSet, x) -> float:
    return operator_n_at(problem, NetworkPredictor(arch, theta), x)


def residual(problem: TelegraphProblem, arch: Architecture, theta: ParamSet, x) -> float:
    return residual_at(problem, NetworkPredictor(arch, theta), x)


def loss(problem: TelegraphProblem, arch: Architecture, theta: ParamSet, points: CollocationSet) -> LossReport:
    """Reference loss: mean squared residual plus boundary mismatch.

    In 1D the boundary set is the two endpoints and the term is the plain sum
    of their squared mismatches; in 2D it is the mean over the sampled
    boundary points.
    """
    return loss_at(problem, NetworkPredictor(arch, theta), points)


def _snapshot_problem(dim, alpha, damping_u, lo, hi, exact, f, name, t=(0.6, 0.8, 1.0)):
    t1, t2, t3 = t
    return TelegraphProblem(
        dim=dim,
        alpha=alpha,
        damping_u=damping_u,
        domain_lo=lo,
        domain_hi=hi,
        t1=t1,
        t2=t2,
        t3=t3,
        f=f,
        u_t1=lambda x: exact(x, t1),
        u_t2=lambda x: exact(x, t2),
        boundary_value=exact,
        exact=exact,
        name=name,
    )


def example1() -> TelegraphProblem:
    """1D, damping alpha=1/2, u-term 1, homogeneous source, u = exp(x - t) on [0, 4]."""

    def exact(x, t):
        return autodiff.exp(x[0] - t)

    return _snapshot_problem(
        1, 0.5, 1.0, (0.0,), (4.0,), exact, lambda x, t: 0.0, "example1"
    )


def example2() -> TelegraphProblem:
    """1D, alpha=1/2, u-term 1, f = x^2 + t - 1, u = x^2 + t on [0, 1].

    The exact solution is linear in time, so it zeroes the discretized
    residual identically; trained accuracy is limited only by optimization.
    """

    def exact(x, t):
        return x[0] * x[0] + t

    return _snapshot_problem(
        1, 0.5, 1.0, (0.0,), (1.0,), exact, lambda x, t: x[0] * x[0] + t - 1.0, "example2"
    )


def example3() -> TelegraphProblem:
    """2D, alpha=1, u-term 1, f = -2 + x1^2 + x2^2 + t, u = x1^2 + x2^2 + t."""

    def exact(x, t):
        return x[0] * x[0] + x[1] * x[1] + t

    return _snapshot_problem(
        2,
        1.0,
        1.0,
        (0.0, 0.0),
        (1.0, 1.0),
        exact,
        lambda x, t: -2.0 + x[0] * x[0] + x[1] * x[1] + t,
        "example3",
    )


def example4() -> TelegraphProblem:
    """2D, alpha=1, u-term 1, f = 2 sin(x1) sin(x2) (cos t - sin t),
    u = cos(t) sin(x1) sin(x2)."""

    def exact(x, t):
        return autodiff.cos(t) * autodiff.sin(x[0]) * autodiff.sin(x[1])

    def f(x, t):
        return 2.0 * math.sin(x[0]) * math.sin(x[1]) * (math.cos(t) - math.sin(t))

    return _snapshot_problem(2, 1.0, 1.0, (0.0, 0.0), (1.0, 1.0), exact, f, "example4")


EXAMPLES = {1: example1, 2: example2, 3: example3, 4: example4}
