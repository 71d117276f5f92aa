"""Training-plan assembly and compiled-vs-numpy backend selection.

A ``TrainingPlan`` freezes everything the hot loop needs into flat arrays:
layer widths, polynomial recurrence tables, normalization constants, interior
points with their per-point residual constants, and boundary targets.  The
loss/gradient kernel then runs either in the compiled extension (built from
``_speedups.pyx``) or the pure-numpy fallback; both produce the same numbers
to rounding and are cross-checked in the tests.

Set ``TELEGRAPHNN_BACKEND=numpy|ext`` to force a backend; default is the
extension when available.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import engine_numpy
from .network import Architecture
from .orthopoly import recurrence_coeffs
from .telegraph import CollocationSet, LossReport, TelegraphProblem

try:
    from . import _speedups
except ImportError:
    _speedups = None

__all__ = ["NetSpec", "TrainingPlan", "available_backends", "default_backend", "predict"]


def available_backends():
    return ("ext", "numpy") if _speedups is not None else ("numpy",)


def default_backend() -> str:
    choice = os.environ.get("TELEGRAPHNN_BACKEND", "auto").lower()
    if choice in ("ext", "numpy"):
        if choice == "ext" and _speedups is None:
            raise RuntimeError("compiled backend requested but the extension is not built")
        return choice
    return "ext" if _speedups is not None else "numpy"


@dataclass
class NetSpec:
    """Flat numeric description of an Architecture for the kernels."""

    widths: np.ndarray
    poly_first: bool
    degrees: np.ndarray
    c1x: float
    c1c: float
    rho: np.ndarray
    sig: np.ndarray
    tau: np.ndarray
    nlo: np.ndarray
    nscale: np.ndarray

    @classmethod
    def from_arch(cls, arch: Architecture) -> "NetSpec":
        degrees = np.asarray(arch.degrees, dtype=np.int64)
        top = int(degrees.max()) if arch.poly_first else 1
        c1x, c1c, rho, sig, tau = recurrence_coeffs(arch.family, max(top, 1))
        lo = np.asarray(arch.domain_lo)
        hi = np.asarray(arch.domain_hi)
        return cls(
            widths=np.asarray(arch.widths, dtype=np.int64),
            poly_first=arch.poly_first,
            degrees=degrees,
            c1x=float(c1x),
            c1c=float(c1c),
            rho=np.ascontiguousarray(rho),
            sig=np.ascontiguousarray(sig),
            tau=np.ascontiguousarray(tau),
            nlo=np.ascontiguousarray(lo, dtype=float),
            nscale=np.ascontiguousarray(2.0 / (hi - lo)),
        )


@dataclass
class TrainingPlan(NetSpec):
    """NetSpec plus the frozen collocation data of one training problem."""

    x_int: np.ndarray = None
    const_int: np.ndarray = None
    c_u: float = 0.0
    lap_coef: float = 0.0
    x_bc: np.ndarray = None
    bc_target: np.ndarray = None
    bc_w: float = 1.0

    @classmethod
    def build(cls, problem: TelegraphProblem, arch: Architecture, points: CollocationSet) -> "TrainingPlan":
        if problem.dim != arch.dim:
            raise ValueError("problem and architecture dimension mismatch")
        spec = NetSpec.from_arch(arch)
        x_int = np.ascontiguousarray(np.atleast_2d(points.interior), dtype=float)
        x_bc = np.ascontiguousarray(np.atleast_2d(points.boundary), dtype=float)
        if x_int.shape[0] < 1 or x_bc.shape[0] < 1:
            raise ValueError("collocation sets must be non-empty")
        const_int = np.array([problem.residual_const(tuple(x)) for x in x_int])
        bc_target = np.array(
            [problem.boundary_value(tuple(x), problem.t3) for x in x_bc]
        )
        c_u, lap_coef = problem.residual_weights()
        return cls(
            **spec.__dict__,
            x_int=x_int,
            const_int=const_int,
            c_u=c_u,
            lap_coef=lap_coef,
            x_bc=x_bc,
            bc_target=bc_target,
            bc_w=1.0 if problem.dim == 1 else 1.0 / x_bc.shape[0],
        )

    def loss_and_grad(self, theta, backend: str = None):
        """(total, mse_res, mse_bc, grad) at a flat parameter vector."""
        backend = backend or default_backend()
        if backend == "ext":
            grad = np.zeros_like(np.asarray(theta, dtype=float))
            mse_res, mse_bc = _speedups.plan_loss_and_grad(
                np.ascontiguousarray(theta, dtype=float),
                self.widths,
                1 if self.poly_first else 0,
                self.degrees,
                self.c1x,
                self.c1c,
                self.rho,
                self.sig,
                self.tau,
                self.nlo,
                self.nscale,
                self.x_int,
                self.const_int,
                self.c_u,
                self.lap_coef,
                self.x_bc,
                self.bc_target,
                self.bc_w,
                grad,
            )
        else:
            mse_res, mse_bc, grad = engine_numpy.loss_and_grad(self, theta)
        return mse_res + mse_bc, mse_res, mse_bc, grad

    def loss_report(self, theta, backend: str = None) -> LossReport:
        _, mse_res, mse_bc, _ = self.loss_and_grad(theta, backend)
        return LossReport(mse_res=mse_res, mse_bc=mse_bc)

    def objective(self, backend: str = None):
        """Closure (loss, grad) for the optimizers."""

        def fg(theta):
            total, _, _, grad = self.loss_and_grad(theta, backend)
            return total, grad

        return fg


def predict(arch: Architecture, theta, x, want_derivs: bool = False, backend: str = None):
    """Batched network evaluation: values, or (values, laplacians)."""
    spec = NetSpec.from_arch(arch)
    backend = backend or default_backend()
    theta = np.ascontiguousarray(np.asarray(theta, dtype=float).ravel())
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
    if backend == "ext":
        u = np.zeros(x.shape[0])
        lap = np.zeros(x.shape[0])
        _speedups.plan_predict(
            theta,
            spec.widths,
            1 if spec.poly_first else 0,
            spec.degrees,
            spec.c1x,
            spec.c1c,
            spec.rho,
            spec.sig,
            spec.tau,
            spec.nlo,
            spec.nscale,
            x,
            1 if want_derivs else 0,
            u,
            lap,
        )
        return (u, lap) if want_derivs else u
    return engine_numpy.predict(spec, theta, x, want_derivs)
