"""Seeded collocation-point generation and report grids.

All randomness flows from one numpy SeedSequence per run, split into
independent child streams (interior / boundary / test), each drawn with the
PCG64 generator.  The generator name is recorded in run manifests so point
sets are reproducible across machines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PRNG_NAME", "SampleSpec", "sample_interior", "sample_boundary", "sample_test", "report_grid", "collocation_for"]

PRNG_NAME = "numpy PCG64 (SeedSequence-split streams: interior, boundary, test)"

_STREAMS = {"interior": 0, "boundary": 1, "test": 2}


@dataclass(frozen=True)
class SampleSpec:
    seed: int
    n_interior: int
    n_boundary: int
    n_test: int
    grid_shape: tuple = None

    def __post_init__(self):
        if min(self.n_interior, self.n_boundary, self.n_test) < 1:
            raise ValueError("point counts must be >= 1")


def _rng(seed: int, stream: str) -> np.random.Generator:
    children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
    return np.random.Generator(np.random.PCG64(children[_STREAMS[stream]]))


def _open_unit(rng: np.random.Generator, shape):
    """Uniform draws in the open interval (0, 1); zeros are redrawn."""
    u = rng.random(shape)
    mask = u == 0.0
    while mask.any():
        u[mask] = rng.random(int(mask.sum()))
        mask = u == 0.0
    return u


def sample_interior(spec: SampleSpec, lo, hi) -> np.ndarray:
    """n_interior points i.i.d.-uniform, strictly inside the box."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    u = _open_unit(_rng(spec.seed, "interior"), (spec.n_interior, lo.size))
    return lo + u * (hi - lo)


def sample_test(spec: SampleSpec, lo, hi) -> np.ndarray:
    """Held-out points from an independent stream, same distribution."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    u = _open_unit(_rng(spec.seed, "test"), (spec.n_test, lo.size))
    return lo + u * (hi - lo)


def sample_boundary(spec: SampleSpec, lo, hi) -> np.ndarray:
    """1D: exactly the two endpoints.  2D: n_boundary points uniform over the
    four edges (edge chosen uniformly, position uniform along it)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size == 1:
        return np.array([[lo[0]], [hi[0]]])
    rng = _rng(spec.seed, "boundary")
    edge = rng.integers(0, 4, spec.n_boundary)
    pos = rng.random(spec.n_boundary)
    pts = np.empty((spec.n_boundary, 2))
    for k in range(spec.n_boundary):
        t0 = lo[0] + pos[k] * (hi[0] - lo[0])
        t1 = lo[1] + pos[k] * (hi[1] - lo[1])
        if edge[k] == 0:
            pts[k] = (lo[0], t1)
        elif edge[k] == 1:
            pts[k] = (hi[0], t1)
        elif edge[k] == 2:
            pts[k] = (t0, lo[1])
        else:
            pts[k] = (t0, hi[1])
    return pts


def report_grid(lo, hi, grid_shape) -> np.ndarray:
    """Uniform tensor-product grid including both endpoints on every axis."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    shape = tuple(int(k) for k in grid_shape)
    if len(shape) != lo.size or any(k < 2 for k in shape):
        raise ValueError("grid_shape needs >= 2 points per axis, one entry per axis")
    axes = [np.linspace(lo[j], hi[j], shape[j]) for j in range(lo.size)]
    if lo.size == 1:
        return axes[0][:, None]
    g = np.meshgrid(*axes, indexing="ij")
    return np.stack([a.ravel() for a in g], axis=1)


def default_grid_shape(dim: int) -> tuple:
    return (101,) if dim == 1 else (33, 33)


def collocation_for(problem, spec: SampleSpec):
    """Interior/boundary/test sets for a problem, in one call."""
    from .telegraph import CollocationSet

    lo, hi = problem.domain_lo, problem.domain_hi
    return CollocationSet(
        interior=sample_interior(spec, lo, hi),
        boundary=sample_boundary(spec, lo, hi),
        test=sample_test(spec, lo, hi),
    )
