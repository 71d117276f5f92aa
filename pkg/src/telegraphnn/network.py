"""Dense network with an orthogonal-polynomial first hidden layer.

``forward`` here is the scalar reference path: it runs on plain floats, on
``Jet2`` (for exact spatial derivatives), and on tape scalars (for gradient
oracles).  Training uses the vectorized engine, which is tested against this
implementation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff
from .autodiff import Jet2
from .orthopoly import PolyFamily, eval_jacobi

__all__ = ["Architecture", "ParamSet", "normalize_input", "forward", "init_params"]


@dataclass(frozen=True)
class Architecture:
    """Layer widths [I, J, F1, ..., Fn], activation family, and input bounds.

    ``poly_first=False`` swaps the orthogonal layer for tanh, giving the
    plain-DNN comparison twin with identical shapes and initialization.
    """

    widths: tuple
    family: PolyFamily
    domain_lo: tuple
    domain_hi: tuple
    degrees: tuple = field(default=())
    poly_first: bool = True

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        object.__setattr__(self, "widths", widths)
        if len(widths) < 3:
            raise ValueError("need at least input, one hidden, and output layer")
        if widths[0] not in (1, 2):
            raise ValueError("input dimension must be 1 or 2")
        if widths[-1] != 1:
            raise ValueError("output layer must be scalar")
        if any(w < 1 for w in widths):
            raise ValueError("layer widths must be positive")
        degrees = tuple(int(d) for d in self.degrees)
        if not degrees:
            degrees = tuple(range(1, widths[1] + 1))
        object.__setattr__(self, "degrees", degrees)
        if len(degrees) != widths[1]:
            raise ValueError("need one activation degree per first-layer neuron")
        if any(d < 0 for d in degrees):
            raise ValueError("activation degrees must be >= 0")
        lo = tuple(float(v) for v in self.domain_lo)
        hi = tuple(float(v) for v in self.domain_hi)
        object.__setattr__(self, "domain_lo", lo)
        object.__setattr__(self, "domain_hi", hi)
        if len(lo) != widths[0] or len(hi) != widths[0]:
            raise ValueError("domain bounds must match the input dimension")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("domain_lo must be strictly below domain_hi")

    @property
    def dim(self) -> int:
        return self.widths[0]

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1

    def layer_shapes(self):
        return [
            ((self.widths[i + 1], self.widths[i]), (self.widths[i + 1],))
            for i in range(self.n_layers)
        ]

    @property
    def n_params(self) -> int:
        return sum(w[0] * w[1] + b[0] for w, b in self.layer_shapes())

    def tanh_twin(self) -> "Architecture":
        """Same shapes and init stream, tanh in place of the orthogonal layer."""
        return replace(self, poly_first=False)


class ParamSet:
    """Per-layer weight matrices and bias vectors.

    Flattening order is layer-major: for each layer, the weight matrix in
    row-major order followed by the bias vector.  ``unflatten`` accepts any
    scalar sequence (including tape nodes), so the same layout serves
    checkpoints and gradient oracles.
    """

    def __init__(self, layers):
        self.layers = list(layers)

    def flatten(self) -> np.ndarray:
        parts = []
        for w, b in self.layers:
            parts.append(np.asarray(w).ravel())
            parts.append(np.asarray(b).ravel())
        return np.concatenate(parts)

    @classmethod
    def unflatten(cls, arch: Architecture, flat) -> "ParamSet":
        flat = np.asarray(flat)
        if flat.size != arch.n_params:
            raise ValueError(f"expected {arch.n_params} parameters, got {flat.size}")
        layers = []
        k = 0
        for (wr, wc), (bn,) in arch.layer_shapes():
            w = flat[k : k + wr * wc].reshape(wr, wc)
            k += wr * wc
            b = flat[k : k + bn]
            k += bn
            layers.append((w, b))
        return cls(layers)

    def save_text(self, path):
        np.savetxt(path, self.flatten(), fmt="%.17g")

    @classmethod
    def load_text(cls, arch: Architecture, path) -> "ParamSet":
        return cls.unflatten(arch, np.loadtxt(path, dtype=float))


def normalize_input(x, arch: Architecture, seed_dir=None):
    """Map a point into [-1, 1]^d; the seeded coordinate becomes a Jet2.

    Values outside the bounds extrapolate linearly.  The affine slope
    2/(hi - lo) enters the jet's d1 so downstream derivatives are taken with
    respect to the original coordinate.
    """
    out = []
    for j in range(arch.dim):
        scale = 2.0 / (arch.domain_hi[j] - arch.domain_lo[j])
        val = (x[j] - arch.domain_lo[j]) * scale - 1.0
        if seed_dir is None:
            out.append(val)
        elif j == seed_dir:
            out.append(Jet2(val, scale, 0.0))
        else:
            out.append(Jet2(val, 0.0, 0.0))
    return out


def forward(arch: Architecture, theta: ParamSet, x, seed_dir=None):
    """Network output at x; a Jet2 when seed_dir selects an input coordinate.

    Layer stack: orthogonal (or tanh) first hidden layer, tanh hidden layers,
    affine scalar output.  Seeding never perturbs the value channel.
    """
    h = normalize_input(x, arch, seed_dir)
    n = arch.n_layers
    for i, (w, b) in enumerate(theta.layers):
        z = [sum(w[r][c] * h[c] for c in range(len(h))) + b[r] for r in range(len(b))]
        if i == n - 1:
            return z[0]
        if i == 0 and arch.poly_first:
            h = [eval_jacobi(arch.family, arch.degrees[r], z[r]) for r in range(len(z))]
        else:
            h = [autodiff.tanh(zr) for zr in z]


def init_params(arch: Architecture, seed: int) -> ParamSet:
    """Glorot-uniform weights, zero biases, deterministic in the seed (PCG64)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    layers = []
    for (wr, wc), (bn,) in arch.layer_shapes():
        limit = np.sqrt(6.0 / (wr + wc))
        layers.append((rng.uniform(-limit, limit, size=(wr, wc)), np.zeros(bn)))
    return ParamSet(layers)
