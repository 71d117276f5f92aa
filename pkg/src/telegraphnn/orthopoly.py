"""Jacobi-family orthogonal polynomials via three-term recurrences.

Evaluation is generic over the scalar type: feeding ``Jet2`` values through
``eval_jacobi`` propagates first and second derivatives exactly, which is how
the orthogonal network layer exposes its curvature to the PDE residual.
The quadrature helpers exist to measure orthogonality defects in tests; they
are not on any training path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

__all__ = [
    "PolyFamily",
    "legendre",
    "chebyshev1",
    "jacobi",
    "recurrence_coeffs",
    "eval_jacobi",
    "eval_basis",
    "weight_fn",
    "gauss_rule",
    "orthogonality_defect",
]

_KINDS = ("jacobi", "legendre", "chebyshev1")


@dataclass(frozen=True)
class PolyFamily:
    """Which orthogonal family the first network layer uses.

    ``legendre`` is the alpha = beta = 0 Jacobi family; ``chebyshev1`` is the
    alpha = beta = -1/2 family up to its standardization T_n(1) = 1.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown polynomial family {self.kind!r}")
        if self.kind == "jacobi" and (self.alpha <= -1.0 or self.beta <= -1.0):
            raise ValueError("jacobi parameters must satisfy alpha > -1 and beta > -1")

    def label(self) -> str:
        if self.kind == "jacobi":
            return f"jacobi:{self.alpha:g}:{self.beta:g}"
        return self.kind

    @staticmethod
    def parse(text: str) -> "PolyFamily":
        """Parse 'legendre', 'chebyshev1', or 'jacobi:A:B'."""
        parts = text.strip().split(":")
        if parts[0] == "jacobi":
            if len(parts) != 3:
                raise ValueError("jacobi family must be written jacobi:ALPHA:BETA")
            return PolyFamily("jacobi", float(parts[1]), float(parts[2]))
        if len(parts) != 1:
            raise ValueError(f"unexpected family parameters in {text!r}")
        return PolyFamily(parts[0])


def legendre() -> PolyFamily:
    return PolyFamily("legendre")


def chebyshev1() -> PolyFamily:
    return PolyFamily("chebyshev1")


def jacobi(alpha: float, beta: float) -> PolyFamily:
    return PolyFamily("jacobi", alpha, beta)


def recurrence_coeffs(family: PolyFamily, max_degree: int):
    """Coefficients (c1x, c1c, rho, sig, tau) for P_n = (rho_n x + sig_n) P_{n-1} + tau_n P_{n-2}.

    ``c1x``/``c1c`` define the degree-1 polynomial; rho/sig/tau are indexed by
    degree and populated for n >= 2.  Shared by the scalar evaluator and both
    training backends so every code path runs the identical recurrence.
    """
    n = np.arange(max_degree + 1, dtype=float)
    rho = np.zeros(max_degree + 1)
    sig = np.zeros(max_degree + 1)
    tau = np.zeros(max_degree + 1)
    if family.kind == "legendre":
        c1x, c1c = 1.0, 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            rho[2:] = (2.0 * n[2:] - 1.0) / n[2:]
            tau[2:] = -(n[2:] - 1.0) / n[2:]
    elif family.kind == "chebyshev1":
        c1x, c1c = 1.0, 0.0
        rho[2:] = 2.0
        tau[2:] = -1.0
    else:
        a, b = family.alpha, family.beta
        c1x, c1c = 0.5 * (a + b + 2.0), 0.5 * (a - b)
        m = n[2:]
        s = a + b
        rho[2:] = (2.0 * m + s) * (2.0 * m + s - 1.0) / (2.0 * m * (m + s))
        sig[2:] = (a * a - b * b) * (2.0 * m + s - 1.0) / (
            2.0 * m * (m + s) * (2.0 * m + s - 2.0)
        )
        tau[2:] = -(m + a - 1.0) * (m + b - 1.0) * (2.0 * m + s) / (
            m * (m + s) * (2.0 * m + s - 2.0)
        )
    return c1x, c1c, rho, sig, tau


def eval_jacobi(family: PolyFamily, n: int, x):
    """Evaluate the degree-n family polynomial at x (scalar, Jet2, or Var).

    Defined on all of R; orthogonality only holds on [-1, 1] but the network
    feeds unbounded pre-activations through here.
    """
    if n < 0:
        raise ValueError("polynomial degree must be >= 0")
    if n == 0:
        return 1.0
    c1x, c1c, rho, sig, tau = recurrence_coeffs(family, n)
    p_prev = 1.0
    p = x * c1x + c1c
    for k in range(2, n + 1):
        p, p_prev = (x * rho[k] + sig[k]) * p + p_prev * tau[k], p
    return p


def eval_basis(family: PolyFamily, degrees, x):
    """Evaluate several degrees at one x, sharing a single recurrence sweep."""
    degrees = list(degrees)
    if not degrees:
        raise ValueError("degrees must be non-empty")
    if any(d < 0 for d in degrees):
        raise ValueError("polynomial degree must be >= 0")
    top = max(degrees)
    c1x, c1c, rho, sig, tau = recurrence_coeffs(family, top)
    table = [1.0]
    if top >= 1:
        table.append(x * c1x + c1c)
    for k in range(2, top + 1):
        table.append((x * rho[k] + sig[k]) * table[k - 1] + table[k - 2] * tau[k])
    return [table[d] for d in degrees]


def weight_fn(family: PolyFamily, x: float) -> float:
    """Orthogonality weight on the open interval (-1, 1)."""
    if not -1.0 < x < 1.0:
        raise ValueError("weight function is defined for -1 < x < 1")
    if family.kind == "legendre":
        return 1.0
    if family.kind == "chebyshev1":
        return 1.0 / np.sqrt(1.0 - x * x)
    return (1.0 - x) ** family.alpha * (1.0 + x) ** family.beta


def gauss_rule(family: PolyFamily, order: int):
    """Nodes/weights integrating f(x) * weight(x) over (-1, 1) exactly for
    polynomial f up to degree 2*order - 1.

    Chebyshev uses the cosine-substitution rule (nodes cos theta_k, equal
    weights pi/order), which absorbs the endpoint-singular weight; Jacobi uses
    Gauss-Jacobi nodes for the same reason.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    if family.kind == "legendre":
        return np.polynomial.legendre.leggauss(order)
    if family.kind == "chebyshev1":
        k = np.arange(1, order + 1)
        nodes = np.cos((2.0 * k - 1.0) * np.pi / (2.0 * order))
        return nodes, np.full(order, np.pi / order)
    return roots_jacobi(order, family.alpha, family.beta)


def orthogonality_defect(family: PolyFamily, n: int, m: int, quadrature_order: int) -> float:
    """|integral of P_n P_m weight| for n != m; test oracle only."""
    if n == m:
        raise ValueError("orthogonality defect requires distinct degrees")
    x, w = gauss_rule(family, quadrature_order)
    pn = np.array([eval_jacobi(family, n, xi) for xi in x])
    pm = np.array([eval_jacobi(family, m, xi) for xi in x])
    return abs(float(np.sum(w * pn * pm)))
