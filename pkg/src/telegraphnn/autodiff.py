"""Scalar automatic differentiation: second-order forward jets and a reverse tape.

Two small engines compose here.  ``Jet2`` carries (value, d/dx, d2/dx2) along
one seeded input direction through arbitrary arithmetic, which is how spatial
derivatives of the network flow into the PDE residual.  ``Var`` is a scalar
reverse-mode tape used to differentiate a loss with respect to every network
parameter.  Jet components may themselves be ``Var`` nodes, so the tape
differentiates straight through the jet channels.

The generic helpers ``tanh``/``exp``/``sin``/``cos``/``powi`` dispatch on the
operand type so the same model code runs on plain floats, jets, or tape nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Jet2",
    "Var",
    "NonFiniteLossError",
    "seed",
    "constant",
    "jet_add",
    "jet_mul",
    "jet_scale",
    "jet_tanh",
    "jet_powi",
    "tanh",
    "exp",
    "sin",
    "cos",
    "powi",
    "grad_params",
]


class NonFiniteLossError(ValueError):
    """Raised when a loss evaluation produces NaN or infinity."""


@dataclass(slots=True)
class Jet2:
    """Truncated second-order Taylor scalar along one seeded direction.

    Components are floats in normal use but may be any scalar type with
    arithmetic (e.g. ``Var``), which is what lets parameter gradients see
    through the derivative channels.
    """

    v: float
    d1: float
    d2: float

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.v + other.v, self.d1 + other.d1, self.d2 + other.d2)
        return Jet2(self.v + other, self.d1, self.d2)

    def __radd__(self, other):
        return Jet2(other + self.v, self.d1, self.d2)

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.v - other.v, self.d1 - other.d1, self.d2 - other.d2)
        return Jet2(self.v - other, self.d1, self.d2)

    def __rsub__(self, other):
        return Jet2(other - self.v, -self.d1, -self.d2)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return Jet2(
                self.v * other.v,
                self.v * other.d1 + self.d1 * other.v,
                self.v * other.d2 + 2.0 * self.d1 * other.d1 + self.d2 * other.v,
            )
        return Jet2(self.v * other, self.d1 * other, self.d2 * other)

    def __rmul__(self, other):
        return Jet2(other * self.v, other * self.d1, other * self.d2)

    def __neg__(self):
        return Jet2(-self.v, -self.d1, -self.d2)

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other._reciprocal()
        return Jet2(self.v / other, self.d1 / other, self.d2 / other)

    def __rtruediv__(self, other):
        rec = self._reciprocal()
        return Jet2(other * rec.v, other * rec.d1, other * rec.d2)

    def _reciprocal(self):
        iv = 1.0 / self.v
        iv2 = iv * iv
        return Jet2(iv, -self.d1 * iv2, (2.0 * self.d1 * self.d1 * iv - self.d2) * iv2)

    def __pow__(self, n):
        return jet_powi(self, n)


def seed(x):
    """Jet for the active input coordinate: value x, slope 1, curvature 0."""
    return Jet2(x, 1.0, 0.0)


def constant(c):
    """Jet for a quantity that does not vary along the seeded direction."""
    return Jet2(c, 0.0, 0.0)


def jet_add(a, b):
    return a + b


def jet_mul(a, b):
    return a * b


def jet_scale(a, c):
    return a * c


def jet_tanh(a):
    t = tanh(a.v)
    s1 = 1.0 - t * t
    s2 = -2.0 * t * s1
    return Jet2(t, s1 * a.d1, s2 * a.d1 * a.d1 + s1 * a.d2)


def jet_powi(a, n):
    if not isinstance(n, int):
        raise ValueError("jet_powi exponent must be an integer")
    if n < 0:
        return (1.0 / a) ** (-n) if n != -1 else a._reciprocal()
    if n == 0:
        return Jet2(a.v ** 0, 0.0, 0.0)
    if n == 1:
        return Jet2(a.v, a.d1, a.d2)
    vp = a.v ** (n - 1)
    vpp = a.v ** (n - 2)
    return Jet2(
        a.v ** n,
        n * vp * a.d1,
        n * (n - 1) * vpp * a.d1 * a.d1 + n * vp * a.d2,
    )


class Var:
    """Node of a scalar reverse-mode tape."""

    __slots__ = ("v", "grad", "_parents", "_backward")

    def __init__(self, v, parents=(), backward=None):
        self.v = v
        self.grad = 0.0
        self._parents = parents
        self._backward = backward

    def __repr__(self):
        return f"Var({self.v!r})"

    @staticmethod
    def _lift(x):
        return x if isinstance(x, Var) else Var(float(x))

    def __add__(self, other):
        if isinstance(other, Jet2):
            return NotImplemented
        other = Var._lift(other)
        out = Var(self.v + other.v, (self, other))

        def back():
            self.grad += out.grad
            other.grad += out.grad

        out._backward = back
        return out

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return NotImplemented
        return self + (-Var._lift(other))

    def __rsub__(self, other):
        return Var._lift(other) + (-self)

    def __neg__(self):
        out = Var(-self.v, (self,))

        def back():
            self.grad -= out.grad

        out._backward = back
        return out

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return NotImplemented
        other = Var._lift(other)
        out = Var(self.v * other.v, (self, other))

        def back():
            self.grad += other.v * out.grad
            other.grad += self.v * out.grad

        out._backward = back
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return NotImplemented
        other = Var._lift(other)
        out = Var(self.v / other.v, (self, other))

        def back():
            self.grad += out.grad / other.v
            other.grad -= self.v / (other.v * other.v) * out.grad

        out._backward = back
        return out

    def __rtruediv__(self, other):
        return Var._lift(other) / self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise ValueError("Var power supports integer exponents only")
        if n == 0:
            return Var(1.0)
        out = Var(self.v ** n, (self,))

        def back():
            self.grad += n * self.v ** (n - 1) * out.grad

        out._backward = back
        return out

    def tanh(self):
        t = math.tanh(self.v)
        out = Var(t, (self,))

        def back():
            self.grad += (1.0 - t * t) * out.grad

        out._backward = back
        return out

    def exp(self):
        e = math.exp(self.v)
        out = Var(e, (self,))

        def back():
            self.grad += e * out.grad

        out._backward = back
        return out

    def sin(self):
        out = Var(math.sin(self.v), (self,))
        c = math.cos(self.v)

        def back():
            self.grad += c * out.grad

        out._backward = back
        return out

    def cos(self):
        out = Var(math.cos(self.v), (self,))
        s = math.sin(self.v)

        def back():
            self.grad -= s * out.grad

        out._backward = back
        return out

    def backward(self):
        """Accumulate d(self)/d(leaf) into .grad over the whole tape."""
        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))
        self.grad = 1.0
        for node in reversed(order):
            if node._backward is not None:
                node._backward()


def tanh(x):
    if isinstance(x, Jet2):
        return jet_tanh(x)
    if isinstance(x, Var):
        return x.tanh()
    return math.tanh(x)


def exp(x):
    if isinstance(x, Jet2):
        e = exp(x.v)
        return Jet2(e, e * x.d1, e * (x.d1 * x.d1) + e * x.d2)
    if isinstance(x, Var):
        return x.exp()
    return math.exp(x)


def sin(x):
    if isinstance(x, Jet2):
        s, c = sin(x.v), cos(x.v)
        return Jet2(s, c * x.d1, -s * x.d1 * x.d1 + c * x.d2)
    if isinstance(x, Var):
        return x.sin()
    return math.sin(x)


def cos(x):
    if isinstance(x, Jet2):
        s, c = sin(x.v), cos(x.v)
        return Jet2(c, -s * x.d1, -c * x.d1 * x.d1 - s * x.d2)
    if isinstance(x, Var):
        return x.cos()
    return math.cos(x)


def powi(x, n):
    if isinstance(x, Jet2):
        return jet_powi(x, n)
    return x ** n


def grad_params(loss_eval, theta):
    """Exact gradient of a scalar loss with respect to a flat parameter vector.

    ``loss_eval`` receives a list of tape scalars standing in for ``theta``
    (reshape them with ``ParamSet.unflatten`` as needed) and must be composed
    of supported primitives; jets built on top of the tape scalars are fine.
    Returns d(loss)/d(theta) as a float array.
    """
    leaves = [Var(float(t)) for t in np.asarray(theta, dtype=float).ravel()]
    out = loss_eval(leaves)
    value = out.v if isinstance(out, Var) else float(out)
    if not math.isfinite(value):
        raise NonFiniteLossError(f"loss evaluated to {value!r}")
    if isinstance(out, Var):
        out.backward()
        return np.array([leaf.grad for leaf in leaves])
    return np.zeros(len(leaves))
