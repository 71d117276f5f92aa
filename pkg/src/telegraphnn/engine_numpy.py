"""Vectorized training kernels (pure numpy fallback backend).

Forward passes propagate three channels per neuron — value, d/dx_s, d2/dx_s2
along one seeded input coordinate — and the backward pass differentiates the
scalar loss through all three channels, so parameter gradients account for how
the predicted Laplacian moves with the weights.

Chain rule used throughout, for h = act(z) with jet channels (v, d1, d2):

    h.v  = act(z.v)
    h.d1 = act'(z.v) z.d1
    h.d2 = act''(z.v) z.d1^2 + act'(z.v) z.d2

and its adjoint transpose (needs act''' at hidden layers).
"""

from __future__ import annotations

import numpy as np

__all__ = ["net_forward_value", "net_forward_jet", "predict", "loss_and_grad"]


def _tanh_derivs(zv):
    t = np.tanh(zv)
    s1 = 1.0 - t * t
    s2 = -2.0 * t * s1
    s3 = (6.0 * t * t - 2.0) * s1
    return t, s1, s2, s3


def _poly_derivs(zv, spec):
    """Per-column polynomial value and first three derivatives.

    Column k of ``zv`` gets the family polynomial of degree ``spec.degrees[k]``;
    one recurrence sweep up to the max degree serves every column.
    """
    deg = spec.degrees
    top = int(deg.max())
    val = np.empty_like(zv)
    d1 = np.empty_like(zv)
    d2 = np.empty_like(zv)
    d3 = np.empty_like(zv)
    ones = np.ones_like(zv)
    zeros = np.zeros_like(zv)
    p_m2, dp_m2, ddp_m2, dddp_m2 = ones, zeros, zeros, zeros
    p_m1 = spec.c1x * zv + spec.c1c
    dp_m1 = np.full_like(zv, spec.c1x)
    ddp_m1 = zeros
    dddp_m1 = zeros
    for n, (p, dp, ddp, dddp) in ((0, (p_m2, dp_m2, ddp_m2, dddp_m2)),
                                  (1, (p_m1, dp_m1, ddp_m1, dddp_m1))):
        hit = deg == n
        if hit.any():
            val[:, hit] = p[:, hit]
            d1[:, hit] = dp[:, hit]
            d2[:, hit] = ddp[:, hit]
            d3[:, hit] = dddp[:, hit]
    for n in range(2, top + 1):
        a = spec.rho[n] * zv + spec.sig[n]
        p = a * p_m1 + spec.tau[n] * p_m2
        dp = spec.rho[n] * p_m1 + a * dp_m1 + spec.tau[n] * dp_m2
        ddp = 2.0 * spec.rho[n] * dp_m1 + a * ddp_m1 + spec.tau[n] * ddp_m2
        dddp = 3.0 * spec.rho[n] * ddp_m1 + a * dddp_m1 + spec.tau[n] * dddp_m2
        hit = deg == n
        if hit.any():
            val[:, hit] = p[:, hit]
            d1[:, hit] = dp[:, hit]
            d2[:, hit] = ddp[:, hit]
            d3[:, hit] = dddp[:, hit]
        p_m2, dp_m2, ddp_m2, dddp_m2 = p_m1, dp_m1, ddp_m1, dddp_m1
        p_m1, dp_m1, ddp_m1, dddp_m1 = p, dp, ddp, dddp
    return val, d1, d2, d3


def _activation(layer_idx, zv, spec):
    if layer_idx == 0 and spec.poly_first:
        return _poly_derivs(zv, spec)
    return _tanh_derivs(zv)


def net_forward_value(spec, weights, x):
    """Value-only batched forward; returns (outputs, stack for backward)."""
    hv = (x - spec.nlo) * spec.nscale - 1.0
    stack = []
    n = len(weights)
    for i, (w, b) in enumerate(weights):
        zv = hv @ w.T + b
        if i == n - 1:
            stack.append((hv, None))
            return zv[:, 0], stack
        act, s1, _, _ = _activation(i, zv, spec)
        stack.append((hv, s1))
        hv = act


def net_forward_jet(spec, weights, x, seed_dir):
    """Three-channel batched forward seeded along one input coordinate.

    Returns (value, d1, d2) of the scalar output plus the stored stack
    needed by ``_backward_jet``.
    """
    p = x.shape[0]
    hv = (x - spec.nlo) * spec.nscale - 1.0
    h1 = np.zeros_like(hv)
    h1[:, seed_dir] = spec.nscale[seed_dir]
    h2 = np.zeros_like(hv)
    stack = []
    n = len(weights)
    for i, (w, b) in enumerate(weights):
        zv = hv @ w.T + b
        z1 = h1 @ w.T
        z2 = h2 @ w.T
        if i == n - 1:
            stack.append(((hv, h1, h2), None))
            return (zv[:, 0], z1[:, 0], z2[:, 0]), stack
        act, s1, s2, s3 = _activation(i, zv, spec)
        stack.append(((hv, h1, h2), (s1, s2, s3, z1, z2)))
        hv = act
        h1 = s1 * z1
        h2 = s2 * z1 * z1 + s1 * z2


def _backward_value(spec, weights, stack, av, grads):
    azv = av[:, None]
    for i in range(len(weights) - 1, -1, -1):
        w, _ = weights[i]
        hv, _ = stack[i]
        gw, gb = grads[i]
        gw += azv.T @ hv
        gb += azv.sum(axis=0)
        if i == 0:
            return
        bv = azv @ w
        s1 = stack[i - 1][1]
        azv = bv * s1


def _backward_jet(spec, weights, stack, av, a1, a2, grads):
    azv = av[:, None]
    az1 = a1[:, None]
    az2 = a2[:, None]
    for i in range(len(weights) - 1, -1, -1):
        w, _ = weights[i]
        (hv, h1, h2), _ = stack[i]
        gw, gb = grads[i]
        gw += azv.T @ hv + az1.T @ h1 + az2.T @ h2
        gb += azv.sum(axis=0)
        if i == 0:
            return
        bv = azv @ w
        b1 = az1 @ w
        b2 = az2 @ w
        s1, s2, s3, z1, z2 = stack[i - 1][1]
        azv = bv * s1 + b1 * s2 * z1 + b2 * (s3 * z1 * z1 + s2 * z2)
        az1 = b1 * s1 + b2 * 2.0 * s2 * z1
        az2 = b2 * s1


def _split_theta(spec, theta):
    weights = []
    k = 0
    for i in range(len(spec.widths) - 1):
        wr, wc = spec.widths[i + 1], spec.widths[i]
        w = theta[k : k + wr * wc].reshape(wr, wc)
        k += wr * wc
        b = theta[k : k + wr]
        k += wr
        weights.append((w, b))
    return weights


def predict(spec, theta, x, want_derivs=False):
    """Batched prediction; optionally also the exact Laplacian per point."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    weights = _split_theta(spec, np.asarray(theta, dtype=float))
    if not want_derivs:
        u, _ = net_forward_value(spec, weights, x)
        return u
    lap = np.zeros(x.shape[0])
    u = None
    for s in range(x.shape[1]):
        (val, _, d2), _ = net_forward_jet(spec, weights, x, s)
        if s == 0:
            u = val
        lap += d2
    return u, lap


def loss_and_grad(plan, theta):
    """Residual + boundary loss and its full parameter gradient.

    Returns (mse_res, mse_bc, grad).
    """
    theta = np.asarray(theta, dtype=float)
    weights = _split_theta(plan, theta)
    grads = [(np.zeros_like(w), np.zeros_like(b)) for w, b in weights]

    n_int, dim = plan.x_int.shape
    passes = []
    u = None
    lap = np.zeros(n_int)
    for s in range(dim):
        (val, _, d2), stack = net_forward_jet(plan, weights, plan.x_int, s)
        passes.append(stack)
        if s == 0:
            u = val
        lap += d2
    res = plan.c_u * u + plan.lap_coef * lap + plan.const_int
    mse_res = float(np.mean(res * res))
    rbar = (2.0 / n_int) * res
    for s, stack in enumerate(passes):
        av = rbar * plan.c_u if s == 0 else np.zeros(n_int)
        a2 = rbar * plan.lap_coef
        _backward_jet(plan, weights, stack, av, np.zeros(n_int), a2, grads)

    ub, stack_b = net_forward_value(plan, weights, plan.x_bc)
    mism = ub - plan.bc_target
    mse_bc = float(plan.bc_w * np.sum(mism * mism))
    _backward_value(plan, weights, stack_b, 2.0 * plan.bc_w * mism, grads)

    grad = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])
    return mse_res, mse_bc, grad
