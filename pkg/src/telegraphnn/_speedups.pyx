# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled training kernels: fused jet forward/backward per collocation point.

Same math as engine_numpy, specialized to scalar loops so small networks skip
array-dispatch overhead.  Kept single threaded so reductions are ordered and
runs are reproducible.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport tanh as ctanh


cdef void _poly4(double x, long deg, double c1x, double c1c,
                 double[::1] rho, double[::1] sig, double[::1] tau,
                 double* out) noexcept:
    """Family polynomial of one degree with first three derivatives."""
    cdef double p0 = 1.0, d0 = 0.0, dd0 = 0.0, ddd0 = 0.0
    cdef double p1 = c1x * x + c1c, d1 = c1x, dd1 = 0.0, ddd1 = 0.0
    cdef double a, p, d, dd, ddd
    cdef long n
    if deg == 0:
        out[0] = 1.0; out[1] = 0.0; out[2] = 0.0; out[3] = 0.0
        return
    for n in range(2, deg + 1):
        a = rho[n] * x + sig[n]
        p = a * p1 + tau[n] * p0
        d = rho[n] * p1 + a * d1 + tau[n] * d0
        dd = 2.0 * rho[n] * d1 + a * dd1 + tau[n] * dd0
        ddd = 3.0 * rho[n] * dd1 + a * ddd1 + tau[n] * ddd0
        p0 = p1; d0 = d1; dd0 = dd1; ddd0 = ddd1
        p1 = p; d1 = d; dd1 = dd; ddd1 = ddd
    out[0] = p1; out[1] = d1; out[2] = dd1; out[3] = ddd1


cdef void _forward_jet(double[::1] theta, long[::1] widths, long nlayers,
                       long[::1] wofs, long[::1] bofs,
                       bint poly_first, long[::1] degrees,
                       double c1x, double c1c,
                       double[::1] rho, double[::1] sig, double[::1] tau,
                       double[:, ::1] x, long p, long sdir,
                       double[::1] nlo, double[::1] nscale,
                       double[:, ::1] hv, double[:, ::1] h1, double[:, ::1] h2,
                       double[:, ::1] s1, double[:, ::1] s2, double[:, ::1] s3,
                       double[:, ::1] z1, double[:, ::1] z2,
                       double* out) noexcept:
    cdef long d = x.shape[1]
    cdef long i, r, c, nin, nout, base
    cdef double accv, acc1, acc2, w, t, q1, q2, q3
    cdef double pd[4]
    for c in range(d):
        hv[0, c] = (x[p, c] - nlo[c]) * nscale[c] - 1.0
        h1[0, c] = nscale[c] if c == sdir else 0.0
        h2[0, c] = 0.0
    for i in range(nlayers):
        nin = widths[i]
        nout = widths[i + 1]
        for r in range(nout):
            accv = theta[bofs[i] + r]
            acc1 = 0.0
            acc2 = 0.0
            base = wofs[i] + r * nin
            for c in range(nin):
                w = theta[base + c]
                accv += w * hv[i, c]
                acc1 += w * h1[i, c]
                acc2 += w * h2[i, c]
            if i == nlayers - 1:
                out[0] = accv
                out[1] = acc1
                out[2] = acc2
            else:
                if i == 0 and poly_first:
                    _poly4(accv, degrees[r], c1x, c1c, rho, sig, tau, pd)
                    t = pd[0]; q1 = pd[1]; q2 = pd[2]; q3 = pd[3]
                else:
                    t = ctanh(accv)
                    q1 = 1.0 - t * t
                    q2 = -2.0 * t * q1
                    q3 = (6.0 * t * t - 2.0) * q1
                s1[i, r] = q1
                s2[i, r] = q2
                s3[i, r] = q3
                z1[i, r] = acc1
                z2[i, r] = acc2
                hv[i + 1, r] = t
                h1[i + 1, r] = q1 * acc1
                h2[i + 1, r] = q2 * acc1 * acc1 + q1 * acc2


cdef void _backward_jet(double[::1] theta, double[::1] grad,
                        long[::1] widths, long nlayers,
                        long[::1] wofs, long[::1] bofs,
                        double[:, ::1] hv, double[:, ::1] h1, double[:, ::1] h2,
                        double[:, ::1] s1, double[:, ::1] s2, double[:, ::1] s3,
                        double[:, ::1] z1, double[:, ::1] z2,
                        double av0, double a10, double a20,
                        double[::1] av, double[::1] a1, double[::1] a2,
                        double[::1] bv, double[::1] b1, double[::1] b2) noexcept:
    cdef long i, r, c, nin, nout, base
    cdef double sv, sa, sb, w, t1, t2, t3, y1, y2
    av[0] = av0
    a1[0] = a10
    a2[0] = a20
    for i in range(nlayers - 1, -1, -1):
        nin = widths[i]
        nout = widths[i + 1]
        for r in range(nout):
            grad[bofs[i] + r] += av[r]
            base = wofs[i] + r * nin
            for c in range(nin):
                grad[base + c] += av[r] * hv[i, c] + a1[r] * h1[i, c] + a2[r] * h2[i, c]
        if i == 0:
            return
        for c in range(nin):
            bv[c] = 0.0
            b1[c] = 0.0
            b2[c] = 0.0
        for r in range(nout):
            base = wofs[i] + r * nin
            sv = av[r]
            sa = a1[r]
            sb = a2[r]
            for c in range(nin):
                w = theta[base + c]
                bv[c] += w * sv
                b1[c] += w * sa
                b2[c] += w * sb
        for c in range(nin):
            t1 = s1[i - 1, c]
            t2 = s2[i - 1, c]
            t3 = s3[i - 1, c]
            y1 = z1[i - 1, c]
            y2 = z2[i - 1, c]
            av[c] = bv[c] * t1 + b1[c] * t2 * y1 + b2[c] * (t3 * y1 * y1 + t2 * y2)
            a1[c] = b1[c] * t1 + b2[c] * 2.0 * t2 * y1
            a2[c] = b2[c] * t1


cdef void _forward_value(double[::1] theta, long[::1] widths, long nlayers,
                         long[::1] wofs, long[::1] bofs,
                         bint poly_first, long[::1] degrees,
                         double c1x, double c1c,
                         double[::1] rho, double[::1] sig, double[::1] tau,
                         double[:, ::1] x, long p,
                         double[::1] nlo, double[::1] nscale,
                         double[:, ::1] hv, double[:, ::1] s1,
                         double* out) noexcept:
    cdef long d = x.shape[1]
    cdef long i, r, c, nin, nout, base
    cdef double accv, w, t
    cdef double pd[4]
    for c in range(d):
        hv[0, c] = (x[p, c] - nlo[c]) * nscale[c] - 1.0
    for i in range(nlayers):
        nin = widths[i]
        nout = widths[i + 1]
        for r in range(nout):
            accv = theta[bofs[i] + r]
            base = wofs[i] + r * nin
            for c in range(nin):
                accv += theta[base + c] * hv[i, c]
            if i == nlayers - 1:
                out[0] = accv
            else:
                if i == 0 and poly_first:
                    _poly4(accv, degrees[r], c1x, c1c, rho, sig, tau, pd)
                    t = pd[0]
                    s1[i, r] = pd[1]
                else:
                    t = ctanh(accv)
                    s1[i, r] = 1.0 - t * t
                hv[i + 1, r] = t


cdef void _backward_value(double[::1] theta, double[::1] grad,
                          long[::1] widths, long nlayers,
                          long[::1] wofs, long[::1] bofs,
                          double[:, ::1] hv, double[:, ::1] s1,
                          double av0,
                          double[::1] av, double[::1] bv) noexcept:
    cdef long i, r, c, nin, nout, base
    cdef double sv
    av[0] = av0
    for i in range(nlayers - 1, -1, -1):
        nin = widths[i]
        nout = widths[i + 1]
        for r in range(nout):
            grad[bofs[i] + r] += av[r]
            base = wofs[i] + r * nin
            for c in range(nin):
                grad[base + c] += av[r] * hv[i, c]
        if i == 0:
            return
        for c in range(nin):
            bv[c] = 0.0
        for r in range(nout):
            base = wofs[i] + r * nin
            sv = av[r]
            for c in range(nin):
                bv[c] += theta[base + c] * sv
        for c in range(nin):
            av[c] = bv[c] * s1[i - 1, c]


def _offsets(long[::1] widths):
    cdef long n = widths.shape[0] - 1
    wofs = np.zeros(n, dtype=np.int64)
    bofs = np.zeros(n, dtype=np.int64)
    cdef long i, k = 0
    for i in range(n):
        wofs[i] = k
        k += widths[i + 1] * widths[i]
        bofs[i] = k
        k += widths[i + 1]
    return wofs, bofs


def plan_loss_and_grad(double[::1] theta, long[::1] widths,
                       bint poly_first, long[::1] degrees,
                       double c1x, double c1c,
                       double[::1] rho, double[::1] sig, double[::1] tau,
                       double[::1] nlo, double[::1] nscale,
                       double[:, ::1] x_int, double[::1] const_int,
                       double c_u, double lap_coef,
                       double[:, ::1] x_bc, double[::1] bc_target, double bc_w,
                       double[::1] grad):
    """Accumulate the loss gradient into ``grad``; returns (mse_res, mse_bc)."""
    cdef long nlayers = widths.shape[0] - 1
    cdef long wm = 0
    cdef long i
    for i in range(widths.shape[0]):
        if widths[i] > wm:
            wm = widths[i]
    wofs_a, bofs_a = _offsets(widths)
    cdef long[::1] wofs = wofs_a
    cdef long[::1] bofs = bofs_a
    cdef long n_int = x_int.shape[0]
    cdef long dim = x_int.shape[1]
    cdef long n_bc = x_bc.shape[0]

    scratch = np.zeros((dim, 8, nlayers + 1, wm), dtype=float)
    cdef double[:, :, :, ::1] sc = scratch
    buf = np.zeros((6, wm), dtype=float)
    cdef double[:, ::1] bu = buf

    cdef double out[3]
    cdef double outv[2]
    cdef double uval, lap, res, rbar, mse_res = 0.0, mse_bc = 0.0, mism
    cdef long p, s

    for p in range(n_int):
        uval = 0.0
        lap = 0.0
        outv[0] = 0.0
        outv[1] = 0.0
        for s in range(dim):
            _forward_jet(theta, widths, nlayers, wofs, bofs, poly_first, degrees,
                         c1x, c1c, rho, sig, tau, x_int, p, s, nlo, nscale,
                         sc[s, 0], sc[s, 1], sc[s, 2], sc[s, 3], sc[s, 4],
                         sc[s, 5], sc[s, 6], sc[s, 7], out)
            if s == 0:
                uval = out[0]
            lap += out[2]
        res = c_u * uval + lap_coef * lap + const_int[p]
        mse_res += res * res
        rbar = (2.0 / n_int) * res
        for s in range(dim):
            _backward_jet(theta, grad, widths, nlayers, wofs, bofs,
                          sc[s, 0], sc[s, 1], sc[s, 2], sc[s, 3], sc[s, 4],
                          sc[s, 5], sc[s, 6], sc[s, 7],
                          rbar * c_u if s == 0 else 0.0, 0.0, rbar * lap_coef,
                          bu[0], bu[1], bu[2], bu[3], bu[4], bu[5])
    mse_res /= n_int

    for p in range(n_bc):
        _forward_value(theta, widths, nlayers, wofs, bofs, poly_first, degrees,
                       c1x, c1c, rho, sig, tau, x_bc, p, nlo, nscale,
                       sc[0, 0], sc[0, 3], out)
        mism = out[0] - bc_target[p]
        mse_bc += mism * mism
        _backward_value(theta, grad, widths, nlayers, wofs, bofs,
                        sc[0, 0], sc[0, 3], 2.0 * bc_w * mism, bu[0], bu[1])
    mse_bc *= bc_w
    return mse_res, mse_bc


def plan_predict(double[::1] theta, long[::1] widths,
                 bint poly_first, long[::1] degrees,
                 double c1x, double c1c,
                 double[::1] rho, double[::1] sig, double[::1] tau,
                 double[::1] nlo, double[::1] nscale,
                 double[:, ::1] x, bint want_derivs,
                 double[::1] u_out, double[::1] lap_out):
    """Batched value (and optional Laplacian) evaluation."""
    cdef long nlayers = widths.shape[0] - 1
    cdef long wm = 0
    cdef long i
    for i in range(widths.shape[0]):
        if widths[i] > wm:
            wm = widths[i]
    wofs_a, bofs_a = _offsets(widths)
    cdef long[::1] wofs = wofs_a
    cdef long[::1] bofs = bofs_a
    cdef long n = x.shape[0]
    cdef long dim = x.shape[1]
    scratch = np.zeros((8, nlayers + 1, wm), dtype=float)
    cdef double[:, :, ::1] sc = scratch
    cdef double out[3]
    cdef long p, s
    cdef double lap
    for p in range(n):
        if not want_derivs:
            _forward_value(theta, widths, nlayers, wofs, bofs, poly_first, degrees,
                           c1x, c1c, rho, sig, tau, x, p, nlo, nscale,
                           sc[0], sc[3], out)
            u_out[p] = out[0]
        else:
            lap = 0.0
            for s in range(dim):
                _forward_jet(theta, widths, nlayers, wofs, bofs, poly_first, degrees,
                             c1x, c1c, rho, sig, tau, x, p, s, nlo, nscale,
                             sc[0], sc[1], sc[2], sc[3], sc[4], sc[5], sc[6], sc[7],
                             out)
                if s == 0:
                    u_out[p] = out[0]
                lap += out[2]
            lap_out[p] = lap
