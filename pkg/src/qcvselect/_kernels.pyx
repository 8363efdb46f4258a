# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.  ``_fallback`` mirrors every function here in numpy."""

import numpy as np
from libc.math cimport exp, log, sqrt, pow


def apply_gate(double complex[::1] amps, Py_ssize_t target,
               double complex m00, double complex m01,
               double complex m10, double complex m11,
               Py_ssize_t ctrl_mask):
    """Apply [[m00, m01], [m10, m11]] to ``target`` on indices where all ``ctrl_mask`` bits are set."""
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t tbit = (<Py_ssize_t>1) << target
    cdef Py_ssize_t i, j
    cdef double complex a0, a1
    with nogil:
        for i in range(n):
            if (i & tbit) or (i & ctrl_mask) != ctrl_mask:
                continue
            j = i | tbit
            a0 = amps[i]
            a1 = amps[j]
            amps[i] = m00 * a0 + m01 * a1
            amps[j] = m10 * a0 + m11 * a1


def marginal(double complex[::1] amps, long[::1] qubits, double[::1] out):
    """Accumulate |amp|^2 into ``out``; bit t of the out index is ``qubits[t]``."""
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t m = qubits.shape[0]
    cdef Py_ssize_t i, t, key
    cdef double complex a
    with nogil:
        for i in range(out.shape[0]):
            out[i] = 0.0
        for i in range(n):
            a = amps[i]
            key = 0
            for t in range(m):
                if (i >> qubits[t]) & 1:
                    key |= (<Py_ssize_t>1) << t
            out[key] += a.real * a.real + a.imag * a.imag


def adam_epoch(double[::1] theta, double[::1] m, double[::1] v, long step,
               double[:, ::1] X, long[::1] y, long[::1] order,
               Py_ssize_t batch_size, Py_ssize_t n_hidden, Py_ssize_t n_classes,
               double lr, double beta1, double beta2, double eps, double alpha):
    """One epoch of minibatch adam on a one-hidden-layer relu/softmax net.

    ``theta`` packs W1 (H x F, row-major), b1 (H), W2 (C x H), b2 (C) and is
    updated in place together with the moment vectors ``m`` and ``v``.
    Returns ``(epoch_loss, step)`` where epoch_loss is the sample-weighted
    mean of the per-batch regularized losses.
    """
    cdef Py_ssize_t N = order.shape[0]
    cdef Py_ssize_t F = X.shape[1]
    cdef Py_ssize_t H = n_hidden
    cdef Py_ssize_t C = n_classes
    cdef Py_ssize_t P = theta.shape[0]
    cdef Py_ssize_t ob1 = H * F
    cdef Py_ssize_t oW2 = ob1 + H
    cdef Py_ssize_t ob2 = oW2 + C * H

    cdef double[::1] grad = np.zeros(P)
    cdef double[::1] hpre = np.zeros(H)
    cdef double[::1] hid = np.zeros(H)
    cdef double[::1] z = np.zeros(C)
    cdef double[::1] dz = np.zeros(C)

    cdef Py_ssize_t start, stop, bs, s, idx, j, f, c, p
    cdef double acc, zmax, lse, batch_loss, l2, inv_bs, g, mhat, vhat, bc1, bc2
    cdef double total = 0.0

    with nogil:
        start = 0
        while start < N:
            stop = start + batch_size
            if stop > N:
                stop = N
            bs = stop - start
            for p in range(P):
                grad[p] = 0.0
            batch_loss = 0.0
            for s in range(start, stop):
                idx = order[s]
                for j in range(H):
                    acc = theta[ob1 + j]
                    for f in range(F):
                        acc = acc + theta[j * F + f] * X[idx, f]
                    hpre[j] = acc
                    hid[j] = acc if acc > 0.0 else 0.0
                zmax = -1e308
                for c in range(C):
                    acc = theta[ob2 + c]
                    for j in range(H):
                        acc = acc + theta[oW2 + c * H + j] * hid[j]
                    z[c] = acc
                    if acc > zmax:
                        zmax = acc
                lse = 0.0
                for c in range(C):
                    lse = lse + exp(z[c] - zmax)
                lse = zmax + log(lse)
                batch_loss = batch_loss + lse - z[y[idx]]
                for c in range(C):
                    dz[c] = exp(z[c] - lse)
                dz[y[idx]] = dz[y[idx]] - 1.0
                for c in range(C):
                    grad[ob2 + c] += dz[c]
                    for j in range(H):
                        grad[oW2 + c * H + j] += dz[c] * hid[j]
                for j in range(H):
                    if hpre[j] <= 0.0:
                        continue
                    acc = 0.0
                    for c in range(C):
                        acc = acc + theta[oW2 + c * H + j] * dz[c]
                    grad[ob1 + j] += acc
                    for f in range(F):
                        grad[j * F + f] += acc * X[idx, f]

            inv_bs = 1.0 / bs
            l2 = 0.0
            for p in range(P):
                grad[p] = grad[p] * inv_bs
            for p in range(ob1):
                l2 = l2 + theta[p] * theta[p]
                grad[p] += alpha * theta[p]
            for p in range(oW2, ob2):
                l2 = l2 + theta[p] * theta[p]
                grad[p] += alpha * theta[p]
            batch_loss = batch_loss * inv_bs + 0.5 * alpha * l2
            total = total + batch_loss * bs

            step = step + 1
            bc1 = 1.0 - pow(beta1, <double>step)
            bc2 = 1.0 - pow(beta2, <double>step)
            for p in range(P):
                g = grad[p]
                m[p] = beta1 * m[p] + (1.0 - beta1) * g
                v[p] = beta2 * v[p] + (1.0 - beta2) * g * g
                mhat = m[p] / bc1
                vhat = v[p] / bc2
                theta[p] = theta[p] - lr * mhat / (sqrt(vhat) + eps)
            start = stop

    return total / N, step
