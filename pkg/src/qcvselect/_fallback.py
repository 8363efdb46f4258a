"""Pure-numpy versions of the routines in ``_kernels.pyx``.

Signatures and in-place semantics match the compiled module exactly, so the
two are interchangeable behind :mod:`qcvselect._backend`.
"""

import numpy as np


def apply_gate(amps, target, m00, m01, m10, m11, ctrl_mask):
    n = amps.shape[0]
    tbit = 1 << target
    idx = np.arange(n)
    sel = idx[((idx & tbit) == 0) & ((idx & ctrl_mask) == ctrl_mask)]
    a0 = amps[sel]
    a1 = amps[sel | tbit]
    amps[sel] = m00 * a0 + m01 * a1
    amps[sel | tbit] = m10 * a0 + m11 * a1


def marginal(amps, qubits, out):
    idx = np.arange(amps.shape[0])
    key = np.zeros_like(idx)
    for t, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << t
    out[:] = np.bincount(key, weights=np.abs(amps) ** 2, minlength=out.shape[0])


def _unpack(theta, n_features, n_hidden, n_classes):
    F, H, C = n_features, n_hidden, n_classes
    W1 = theta[: H * F].reshape(H, F)
    b1 = theta[H * F : H * F + H]
    W2 = theta[H * F + H : H * F + H + C * H].reshape(C, H)
    b2 = theta[H * F + H + C * H :]
    return W1, b1, W2, b2


def loss_and_grad(theta, X, y, n_hidden, n_classes, alpha):
    """Regularized mean cross-entropy and its gradient w.r.t. packed ``theta``."""
    W1, b1, W2, b2 = _unpack(theta, X.shape[1], n_hidden, n_classes)
    n = X.shape[0]
    hpre = X @ W1.T + b1
    hid = np.maximum(hpre, 0.0)
    z = hid @ W2.T + b2
    zmax = z.max(axis=1, keepdims=True)
    lse = zmax + np.log(np.exp(z - zmax).sum(axis=1, keepdims=True))
    rows = np.arange(n)
    ce = (lse[:, 0] - z[rows, y]).sum() / n
    l2 = (W1 * W1).sum() + (W2 * W2).sum()
    loss = ce + 0.5 * alpha * l2

    dz = np.exp(z - lse)
    dz[rows, y] -= 1.0
    dz /= n
    gW2 = dz.T @ hid + alpha * W2
    gb2 = dz.sum(axis=0)
    dh = (dz @ W2) * (hpre > 0.0)
    gW1 = dh.T @ X + alpha * W1
    gb1 = dh.sum(axis=0)
    return loss, np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2])


def adam_step(theta, grad, m, v, step, lr, beta1, beta2, eps):
    """Bias-corrected adam update of ``theta``, ``m``, ``v`` in place; returns the new step count."""
    step += 1
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    mhat = m / (1.0 - beta1**step)
    vhat = v / (1.0 - beta2**step)
    theta -= lr * mhat / (np.sqrt(vhat) + eps)
    return step


def adam_epoch(theta, m, v, step, X, y, order, batch_size, n_hidden, n_classes,
               lr, beta1, beta2, eps, alpha):
    N = order.shape[0]
    total = 0.0
    for start in range(0, N, batch_size):
        batch = order[start : start + batch_size]
        loss, g = loss_and_grad(theta, X[batch], y[batch], n_hidden, n_classes, alpha)
        total += loss * batch.shape[0]
        step = adam_step(theta, g, m, v, step, lr, beta1, beta2, eps)
    return total / N, step
