"""Pure NumPy two-mode master-equation right-hand side.

``rho`` is a tensor ``rho[n1, n2, m1, m2] = <n1 n2| rho |m1 m2>``.  All ladder
operators are truncated at ``n_max`` and composed as truncated matrices, so
every term stays exactly traceless.
"""
from __future__ import annotations

import numpy as np


def _lower(r, axis, sq):
    # out[k] = sqrt(k+1) r[k+1]
    out = np.zeros_like(r)
    src = [slice(None)] * 4
    dst = [slice(None)] * 4
    src[axis] = slice(1, None)
    dst[axis] = slice(0, -1)
    shape = [1, 1, 1, 1]
    shape[axis] = -1
    out[tuple(dst)] = r[tuple(src)] * sq[1:].reshape(shape)
    return out


def _raise(r, axis, sq):
    # out[k] = sqrt(k) r[k-1]
    out = np.zeros_like(r)
    src = [slice(None)] * 4
    dst = [slice(None)] * 4
    src[axis] = slice(0, -1)
    dst[axis] = slice(1, None)
    shape = [1, 1, 1, 1]
    shape[axis] = -1
    out[tuple(dst)] = r[tuple(src)] * sq[1:].reshape(shape)
    return out


def _diag(r, axis, d):
    shape = [1, 1, 1, 1]
    shape[axis] = -1
    return r * d.reshape(shape)


def master_rhs(rho: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """``X + X^dagger`` for the tensor ``rho``.

    ``coeffs`` holds ``(c_loss1, c_gain1, c_loss2, c_gain2, e*c1, e*c2, e*c3, e*c4)``
    with ``e = exp(-i phi)`` already folded in.
    """
    cl1, cg1, cl2, cg2, k1, k2, k3, k4 = (complex(c) for c in coeffs)
    n = rho.shape[0]
    num = np.arange(n, dtype=float)
    sq = np.sqrt(num)
    edge = num + 1.0
    edge[-1] = 0.0  # truncated a a^dagger

    x = cl1 * (_lower(_lower(rho, 0, sq), 2, sq) - _diag(rho, 2, num))
    x += cg1 * (_raise(_raise(rho, 0, sq), 2, sq) - _diag(rho, 0, edge))
    x += cl2 * (_lower(_lower(rho, 1, sq), 3, sq) - _diag(rho, 1, num))
    x += cg2 * (_raise(_raise(rho, 1, sq), 3, sq) - _diag(rho, 3, edge))
    if k1 or k2 or k3 or k4:
        x += k1 * _lower(_raise(rho, 2, sq), 1, sq)   # a2 rho a1
        x -= k2 * _raise(_raise(rho, 2, sq), 3, sq)   # rho a1 a2
        x += k3 * _lower(_raise(rho, 3, sq), 0, sq)   # a1 rho a2
        x -= k4 * _lower(_lower(rho, 1, sq), 0, sq)   # a1 a2 rho
    return x + x.transpose(2, 3, 0, 1).conj()
