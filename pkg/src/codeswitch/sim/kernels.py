"""In-place numba kernels on flat amplitude arrays.

Qubit ``k`` of a block is bit ``k`` of the amplitude index (least significant
first). All kernels take ``complex128`` arrays.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _insert_zero(i, k):
    lo = i & ((1 << k) - 1)
    return ((i >> k) << (k + 1)) | lo


@njit(cache=True)
def apply_1q(psi, k, m00, m01, m10, m11):
    half = psi.shape[0] >> 1
    step = 1 << k
    for i in range(half):
        i0 = _insert_zero(i, k)
        i1 = i0 | step
        a = psi[i0]
        b = psi[i1]
        psi[i0] = m00 * a + m01 * b
        psi[i1] = m10 * a + m11 * b


@njit(cache=True)
def apply_phase(psi, k, phase):
    """Multiply amplitudes whose bit ``k`` is 1 by ``phase``."""
    half = psi.shape[0] >> 1
    step = 1 << k
    for i in range(half):
        psi[_insert_zero(i, k) | step] *= phase


@njit(cache=True)
def apply_x(psi, k):
    half = psi.shape[0] >> 1
    step = 1 << k
    for i in range(half):
        i0 = _insert_zero(i, k)
        i1 = i0 | step
        a = psi[i0]
        psi[i0] = psi[i1]
        psi[i1] = a


@njit(cache=True)
def apply_cnot(psi, c, t):
    quarter = psi.shape[0] >> 2
    lo = min(c, t)
    hi = max(c, t)
    cm = 1 << c
    tm = 1 << t
    for i in range(quarter):
        base = _insert_zero(_insert_zero(i, lo), hi) | cm
        j = base | tm
        a = psi[base]
        psi[base] = psi[j]
        psi[j] = a


@njit(cache=True)
def prob_one(psi, k):
    half = psi.shape[0] >> 1
    step = 1 << k
    acc = 0.0
    for i in range(half):
        a = psi[_insert_zero(i, k) | step]
        acc += a.real * a.real + a.imag * a.imag
    return acc


@njit(cache=True)
def collapse_remove(psi, k, bit, scale):
    """Project bit ``k`` onto ``bit``, drop that axis and rescale."""
    half = psi.shape[0] >> 1
    out = np.empty(half, dtype=np.complex128)
    off = bit << k
    for i in range(half):
        out[i] = psi[_insert_zero(i, k) | off] * scale
    return out


@njit(cache=True)
def norm_sq(psi):
    acc = 0.0
    for i in range(psi.shape[0]):
        a = psi[i]
        acc += a.real * a.real + a.imag * a.imag
    return acc


def warmup() -> None:
    """Trigger compilation so timing-sensitive callers do not pay for it."""
    psi = np.zeros(4, dtype=np.complex128)
    psi[0] = 1.0
    apply_1q(psi, 0, 1 + 0j, 0j, 0j, 1 + 0j)
    apply_phase(psi, 1, 1j)
    apply_x(psi, 0)
    apply_cnot(psi, 0, 1)
    p = prob_one(psi, 0)
    collapse_remove(psi, 0, 1 if p > 0.5 else 0, 1.0)
    norm_sq(psi)
