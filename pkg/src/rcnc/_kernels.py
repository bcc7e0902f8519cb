"""Hot loops, compiled with numba when available.

Every kernel is written against numpy arrays so the undecorated function is
a working fallback.  Set ``RCNC_DISABLE_NUMBA=1`` to force the fallback;
both paths consume identical inputs and return identical results.
"""

import os

import numpy as np

_disabled = os.environ.get("RCNC_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    from numba import njit

    USE_NUMBA = True
except ImportError:
    USE_NUMBA = False


def _kernel(fn):
    if USE_NUMBA:
        return njit(cache=True, nogil=True)(fn)
    return fn


BACKEND = "numba" if USE_NUMBA else "numpy"


@_kernel
def xor_combine(segments, coefficients, out):
    """out = XOR of the rows of ``segments`` selected by ``coefficients``."""
    out[:] = 0
    for j in range(coefficients.shape[0]):
        if coefficients[j]:
            out ^= segments[j]
    return out


@_kernel
def reduce_against(coef_rows, pay_rows, pivot_row, vec, pay):
    """Reduce ``vec``/``pay`` in place against the stored echelon rows.

    Stored row ``pivot_row[j]`` has its lowest set bit at column ``j``, so a
    single ascending sweep clears every column that already has a pivot.
    Returns the first column left without a pivot, or -1 if ``vec`` reduced
    to zero.
    """
    for j in range(vec.shape[0]):
        if vec[j]:
            r = pivot_row[j]
            if r < 0:
                return j
            vec ^= coef_rows[r]
            pay ^= pay_rows[r]
    return -1


@_kernel
def back_substitute(coef_rows, pay_rows, pivot_row):
    """Turn a full-rank echelon system into reduced form, in place."""
    k = pivot_row.shape[0]
    for j in range(k - 1, -1, -1):
        r = pivot_row[j]
        for c in range(j + 1, k):
            if coef_rows[r, c]:
                s = pivot_row[c]
                coef_rows[r] ^= coef_rows[s]
                pay_rows[r] ^= pay_rows[s]


# state slots for arq_chain
ARQ_DONE = 0
ARQ_CW = 1
ARQ_DATA_TX = 2
ARQ_RETX = 3
ARQ_SLOTS = 4
ARQ_ACKS = 5
ARQ_POS = 6
ARQ_STATE_SIZE = 7


@_kernel
def arq_chain(uniforms, p, cw_min, cw_max, n_packets, state):
    """Stop-and-wait ARQ with binary exponential backoff.

    Each attempt consumes two uniforms: one for delivery (``u < p``) and one
    for the backoff slot count ``floor(u * CW)`` used only on loss.  Runs
    until ``n_packets`` are acknowledged or fewer than two uniforms remain;
    progress lives in ``state`` so the caller can refill and resume.
    """
    pos = state[ARQ_POS]
    n = uniforms.shape[0]
    while state[ARQ_DONE] < n_packets and pos + 2 <= n:
        delivered = uniforms[pos] < p
        u_slot = uniforms[pos + 1]
        pos += 2
        state[ARQ_DATA_TX] += 1
        if delivered:
            state[ARQ_ACKS] += 1
            state[ARQ_DONE] += 1
            state[ARQ_CW] = cw_min
        else:
            cw = state[ARQ_CW]
            state[ARQ_SLOTS] += int(u_slot * cw)
            state[ARQ_RETX] += 1
            state[ARQ_CW] = min(2 * cw, cw_max)
    state[ARQ_POS] = pos
    return state
