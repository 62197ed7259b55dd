"""Pure-numpy band kernels; same API as the compiled module.

Vectorized over rows: the loops below run over offsets only, so the cost
is (2p+1) passes of length-n array arithmetic.
"""

from __future__ import annotations

import numpy as np


def _shift_rows(B: np.ndarray, e: int, periodic: bool) -> np.ndarray:
    """Rows of B shifted so row i holds B[i+e]; zero-filled if non-periodic."""
    if e == 0:
        return B
    if periodic:
        return np.roll(B, -e, axis=0)
    out = np.zeros_like(B)
    if e > 0:
        out[:-e] = B[e:]
    else:
        out[-e:] = B[:e]
    return out


def band_mul(A: np.ndarray, p: int, B: np.ndarray, b: int, periodic: bool):
    n = A.shape[0]
    q = p + b
    C = np.zeros((n, 2 * q + 1), dtype=np.complex128)
    for e in range(-p, p + 1):
        col = A[:, p + e]
        if not col.any():
            continue
        C[:, q + e - b:q + e + b + 1] += col[:, None] * _shift_rows(B, e, periodic)
    return C, q


def band_diag_inner(A: np.ndarray, p: int, B: np.ndarray, b: int,
                    periodic: bool) -> complex:
    acc = 0.0 + 0.0j
    for e in range(-min(p, b), min(p, b) + 1):
        acc += np.sum(A[:, p + e] * _shift_rows(B[:, b - e], e, periodic))
    return complex(acc)


def band_matvec(A: np.ndarray, p: int, v: np.ndarray,
                periodic: bool) -> np.ndarray:
    y = np.zeros(A.shape[0], dtype=np.complex128)
    for d in range(-p, p + 1):
        y += A[:, p + d] * _shift_rows(v, d, periodic)
    return y
