"""Staggered-grid difference operators shared by the forward and adjoint solvers.

All three operators are length-generic: they accept fields of any length M
(with arbitrary trailing component axes) because the same stencils act on
element fields (length N) and interior-node fields (length N-1). No 1/ds
scaling is applied here; callers carry the grid spacing explicitly.
"""

import numpy as np


def dtilde(b):
    """Boundary-inclusive difference mapping M values to M+1.

    out[0] = b[0]; out[i] = b[i] - b[i-1] for 0 < i < M; out[M] = -b[-1].
    Applied to element-face loads this yields the net load on each node of a
    free-ended rod (telescoping: the output sums to zero componentwise).
    """
    b = np.asarray(b, dtype=float)
    if b.shape[0] < 1:
        raise ValueError("dtilde requires at least one entry")
    out = np.empty((b.shape[0] + 1,) + b.shape[1:], dtype=float)
    out[0] = b[0]
    out[1:-1] = b[1:] - b[:-1]
    out[-1] = -b[-1]
    return out


def dbar(b):
    """Consecutive difference mapping M values to M-1: out[l] = b[l+1] - b[l]."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] < 2:
        raise ValueError("dbar requires at least two entries")
    return b[1:] - b[:-1]


def node_diff(a):
    """Forward difference of a node field (M+1 values) onto elements (M values)."""
    a = np.asarray(a, dtype=float)
    if a.shape[0] < 2:
        raise ValueError("node_diff requires at least two entries")
    return a[1:] - a[:-1]
