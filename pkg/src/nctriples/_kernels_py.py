"""Pure numpy implementations of the scan kernels.

Same signatures and witness ordering as the compiled ``_kernels`` module; used
when the extension is not built or ``NCTRIPLES_PURE_PYTHON`` is set. Every
kernel works on a ball's partial multiplication table ``mul`` (``-1`` where a
product leaves the ball), its inversion permutation ``inv`` and a float64
value array ``w``. Witness searches scan in lexicographic index order.
"""

import numpy as np

NONE2 = (-1, -1)
NONE3 = (-1, -1, -1)


def translate_sup(mul, inv, w):
    """``sup_y |w[y] - w[x^-1 y]|`` for every ``x``, over ``y`` with ``x^-1 y`` in the ball."""
    n = len(w)
    out = np.zeros(n, dtype=np.float64)
    cols = np.arange(n)
    for x in range(n):
        j = mul[inv[x]]
        ok = j >= 0
        if ok.any():
            out[x] = np.max(np.abs(w[cols[ok]] - w[j[ok]]))
    return out


def _constancy(diffs, ok, tol):
    idx = np.nonzero(ok)[0]
    if len(idx) < 2:
        return -1, -1
    d = diffs[idx]
    bad = np.nonzero(np.abs(d - d[0]) > tol)[0]
    if len(bad) == 0:
        return -1, -1
    return int(idx[0]), int(idx[bad[0]])


def left_constancy_witness(mul, inv, w, tol):
    """First ``x`` for which ``y -> w[y] - w[x^-1 y]`` is not constant, with two witnesses ``y``."""
    n = len(w)
    for x in range(n):
        j = mul[inv[x]]
        ok = j >= 0
        diffs = np.where(ok, w - w[np.where(ok, j, 0)], 0.0)
        y1, y2 = _constancy(diffs, ok, tol)
        if y1 >= 0:
            return x, y1, y2
    return NONE3


def right_constancy_witness(mul, inv, w, tol):
    """First ``x`` for which ``y -> w[y] - w[y x^-1]`` is not constant."""
    n = len(w)
    for x in range(n):
        j = mul[:, inv[x]]
        ok = j >= 0
        diffs = np.where(ok, w - w[np.where(ok, j, 0)], 0.0)
        y1, y2 = _constancy(diffs, ok, tol)
        if y1 >= 0:
            return x, y1, y2
    return NONE3


def additivity_witness(mul, phi, tol):
    """First pair ``(x, y)`` with ``xy`` in the ball and ``phi[xy] != phi[x] + phi[y]``."""
    ok = mul >= 0
    lhs = phi[np.where(ok, mul, 0)]
    rhs = phi[:, None] + phi[None, :]
    bad = np.argwhere(ok & (np.abs(lhs - rhs) > tol))
    if len(bad) == 0:
        return NONE2
    return int(bad[0, 0]), int(bad[0, 1])


def first_order_witness(mul, inv, w, tol):
    """First ``(x, y, z)`` violating ``w(xzy^-1) - w(zy^-1) = w(xz) - w(z)``.

    Only triples with ``xz``, ``zy^-1`` and ``xzy^-1`` inside the ball count.
    """
    n = len(w)
    # zy[y, z] = index of z * y^-1
    zy = mul[:, inv].T
    zy_ok = zy >= 0
    for x in range(n):
        xz = mul[x]  # xz[z]
        xz_ok = xz >= 0
        # xzy[y, z] = (xz) * y^-1
        xzy = np.where(xz_ok[None, :], mul[np.where(xz_ok, xz, 0)][:, inv].T, -1)
        ok = zy_ok & xz_ok[None, :] & (xzy >= 0)
        if not ok.any():
            continue
        lhs = w[np.where(ok, xzy, 0)] - w[np.where(ok, zy, 0)]
        rhs = (w[np.where(xz_ok, xz, 0)] - w)[None, :]
        bad = np.argwhere(ok & (np.abs(lhs - rhs) > tol))
        if len(bad):
            return x, int(bad[0, 0]), int(bad[0, 1])
    return NONE3


def first_order_witness_sampled(mul, inv, w, tol, triples):
    """As :func:`first_order_witness` but only over the given ``(x, y, z)`` rows."""
    x, y, z = triples[:, 0], triples[:, 1], triples[:, 2]
    xz = mul[x, z]
    zy = mul[z, inv[y]]
    xzy = np.where(xz >= 0, mul[np.where(xz >= 0, xz, 0), inv[y]], -1)
    ok = (xz >= 0) & (zy >= 0) & (xzy >= 0)
    lhs = w[np.where(ok, xzy, 0)] - w[np.where(ok, zy, 0)]
    rhs = w[np.where(ok, xz, 0)] - w[z]
    bad = np.nonzero(ok & (np.abs(lhs - rhs) > tol))[0]
    if len(bad) == 0:
        return NONE3
    k = bad[0]
    return int(x[k]), int(y[k]), int(z[k])
