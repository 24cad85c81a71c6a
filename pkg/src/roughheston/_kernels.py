"""Hot loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``ROUGHHESTON_NUMBA`` is not set
to ``0``. Both paths are importable directly (``*_numpy`` / ``*_numba``) so
they can be compared in tests and benchmarks.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - optional dependency
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("ROUGHHESTON_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------- Adams scheme


def adams_numpy(c0, c1, c2, b, c, a0, diag, n):
    """Fractional Adams predictor-corrector for ``F(x) = c0 + c1 x + c2 x^2``.

    Batched over the rows of ``c0/c1/c2``. ``b``/``c`` are the predictor and
    interior-corrector difference profiles, ``a0`` the first corrector
    weights. Returns ``(h, first_bad)`` where ``first_bad[i]`` is the first
    non-finite node of row ``i`` or ``-1``.
    """
    na = c0.shape[0]
    h = np.zeros((na, n + 1), dtype=np.complex128)
    f = np.zeros((na, n + 1), dtype=np.complex128)
    f[:, 0] = c0
    first_bad = np.full(na, -1, dtype=np.int64)
    alive = np.ones(na, dtype=bool)
    for k in range(n):
        hp = f[:, : k + 1] @ b[k + 1 : 0 : -1]
        acc = a0[k] * f[:, 0]
        if k:
            acc = acc + f[:, 1 : k + 1] @ c[k:0:-1]
        hk = acc + diag * (c0 + hp * (c1 + c2 * hp))
        h[:, k + 1] = hk
        f[:, k + 1] = c0 + hk * (c1 + c2 * hk)
        finite = np.isfinite(f[:, k + 1])
        if not finite.all():
            newly = alive & ~finite
            first_bad[newly] = k + 1
            alive &= finite
            f[~alive, k + 1] = 0.0
    return h, first_bad


def _adams_loops(c0, c1, c2, b, c, a0, diag, n):
    # history stored node-major so the innermost loop runs over the batch
    na = c0.shape[0]
    f = np.zeros((n + 1, na), dtype=np.complex128)
    hist = np.zeros((n + 1, na), dtype=np.complex128)
    hp = np.zeros(na, dtype=np.complex128)
    acc = np.zeros(na, dtype=np.complex128)
    first_bad = np.full(na, -1, dtype=np.int64)
    for i in range(na):
        f[0, i] = c0[i]
    for k in range(n):
        wb = b[k + 1]
        wa = a0[k]
        for i in range(na):
            hp[i] = wb * f[0, i]
            acc[i] = wa * f[0, i]
        for j in range(1, k + 1):
            wb = b[k + 1 - j]
            wc = c[k + 1 - j]
            for i in range(na):
                v = f[j, i]
                hp[i] += wb * v
                acc[i] += wc * v
        for i in range(na):
            x = hp[i]
            hk = acc[i] + diag * (c0[i] + x * (c1[i] + c2[i] * x))
            fk = c0[i] + hk * (c1[i] + c2[i] * hk)
            hist[k + 1, i] = hk
            if np.isfinite(fk.real) and np.isfinite(fk.imag):
                f[k + 1, i] = fk
            elif first_bad[i] < 0:
                first_bad[i] = k + 1
    return hist.T.copy(), first_bad


if HAVE_NUMBA:
    adams_numba = njit(cache=True, nogil=True)(_adams_loops)
else:  # pragma: no cover
    adams_numba = None


def adams(c0, c1, c2, b, c, a0, diag, n):
    args = (
        np.ascontiguousarray(c0, dtype=np.complex128),
        np.ascontiguousarray(c1, dtype=np.complex128),
        np.ascontiguousarray(c2, dtype=np.complex128),
        np.ascontiguousarray(b, dtype=np.float64),
        np.ascontiguousarray(c, dtype=np.float64),
        np.ascontiguousarray(a0, dtype=np.float64),
        float(diag),
        int(n),
    )
    if USE_NUMBA:
        return adams_numba(*args)
    return adams_numpy(*args)
