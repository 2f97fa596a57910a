"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imports; set ``PLANCK_LAB_PURE=1``
to force the numpy implementation.  Both expose the same functions.
"""
import functools
import math
import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("PLANCK_LAB_PURE", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

BACKENDS = {"python": _pykernels}
if BACKEND == "cython":
    BACKENDS["cython"] = _impl


@functools.lru_cache(maxsize=64)
def legendre_tables(ell: int):
    """Start values and three-term coefficients of orthonormal associated Legendre functions.

    ``log_c[m]`` is the log of ``P(m, m) / sin(theta)**m``; ``rec_a``/``rec_b``
    advance ``P(l, m) = a x P(l-1, m) - b P(l-2, m)``.
    """
    m = np.arange(ell + 1, dtype=float)
    acc = np.concatenate([[0.0], np.cumsum(np.log((2 * m[1:] - 1) / (2 * m[1:])))])
    log_c = 0.5 * (np.log((2 * m + 1) / (4 * math.pi)) + acc)
    rec_a = np.zeros((ell + 1, ell + 1))
    rec_b = np.zeros((ell + 1, ell + 1))
    for l in range(2, ell + 1):
        mm = m[: l - 1]
        den = l * l - mm * mm
        rec_a[l, : l - 1] = np.sqrt((4.0 * l * l - 1) / den)
        rec_b[l, : l - 1] = np.sqrt((2.0 * l + 1) * ((l - 1) ** 2 - mm * mm) / ((2.0 * l - 3) * den))
    for arr in (log_c, rec_a, rec_b):
        arr.setflags(write=False)
    return log_c, rec_a, rec_b


def sphere_mode(ell, ccos, csin, theta, phi, backend=None):
    impl = _impl if backend is None else BACKENDS[backend]
    log_c, rec_a, rec_b = legendre_tables(int(ell))
    theta = np.asarray(theta, dtype=float)
    shape = theta.shape
    u, gt, gp = impl.sphere_mode(int(ell), np.ascontiguousarray(ccos, dtype=float),
                                 np.ascontiguousarray(csin, dtype=float),
                                 theta.ravel(), np.asarray(phi, dtype=float).ravel(),
                                 log_c, rec_a, rec_b)
    return u.reshape(shape), gt.reshape(shape), gp.reshape(shape)


def greedy_pack(cands, kind, min_sep, backend=None):
    impl = _impl if backend is None else BACKENDS[backend]
    return impl.greedy_pack(np.ascontiguousarray(cands, dtype=float), int(kind), float(min_sep))
