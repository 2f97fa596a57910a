"""Pure numpy implementations of the hot kernels (reference and fallback)."""
import math

import numpy as np

TWO_PI = 2.0 * math.pi
RESCALE = 1e200
LOG_RESCALE = math.log(RESCALE)


def sphere_mode(ell, ccos, csin, theta, phi, log_c, rec_a, rec_b):
    """Real spherical-harmonic combination of degree ``ell`` and its gradient.

    ``ccos[m]`` and ``csin[m]`` multiply ``P(ell, m) * sqrt(2) cos(m phi)`` and
    ``P(ell, m) * sqrt(2) sin(m phi)`` (``ccos[0]`` multiplies ``P(ell, 0)``),
    where ``P`` is the orthonormal associated Legendre function.  Returns
    ``(u, du/dtheta, du/dphi / sin(theta))``.
    """
    theta = np.ascontiguousarray(theta, dtype=float)
    phi = np.ascontiguousarray(phi, dtype=float)
    x = np.cos(theta)
    s = np.sin(theta)
    nz = np.flatnonzero((ccos != 0.0) | (csin != 0.0))
    n = theta.size
    u = np.zeros(n)
    gth = np.zeros(n)
    gph = np.zeros(n)
    if nz.size == 0:
        return u, gth, gph
    mmax = int(nz[-1])
    mtop = min(ell, mmax + 1)
    with np.errstate(divide="ignore"):
        logs = np.log(s)
    P = np.zeros((mtop + 2, n))
    Q = np.zeros((mtop + 2, n))
    for m in range(mtop + 1):
        p_prev = np.zeros(n)
        p = np.ones(n)
        scale = np.full(n, log_c[m])
        if ell > m:
            p_prev, p = p, math.sqrt(2 * m + 3) * x
            for l in range(m + 2, ell + 1):
                p_prev, p = p, rec_a[l, m] * x * p - rec_b[l, m] * p_prev
                big = np.abs(p) > RESCALE
                if big.any():
                    p[big] /= RESCALE
                    p_prev[big] /= RESCALE
                    scale[big] += LOG_RESCALE
        if m == 0:
            P[0] = p * np.exp(scale)
        else:
            P[m] = p * np.exp(scale + m * logs)
            if m == 1:
                Q[1] = p * np.exp(scale)
            else:
                Q[m] = p * np.exp(scale + (m - 1) * logs)
    for m in nz:
        m = int(m)
        if m == 0:
            dP = -math.sqrt(ell * (ell + 1.0)) * P[1]
            u += ccos[0] * P[0]
            gth += ccos[0] * dP
            continue
        dP = 0.5 * (math.sqrt((ell + m) * (ell - m + 1.0)) * P[m - 1]
                    - math.sqrt((ell + m + 1.0) * (ell - m)) * P[m + 1])
        cm = math.sqrt(2.0) * np.cos(m * phi)
        sm = math.sqrt(2.0) * np.sin(m * phi)
        ang = ccos[m] * cm + csin[m] * sm
        u += P[m] * ang
        gth += dP * ang
        gph += Q[m] * m * (csin[m] * cm - ccos[m] * sm)
    return u, gth, gph


def _pair_distance(kind, pts, q):
    if kind == 0:
        d = np.mod(np.abs(pts[:, 0] - q[0]), TWO_PI)
        return np.minimum(d, TWO_PI - d)
    if kind == 1:
        d1 = np.mod(np.abs(pts[:, 0] - q[0]), TWO_PI)
        d2 = np.mod(np.abs(pts[:, 1] - q[1]), TWO_PI)
        return np.hypot(np.minimum(d1, TWO_PI - d1), np.minimum(d2, TWO_PI - d2))
    cr = np.linalg.norm(np.cross(pts, q), axis=-1)
    return np.arctan2(cr, pts @ q)


def greedy_pack(cands, kind, min_sep):
    """Indices of candidates accepted greedily with pairwise distance > min_sep.

    ``kind`` is 0 (circle), 1 (torus) or 2 (sphere, candidates as unit vectors).
    """
    cands = np.ascontiguousarray(cands, dtype=float)
    acc = np.empty_like(cands)
    out = []
    for i in range(len(cands)):
        if out:
            d = _pair_distance(kind, acc[:len(out)], cands[i])
            if d.min() <= min_sep:
                continue
        acc[len(out)] = cands[i]
        out.append(i)
    return np.asarray(out, dtype=np.intp)
