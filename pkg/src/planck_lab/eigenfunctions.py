"""Closed-form Laplacian eigenfunctions on the circle, the flat torus and the round sphere.

The Laplacian is the non-negative one, so every family satisfies
``Delta u = lam**2 u``.  Gradients are returned in the orthonormal frame of
each manifold: ``d/dx`` on the circle, ``(d/dx1, d/dx2)`` on the torus and
``(d/dtheta, (1/sin theta) d/dphi)`` on the sphere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import (
    CIRCLE, GLOBAL, SPHERE, TORUS, TWO_PI, Kind, Manifold, exp_map, geodesic_distance,
    global_order, polar_grid, quadrature, reduce_point,
)

FAMILIES = ("circle", "torus", "zonal", "highest_weight", "random_sphere", "constant")
TORUS_PRESETS = ("full", "pair", "random")


@dataclass(frozen=True, eq=False)
class EigenfunctionSpec:
    """One member of an eigenfunction family.

    ``normalization_constant`` multiplies the raw closed form; ``l2`` is the
    exact L2 norm of the stored function (1 except for the highest weight
    harmonics, which are kept as ``k**0.25 sin(theta)**k sin(k phi)``).
    """
    family: str
    manifold: Manifold
    eigenvalue_sq: float
    normalization_constant: float
    params: dict
    l2: float = 1.0
    data: dict = field(default_factory=dict, repr=False)

    @property
    def lam(self) -> float:
        return math.sqrt(self.eigenvalue_sq)

    @property
    def label(self) -> str:
        name = {"circle": "cos", "torus": "torus", "zonal": "zonal", "highest_weight": "hw",
                "random_sphere": "randsphere", "constant": "const"}[self.family]
        return name + ":" + ",".join(f"{k}={v}" for k, v in self.params.items())

    def summary(self) -> dict:
        return {
            "label": self.label,
            "family": self.family,
            "manifold": str(self.manifold),
            "params": dict(self.params),
            "eigenvalue_sq": self.eigenvalue_sq,
            "lambda": self.lam,
            "normalization_constant": self.normalization_constant,
            "l2_norm": self.l2,
        }

    def __call__(self, p):
        return evaluate(self, p)


def _freeze(**arrays):
    for a in arrays.values():
        a.setflags(write=False)
    return arrays


def circle_mode(k: int, phase: float = 0.0) -> EigenfunctionSpec:
    """``cos(k x - phase) / sqrt(pi)``."""
    k = int(k)
    if k < 1:
        raise ValueError(f"circle mode needs k >= 1, got {k}")
    params = {"k": k} if phase == 0.0 else {"k": k, "phase": float(phase)}
    return EigenfunctionSpec("circle", CIRCLE, float(k * k), 1.0 / math.sqrt(math.pi), params)


def lattice_points(N: int) -> list[tuple[int, int]]:
    """All integer pairs with m1**2 + m2**2 == N, in lexicographic order."""
    N = int(N)
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    out = []
    r = math.isqrt(N)
    for m1 in range(-r, r + 1):
        rest = N - m1 * m1
        m2 = math.isqrt(rest)
        if m2 * m2 == rest:
            out.extend([(m1, -m2), (m1, m2)] if m2 else [(m1, 0)])
    return out


def _canonical(k) -> bool:
    return k[0] > 0 or (k[0] == 0 and k[1] > 0)


def torus_norm_sq(ks, a, b) -> float:
    """Exact squared L2 norm of sum a_k sin(k.x) + b_k cos(k.x) over the torus."""
    acc = {}
    for k, ak, bk in zip(map(tuple, ks), a, b):
        key, sgn = (k, 1.0) if _canonical(k) else ((-k[0], -k[1]), -1.0)
        A, B = acc.get(key, (0.0, 0.0))
        acc[key] = (A + sgn * ak, B + bk)
    return 2.0 * math.pi**2 * sum(A * A + B * B for A, B in acc.values())


def torus_mode(N: int, preset: str = "full", seed: int = 0) -> EigenfunctionSpec:
    """Torus eigenfunction ``c * sum_{|k|^2 = N} a_k sin(k.x) + b_k cos(k.x)``.

    Presets: ``full`` puts a_k = b_k = 1 on every lattice point, ``pair``
    keeps only ``cos(k.x)`` for the first lattice point (a plane wave),
    ``random`` draws a_k, b_k i.i.d. standard normal from a seeded Philox
    stream.
    """
    pts = lattice_points(N)
    if not pts:
        raise ValueError(f"{N} is not a sum of two squares; no torus eigenfunction with lambda^2 = {N}")
    ks = np.array(pts, dtype=float)
    T = len(pts)
    if preset == "full":
        a = np.ones(T)
        b = np.ones(T)
        params = {"N": N, "preset": preset}
    elif preset == "pair":
        a = np.zeros(T)
        b = np.zeros(T)
        b[0] = 1.0
        params = {"N": N, "preset": preset}
    elif preset == "random":
        rng = np.random.Generator(np.random.Philox(seed))
        a = rng.standard_normal(T)
        b = rng.standard_normal(T)
        params = {"N": N, "preset": preset, "seed": int(seed)}
    else:
        raise ValueError(f"unknown torus preset {preset!r}; expected one of {TORUS_PRESETS}")
    c = 1.0 / math.sqrt(torus_norm_sq(ks, a, b))
    return EigenfunctionSpec("torus", TORUS, float(N), c, params, data=_freeze(ks=ks, a=a, b=b))


def _sphere_spec(family, ell, ccos, csin, params, c=1.0):
    return EigenfunctionSpec(family, SPHERE, float(ell * (ell + 1)), c, params,
                             data=_freeze(ccos=ccos, csin=csin))


def zonal_harmonic(ell: int) -> EigenfunctionSpec:
    """``sqrt((2l+1)/4pi) P_l(cos theta)``."""
    ell = int(ell)
    if ell < 1:
        raise ValueError(f"zonal harmonic needs l >= 1, got {ell}")
    ccos = np.zeros(ell + 1)
    ccos[0] = 1.0
    return _sphere_spec("zonal", ell, ccos, np.zeros(ell + 1), {"l": ell})


def random_sphere_mode(ell: int, seed: int = 0) -> EigenfunctionSpec:
    """Unit-norm Gaussian combination of the 2l+1 real spherical harmonics of degree l."""
    ell = int(ell)
    if ell < 1:
        raise ValueError(f"random sphere mode needs l >= 1, got {ell}")
    rng = np.random.Generator(np.random.Philox(seed))
    c = rng.standard_normal(2 * ell + 1)
    c /= np.linalg.norm(c)
    ccos = c[ell:].copy()
    csin = np.zeros(ell + 1)
    csin[1:] = c[:ell][::-1]
    return _sphere_spec("random_sphere", ell, ccos, csin, {"l": ell, "seed": int(seed)})


def wallis(m: int) -> float:
    """Integral of sin(t)**m over [0, pi]."""
    w = (math.pi, 2.0)
    for j in range(2, m + 1):
        w = (w[1], (j - 1) / j * w[0])
    return w[0] if m == 0 else w[1]


def highest_weight(k: int) -> EigenfunctionSpec:
    """``k**(1/4) sin(theta)**k sin(k phi)``, kept unnormalized; ``l2`` holds its exact norm."""
    k = int(k)
    if k < 1:
        raise ValueError(f"highest weight harmonic needs k >= 1, got {k}")
    norm_sq = math.sqrt(k) * math.pi * wallis(2 * k + 1)
    return EigenfunctionSpec("highest_weight", SPHERE, float(k * (k + 1)), k**0.25, {"k": k},
                             l2=math.sqrt(norm_sq))


def constant(m: Manifold) -> EigenfunctionSpec:
    """The unit-norm constant ``1/sqrt(Vol(M))`` (eigenvalue 0)."""
    return EigenfunctionSpec("constant", m, 0.0, 1.0 / math.sqrt(m.total_volume),
                             {"manifold": str(m)})


def _points(u: EigenfunctionSpec, p):
    p = reduce_point(u.manifold, p)
    single = p.ndim == 1
    return np.atleast_2d(p), single


def _eval_grad(u: EigenfunctionSpec, pts: np.ndarray, want_grad: bool):
    c = u.normalization_constant
    fam = u.family
    if fam == "circle":
        k = u.params["k"]
        arg = k * pts[:, 0] - u.params.get("phase", 0.0)
        val = c * np.cos(arg)
        grad = (-c * k * np.sin(arg))[:, None] if want_grad else None
    elif fam == "torus":
        ks, a, b = u.data["ks"], u.data["a"], u.data["b"]
        ph = pts @ ks.T
        s, co = np.sin(ph), np.cos(ph)
        val = c * (s @ a + co @ b)
        grad = c * ((co * a - s * b) @ ks) if want_grad else None
    elif fam in ("zonal", "random_sphere"):
        ell = int(round(u.params["l"]))
        val, gt, gp = kernels.sphere_mode(ell, u.data["ccos"], u.data["csin"], pts[:, 0], pts[:, 1])
        val = c * val
        grad = c * np.stack([gt, gp], axis=-1) if want_grad else None
    elif fam == "highest_weight":
        k = u.params["k"]
        th, ph = pts[:, 0], pts[:, 1]
        st = np.sin(th)
        skm1 = st ** (k - 1)
        val = c * skm1 * st * np.sin(k * ph)
        if want_grad:
            grad = c * k * skm1[:, None] * np.stack(
                [np.cos(th) * np.sin(k * ph), np.cos(k * ph)], axis=-1)
        else:
            grad = None
    elif fam == "constant":
        val = np.full(len(pts), c)
        grad = np.zeros((len(pts), u.manifold.dimension)) if want_grad else None
    else:
        raise ValueError(f"unknown family {fam!r}")
    return val, grad


def evaluate(u: EigenfunctionSpec, p):
    """Value of u at a point (float) or at a batch of points (array)."""
    pts, single = _points(u, p)
    val, _ = _eval_grad(u, pts, False)
    return float(val[0]) if single else val


def gradient(u: EigenfunctionSpec, p):
    """Gradient components in the orthonormal frame and the gradient norm."""
    pts, single = _points(u, p)
    _, g = _eval_grad(u, pts, True)
    norm = np.linalg.norm(g, axis=-1)
    if single:
        return g[0], float(norm[0])
    return g, norm


def laplacian(u: EigenfunctionSpec, p):
    """Analytic non-negative Laplacian ``-div grad u`` (circle and torus families)."""
    pts, single = _points(u, p)
    c = u.normalization_constant
    if u.family == "circle":
        k = u.params["k"]
        out = c * k * k * np.cos(k * pts[:, 0] - u.params.get("phase", 0.0))
    elif u.family == "torus":
        ks, a, b = u.data["ks"], u.data["a"], u.data["b"]
        ph = pts @ ks.T
        k2 = np.sum(ks * ks, axis=1)
        out = c * ((np.sin(ph) * a + np.cos(ph) * b) @ k2)
    elif u.family == "constant":
        out = np.zeros(len(pts))
    else:
        raise NotImplementedError(f"no analytic second derivatives for the {u.family} family")
    return float(out[0]) if single else out


def density(u: EigenfunctionSpec, pts, what: str = "u2") -> np.ndarray:
    """Pointwise |u|^2 (``u2``), |grad u|^2 (``g2``), |u| or |grad u| on a batch of points."""
    pts = np.atleast_2d(reduce_point(u.manifold, pts))
    want = what in ("g2", "grad")
    val, g = _eval_grad(u, pts, want)
    if what == "u2":
        return val * val
    if what == "u":
        return np.abs(val)
    g2 = np.sum(g * g, axis=-1)
    return g2 if what == "g2" else np.sqrt(g2)


def l2_norm(u: EigenfunctionSpec, order: int | None = None) -> float:
    """L2 norm by a Global rule exact for |u|^2."""
    rule = quadrature(u.manifold, GLOBAL, order or global_order(u.lam))
    return math.sqrt(rule.integrate(density(u, rule.nodes, "u2")))


REFINE_PASSES = 5
REFINE_SEEDS = 4
# coarse samples within this relative band of the best start their own refinement
REFINE_BAND = 1e-2


def _local_grid(m, best, h):
    """17 (circle) or 17x17 samples spanning [-h, h] about ``best``."""
    off = np.linspace(-h, h, 17)
    if m.kind is Kind.CIRCLE:
        return reduce_point(m, (best[0] + off)[:, None])
    dx, dy = np.meshgrid(off, off, indexing="ij")
    dx, dy = dx.ravel(), dy.ravel()
    if m.kind is Kind.TORUS:
        return reduce_point(m, best + np.stack([dx, dy], axis=-1))
    return exp_map(m, best, np.hypot(dx, dy), np.arctan2(dy, dx))


def sup_on_ball(f: str, u: EigenfunctionSpec, p, r: float, return_info: bool = False):
    """Sampled maximum of |u| (``f="u"``) or |grad u| (``f="grad"``) over the closed ball B(p, r).

    The sample spacing is ``h = min(r, 1/lam) / 16``.  Up to ``REFINE_SEEDS``
    well-separated samples within ``REFINE_BAND`` of the best then each get
    ``REFINE_PASSES`` local grids, spanning [-h, h] about the best point of
    that chain with h shrinking by 8 per pass.  Every sample lies in the ball, so the result
    is a lower bound for the true supremum.
    """
    if f not in ("u", "grad"):
        raise ValueError(f"f must be 'u' or 'grad', got {f!r}")
    m = u.manifold
    if not 0.0 < r <= m.injectivity_radius:
        raise ValueError(f"radius {r!r} outside (0, {m.injectivity_radius}]")
    c = reduce_point(m, p)
    lam = u.lam
    h = (min(r, 1.0 / lam) if lam > 0 else r) / 16.0
    pts, _, _ = polar_grid(m, c, r, h)
    vals = density(u, pts, f)
    ib = int(np.argmax(vals))
    coarse = float(vals[ib])
    # a boundary sample next to a maximum outside the ball can beat every interior
    # sample, so refine a few well-separated near-best samples, not just the best
    seeds = []
    for i in np.argsort(-vals, kind="stable"):
        if vals[i] < coarse * (1.0 - REFINE_BAND) or len(seeds) == REFINE_SEEDS:
            break
        if all(geodesic_distance(m, pts[i], pts[k]) > 2.0 * h for k in seeds):
            seeds.append(i)
    refined, where = coarse, pts[ib]
    for i in seeds:
        at, av, hh = pts[i], float(vals[i]), h
        for _ in range(REFINE_PASSES):
            loc = _local_grid(m, at, hh)
            loc = loc[geodesic_distance(m, c, loc) <= r]
            if len(loc):
                lv = density(u, loc, f)
                j = int(np.argmax(lv))
                if lv[j] > av:
                    at, av = loc[j], float(lv[j])
            hh /= 8.0
        if av > refined:
            refined, where = av, at
    if not return_info:
        return refined
    return refined, {"coarse": coarse, "refined": refined, "argmax": where,
                     "samples": len(pts) + len(seeds) * REFINE_PASSES * 17 ** (m.dimension), "spacing": h,
                     "refinement_gain": refined / coarse - 1.0 if coarse > 0 else 0.0}


def global_sup(f: str, u: EigenfunctionSpec, n_refine: int = 8) -> tuple[float, np.ndarray]:
    """Dense-sample estimate of the global sup of |u| or |grad u| and a point attaining it."""
    m = u.manifold
    lam = max(u.lam, 1.0)
    h = 1.0 / (4.0 * lam)
    if m.kind is Kind.CIRCLE:
        n = math.ceil(TWO_PI / h)
        pts = (TWO_PI * np.arange(n) / n)[:, None]
    elif m.kind is Kind.TORUS:
        n = math.ceil(TWO_PI / h)
        g = TWO_PI * np.arange(n) / n
        X1, X2 = np.meshgrid(g, g, indexing="ij")
        pts = np.stack([X1.ravel(), X2.ravel()], axis=-1)
    else:
        from .geometry import candidate_centers
        pts = candidate_centers(SPHERE, h)
        # poles are extremal for zonal modes
        pts = np.vstack([[[0.0, 0.0], [math.pi, 0.0]], pts])
    vals = np.concatenate([density(u, chunk, f) for chunk in np.array_split(pts, max(1, len(pts) // 20000))])
    order = np.argsort(-vals, kind="stable")[:n_refine]
    best_val, best_pt = -1.0, pts[order[0]]
    for i in order:
        v, info = sup_on_ball(f, u, pts[i], min(2.0 * h, m.injectivity_radius), return_info=True)
        if v > best_val:
            best_val, best_pt = v, info["argmax"]
    return best_val, best_pt
