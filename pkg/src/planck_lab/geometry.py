"""Geodesic geometry and quadrature on the circle, the flat 2-torus and the round 2-sphere.

Points are numpy arrays whose last axis holds chart coordinates in radians:
``x`` on the circle, ``(x1, x2)`` on the torus and ``(theta, phi)`` on the
sphere.  Every routine accepts a single point of shape ``(d,)`` or a batch of
shape ``(N, d)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi


class Kind(str, Enum):
    CIRCLE = "circle"
    TORUS = "torus"
    SPHERE = "sphere"


@dataclass(frozen=True)
class Manifold:
    kind: Kind

    @property
    def dimension(self) -> int:
        return 1 if self.kind is Kind.CIRCLE else 2

    @property
    def chart_dim(self) -> int:
        return self.dimension

    @property
    def total_volume(self) -> float:
        if self.kind is Kind.CIRCLE:
            return TWO_PI
        if self.kind is Kind.TORUS:
            return TWO_PI**2
        return 4.0 * math.pi

    @property
    def injectivity_radius(self) -> float:
        return math.pi

    @property
    def diameter(self) -> float:
        if self.kind is Kind.TORUS:
            return math.pi * math.sqrt(2.0)
        return math.pi

    def __str__(self) -> str:
        return self.kind.value


CIRCLE = Manifold(Kind.CIRCLE)
TORUS = Manifold(Kind.TORUS)
SPHERE = Manifold(Kind.SPHERE)


def get_manifold(name: str | Kind | Manifold) -> Manifold:
    if isinstance(name, Manifold):
        return name
    try:
        kind = Kind(name)
    except ValueError:
        raise ValueError(f"unknown manifold {name!r}; expected circle, torus or sphere") from None
    return {Kind.CIRCLE: CIRCLE, Kind.TORUS: TORUS, Kind.SPHERE: SPHERE}[kind]


def _wrap(x):
    y = np.mod(x, TWO_PI)
    # np.mod can round tiny negatives up to exactly 2*pi
    return np.where(y >= TWO_PI, 0.0, y)


def reduce_point(m: Manifold, p) -> np.ndarray:
    """Map chart coordinates into the fundamental domain."""
    p = np.array(p, dtype=float)
    if p.shape[-1] != m.chart_dim:
        raise ValueError(f"{m} points need {m.chart_dim} coordinate(s), got shape {p.shape}")
    if m.kind is not Kind.SPHERE:
        return _wrap(p)
    theta = np.mod(p[..., 0], TWO_PI)
    phi = p[..., 1]
    flip = theta > math.pi
    theta = np.where(flip, TWO_PI - theta, theta)
    phi = np.where(flip, phi + math.pi, phi)
    return np.stack([np.clip(theta, 0.0, math.pi), _wrap(phi)], axis=-1)


def to_unit(p) -> np.ndarray:
    """Sphere chart coordinates to unit vectors in R^3."""
    p = np.asarray(p, dtype=float)
    th, ph = p[..., 0], p[..., 1]
    st = np.sin(th)
    return np.stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)], axis=-1)


def from_unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    rho = np.hypot(v[..., 0], v[..., 1])
    theta = np.arctan2(rho, v[..., 2])
    phi = _wrap(np.arctan2(v[..., 1], v[..., 0]))
    return np.stack([theta, phi], axis=-1)


def sphere_frame(p) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal frame (e_theta, e_phi) at sphere point(s) p, as ambient vectors.

    At the poles this is the limit along the meridian ``phi``.
    """
    p = np.asarray(p, dtype=float)
    th, ph = p[..., 0], p[..., 1]
    ct, st, cp, sp = np.cos(th), np.sin(th), np.cos(ph), np.sin(ph)
    e1 = np.stack([ct * cp, ct * sp, -st], axis=-1)
    e2 = np.stack([-sp, cp, np.zeros_like(ph)], axis=-1)
    return e1, e2


def circle_delta(a, b):
    d = np.mod(np.abs(np.asarray(a, dtype=float) - b), TWO_PI)
    return np.minimum(d, TWO_PI - d)


def sphere_angle(u, v):
    """Angle between unit vectors, accurate at 0 and pi."""
    cr = np.linalg.norm(np.cross(u, v), axis=-1)
    return np.arctan2(cr, np.sum(u * v, axis=-1))


def geodesic_distance(m: Manifold, p, q) -> np.ndarray | float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if m.kind is Kind.CIRCLE:
        d = circle_delta(p[..., 0], q[..., 0])
    elif m.kind is Kind.TORUS:
        d = np.hypot(circle_delta(p[..., 0], q[..., 0]), circle_delta(p[..., 1], q[..., 1]))
    else:
        d = sphere_angle(to_unit(p), to_unit(q))
    return float(d) if np.ndim(d) == 0 else d


def exp_map(m: Manifold, center, t, psi) -> np.ndarray:
    """Points at geodesic distance ``t`` from ``center`` in direction ``psi``.

    Directions are measured in the orthonormal frame at the center: on the
    circle ``cos(psi) >= 0`` means forward, on the torus the frame is the
    coordinate frame, on the sphere it is ``(e_theta, e_phi)``.
    """
    c = np.asarray(center, dtype=float)
    t = np.asarray(t, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if m.kind is Kind.CIRCLE:
        sgn = np.where(np.cos(psi) >= 0.0, 1.0, -1.0)
        return reduce_point(m, (c[0] + sgn * t)[..., None])
    if m.kind is Kind.TORUS:
        out = np.stack([c[0] + t * np.cos(psi), c[1] + t * np.sin(psi)], axis=-1)
        return reduce_point(m, out)
    pc = to_unit(c)
    e1, e2 = sphere_frame(c)
    dirs = np.cos(psi)[..., None] * e1 + np.sin(psi)[..., None] * e2
    v = np.cos(t)[..., None] * pc + np.sin(t)[..., None] * dirs
    return from_unit(v)


def geodesic_interpolate(m: Manifold, p, q, s) -> np.ndarray:
    """Point at fraction ``s`` of the way along the minimizing geodesic from p to q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if m.kind is not Kind.SPHERE:
        d = np.mod(q - p + math.pi, TWO_PI) - math.pi
        return reduce_point(m, p + s * d)
    a, b = to_unit(p), to_unit(q)
    om = float(sphere_angle(a, b))
    if om < 1e-15:
        return reduce_point(m, p)
    v = (math.sin((1 - s) * om) * a + math.sin(s * om) * b) / math.sin(om)
    return from_unit(v)


def ball_volume(m: Manifold, r: float) -> float:
    if not 0.0 < r <= m.injectivity_radius:
        raise ValueError(f"ball radius {r!r} outside (0, {m.injectivity_radius}] on the {m}")
    if m.kind is Kind.CIRCLE:
        return 2.0 * r
    if m.kind is Kind.TORUS:
        return math.pi * r * r
    return 4.0 * math.pi * math.sin(0.5 * r) ** 2


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float


@dataclass(frozen=True)
class Global:
    pass


GLOBAL = Global()


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    region: Ball | Global
    order: int
    angular_order: int = 0
    # local polar coordinates of each node (ball rules only)
    radii: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.radii):
            if arr is not None:
                arr.setflags(write=False)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def __len__(self) -> int:
        return len(self.weights)


DEFAULT_RADIAL_ORDER = 32
DEFAULT_ANGULAR_ORDER = 64


def ball_orders(lam: float, r: float) -> tuple[int, int]:
    """Radial and angular orders that resolve a band-limited integrand of frequency ``lam``."""
    kr = lam * r
    radial = max(DEFAULT_RADIAL_ORDER, math.ceil(1.5 * kr) + 16)
    angular = max(DEFAULT_ANGULAR_ORDER, 2 * math.ceil(2.0 * kr) + 32)
    return radial, angular


def global_order(lam: float) -> int:
    """Degree of the Global rule used for densities built from an eigenfunction of frequency lam."""
    return max(8, 4 * math.ceil(lam) + 4)


def _ball_rule(m: Manifold, ball: Ball, order: int, angular_order: int) -> QuadratureRule:
    r = float(ball.radius)
    ball_volume(m, r)  # validates r
    c = reduce_point(m, ball.center)
    x, w = np.polynomial.legendre.leggauss(order)
    if m.kind is Kind.CIRCLE:
        t = 0.5 * r * (x + 1.0)
        wt = 0.5 * r * w
        tt = np.concatenate([t, t])
        psi = np.concatenate([np.zeros(order), np.full(order, math.pi)])
        weights = np.concatenate([wt, wt])
    else:
        ang = TWO_PI * np.arange(angular_order) / angular_order
        if m.kind is Kind.TORUS:
            t = 0.5 * r * (x + 1.0)
            wt = 0.5 * r * w * t
        else:
            # integrate in s = 1 - cos t so the cap area is reproduced exactly
            h = 2.0 * math.sin(0.5 * r) ** 2
            s = 0.5 * h * (x + 1.0)
            t = 2.0 * np.arcsin(np.sqrt(0.5 * s))
            wt = 0.5 * h * w
        tt = np.repeat(t, angular_order)
        psi = np.tile(ang, order)
        weights = np.repeat(wt, angular_order) * (TWO_PI / angular_order)
    nodes = exp_map(m, c, tt, psi)
    return QuadratureRule(nodes, weights, Ball(tuple(c.tolist()), r), order, angular_order, tt)


def _global_rule(m: Manifold, order: int) -> QuadratureRule:
    if m.kind is Kind.CIRCLE:
        n = order + 1
        nodes = (TWO_PI * np.arange(n) / n)[:, None]
        weights = np.full(n, TWO_PI / n)
    elif m.kind is Kind.TORUS:
        n = order + 1
        g = TWO_PI * np.arange(n) / n
        X1, X2 = np.meshgrid(g, g, indexing="ij")
        nodes = np.stack([X1.ravel(), X2.ravel()], axis=-1)
        weights = np.full(n * n, (TWO_PI / n) ** 2)
    else:
        nt = order // 2 + 1
        nphi = order + 1
        z, wz = np.polynomial.legendre.leggauss(nt)
        theta = np.arccos(z)
        phi = TWO_PI * np.arange(nphi) / nphi
        T, P = np.meshgrid(theta, phi, indexing="ij")
        nodes = np.stack([T.ravel(), P.ravel()], axis=-1)
        weights = np.repeat(wz, nphi) * (TWO_PI / nphi)
    return QuadratureRule(nodes, weights, GLOBAL, order)


def quadrature(m: Manifold, region: Ball | Global, order: int | None = None,
               angular_order: int | None = None) -> QuadratureRule:
    """Quadrature rule over a geodesic ball or the whole manifold.

    Ball rules are polar products: an ``order``-point Gauss rule in the
    radial variable times a uniform ``angular_order``-point rule (default
    ``2 * order``).  On the sphere the polar-cap rule is built at the north
    pole and rotated onto the center.  Global rules integrate trigonometric
    polynomials (circle, torus) or spherical polynomials (sphere) of degree
    at most ``order`` exactly.
    """
    if isinstance(region, Ball):
        order = DEFAULT_RADIAL_ORDER if order is None else int(order)
        if order < 2:
            raise ValueError(f"quadrature order must be >= 2, got {order}")
        if angular_order is None:
            angular_order = 2 * order
        return _ball_rule(m, region, order, int(angular_order))
    if isinstance(region, Global):
        if order is None or int(order) < 2:
            raise ValueError(f"Global quadrature needs an explicit order >= 2, got {order!r}")
        return _global_rule(m, int(order))
    raise TypeError(f"invalid quadrature region {region!r}")


def polar_grid(m: Manifold, center, radius: float, spacing: float,
               n_dirs: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic sample of a closed ball in geodesic polar coordinates.

    Rings are ``spacing`` apart.  With ``n_dirs=None`` each ring carries
    enough directions that neighbouring samples are at most ``spacing``
    apart; otherwise every ring uses the same ``n_dirs`` rays (transects).
    Returns ``(points, t, psi)``; the center comes first.
    """
    c = reduce_point(m, center)
    nr = max(1, math.ceil(radius / spacing))
    rings = radius * np.arange(1, nr + 1) / nr
    if m.kind is Kind.CIRCLE:
        t = np.concatenate([[0.0], rings, rings])
        psi = np.concatenate([[0.0], np.zeros(nr), np.full(nr, math.pi)])
    else:
        ts, ps = [np.zeros(1)], [np.zeros(1)]
        for rho in rings:
            k = n_dirs if n_dirs is not None else max(6, math.ceil(TWO_PI * rho / spacing))
            ts.append(np.full(k, rho))
            ps.append(TWO_PI * np.arange(k) / k)
        t = np.concatenate(ts)
        psi = np.concatenate(ps)
    return exp_map(m, c, t, psi), t, psi


# Fibonacci lattices have covering radius below 0.77 * sqrt(4 pi / N).
_FIB_COVER = 0.9


def candidate_centers(m: Manifold, spacing: float, seed: int | None = None) -> np.ndarray:
    """A deterministic point set within ``spacing`` of every point of the manifold.

    ``seed=None`` gives the canonical grid or lattice; an integer seed applies
    a seeded shift (circle, torus) or rotation (sphere).
    """
    if not 0.0 < spacing < m.injectivity_radius:
        raise ValueError(f"candidate spacing {spacing!r} outside (0, {m.injectivity_radius})")
    rng = None if seed is None else np.random.default_rng(seed)
    if m.kind is Kind.CIRCLE:
        n = math.ceil(TWO_PI / spacing)
        shift = 0.0 if rng is None else rng.uniform(0.0, TWO_PI / n)
        return reduce_point(m, (shift + TWO_PI * np.arange(n) / n)[:, None])
    if m.kind is Kind.TORUS:
        n = max(2, math.ceil(TWO_PI / (math.sqrt(2.0) * spacing)))
        shift = np.zeros(2) if rng is None else rng.uniform(0.0, TWO_PI / n, size=2)
        g = TWO_PI * np.arange(n) / n
        X1, X2 = np.meshgrid(g, g, indexing="ij")
        pts = np.stack([X1.ravel(), X2.ravel()], axis=-1) + shift
        return reduce_point(m, pts)
    n = max(4, math.ceil(4.0 * math.pi * (_FIB_COVER / spacing) ** 2))
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = math.pi * (1.0 + math.sqrt(5.0)) * i
    rho = np.sqrt(1.0 - z * z)
    v = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
    if rng is not None:
        q, r = np.linalg.qr(rng.standard_normal((3, 3)))
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        v = v @ q.T
    return from_unit(v)


def uniform_sample(m: Manifold, n: int, seed: int | None = 0) -> np.ndarray:
    """``n`` points distributed uniformly with respect to the volume measure."""
    rng = np.random.default_rng(seed)
    if m.kind is Kind.CIRCLE:
        return rng.uniform(0.0, TWO_PI, (n, 1))
    if m.kind is Kind.TORUS:
        return rng.uniform(0.0, TWO_PI, (n, 2))
    z = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, TWO_PI, n)
    return np.stack([np.arccos(z), phi], axis=-1)
