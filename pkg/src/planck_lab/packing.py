"""Maximal disjoint ball packings and nodal-point search inside the packed balls."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .eigenfunctions import EigenfunctionSpec, evaluate, sup_on_ball
from .geometry import (
    TWO_PI, Kind, Manifold, ball_volume, candidate_centers, exp_map, from_unit, geodesic_distance,
    geodesic_interpolate, get_manifold, polar_grid, reduce_point, to_unit, uniform_sample,
)

# accepted centers are separated by more than 2R (1 + SEP_MARGIN); the margin
# absorbs last-ulp differences between distance formulas in the two backends
SEP_MARGIN = 1e-12
NODAL_REL_TOL = 1e-10
_KIND_CODE = {Kind.CIRCLE: 0, Kind.TORUS: 1, Kind.SPHERE: 2}


@dataclass(frozen=True, eq=False)
class Packing:
    manifold: Manifold
    radius: float
    centers: np.ndarray
    seed: int | None

    def __post_init__(self):
        self.centers.setflags(write=False)

    @property
    def J(self) -> int:
        return len(self.centers)

    def to_dict(self) -> dict:
        return {"manifold": str(self.manifold), "radius": self.radius, "seed": self.seed,
                "centers": self.centers.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Packing":
        m = get_manifold(d["manifold"])
        centers = np.asarray(d["centers"], dtype=float).reshape(-1, m.chart_dim)
        return cls(m, float(d["radius"]), centers, d["seed"])

    @classmethod
    def from_json(cls, s: str) -> "Packing":
        return cls.from_dict(json.loads(s))


def _min_dist(m: Manifold, centers: np.ndarray, q: np.ndarray) -> float:
    if len(centers) == 0:
        return math.inf
    return float(np.min(geodesic_distance(m, centers, q)))


def _fill_circle(centers: np.ndarray, R: float) -> np.ndarray:
    xs = sorted(float(c) for c in centers[:, 0])
    out = list(xs)
    sep = 2.0 * R * (1.0 + SEP_MARGIN)
    for i, x in enumerate(xs):
        nxt = xs[(i + 1) % len(xs)] + (TWO_PI if i + 1 == len(xs) else 0.0)
        pos = x
        while nxt - pos > 2.0 * sep:
            pos += sep
            out.append(pos % TWO_PI)
    return np.asarray(out)[:, None]


def _pair_vertices(m: Manifold, a: np.ndarray, b: np.ndarray, rho: float, nudge: float):
    """Intersection points of the two distance-rho circles about a and b, pushed slightly outward."""
    out = []
    if m.kind is Kind.TORUS:
        base = np.mod(b - a + math.pi, TWO_PI) - math.pi
        for ox in (-TWO_PI, 0.0, TWO_PI):
            for oy in (-TWO_PI, 0.0, TWO_PI):
                d = base + (ox, oy)
                D = math.hypot(*d)
                if D == 0.0 or D >= 2.0 * rho:
                    continue
                h = math.sqrt(rho * rho - 0.25 * D * D) + nudge
                perp = np.array([-d[1], d[0]]) / D
                mid = a + 0.5 * d
                out += [mid + h * perp, mid - h * perp]
        return [reduce_point(m, v) for v in out]
    va, vb = to_unit(a), to_unit(b)
    c = float(va @ vb)
    cr = np.cross(va, vb)
    ncr = float(np.linalg.norm(cr))
    if ncr < 1e-14:
        return []
    x = math.cos(rho) / (1.0 + c)
    z2 = 1.0 - 2.0 * x * x * (1.0 + c)
    if z2 <= 0.0:
        return []
    n = cr / ncr
    s = va + vb
    for sgn in (1.0, -1.0):
        v = x * s + sgn * math.sqrt(z2) * n
        v /= np.linalg.norm(v)
        # tangent direction away from a + b increases the distance to both centers
        w = (s @ v) * v - s
        nw = float(np.linalg.norm(w))
        if nw > 0.0:
            v = math.cos(nudge) * v + math.sin(nudge) * w / nw
        out.append(from_unit(v))
    return out


def _repair(m: Manifold, centers: np.ndarray, R: float) -> np.ndarray:
    """Insert centers into any region farther than 2R from all centers.

    Such a region is bounded by arcs of the distance-2R circles.  Either one
    of its corners is an intersection point of two of those circles, or its
    boundary is a single whole circle and any point of that circle works.
    Candidates not covered by a third disk are admissible new centers.
    """
    if m.kind is Kind.CIRCLE:
        return _fill_circle(centers, R)
    rho = 2.0 * R
    sep = rho * (1.0 + SEP_MARGIN)
    nudge = 1e-9 * R
    cen = [c for c in centers]
    changed = True
    while changed:
        changed = False
        arr = np.asarray(cen)
        for i in range(len(cen)):
            if rho + nudge < m.diameter:
                v = exp_map(m, arr[i], rho + nudge, 0.0)
                if _min_dist(m, arr, v) > sep:
                    cen.append(v)
                    changed = True
                    break
            near = np.flatnonzero(geodesic_distance(m, arr, arr[i]) < 2.0 * rho)
            for j in near[near > i]:
                for v in _pair_vertices(m, arr[i], arr[j], rho, nudge):
                    if _min_dist(m, np.asarray(cen), v) > sep:
                        cen.append(v)
                        changed = True
            if changed:
                break
    return np.asarray(cen)


def maximal_disjoint_packing(m: Manifold, R: float, seed: int | None = 0,
                             backend: str | None = None) -> Packing:
    """Greedy maximal disjoint packing of geodesic R-balls.

    Candidates from :func:`candidate_centers` at spacing R/2 are accepted in
    order when farther than 2R from every accepted center; a repair pass then
    fills any remaining gap so that every point of the manifold lies within
    2R of a center.
    """
    if not 0.0 < R <= 0.5 * m.injectivity_radius:
        raise ValueError(f"packing radius {R!r} outside (0, {0.5 * m.injectivity_radius}]")
    cands = candidate_centers(m, 0.5 * R, seed)
    raw = to_unit(cands) if m.kind is Kind.SPHERE else cands
    idx = kernels.greedy_pack(raw, _KIND_CODE[m.kind], 2.0 * R * (1.0 + SEP_MARGIN), backend=backend)
    centers = _repair(m, cands[idx], R)
    return Packing(m, float(R), reduce_point(m, centers), seed)


@dataclass(frozen=True)
class NodalRecord:
    ball_index: int
    point: tuple[float, ...] | None
    residual: float
    search_radius: float
    tolerance: float
    sup_abs: float
    min_abs_sample: float
    steps: int = 0
    history: tuple[float, ...] = ()

    @property
    def found(self) -> bool:
        return self.point is not None

    def to_dict(self) -> dict:
        return {"ball_index": self.ball_index, "point": None if self.point is None else list(self.point),
                "residual": self.residual, "search_radius": self.search_radius,
                "tolerance": self.tolerance, "sup_abs": self.sup_abs,
                "min_abs_sample": self.min_abs_sample, "steps": self.steps}


def _bisect(u: EigenfunctionSpec, p0, p1, f0: float, tol: float, max_steps: int = 200):
    """Bisection along the geodesic segment p0 -> p1 where u changes sign.

    Returns the evaluated point of smallest |u| and the running minimum of
    |u| after each step.
    """
    m = u.manifold
    s0, s1 = 0.0, 1.0
    best_pt, best = None, math.inf
    hist = []
    for _ in range(max_steps):
        sm = 0.5 * (s0 + s1)
        q = geodesic_interpolate(m, p0, p1, sm)
        fq = evaluate(u, q)
        if abs(fq) < best:
            best, best_pt = abs(fq), q
        hist.append(best)
        if best <= tol or sm in (s0, s1):
            break
        if (fq < 0.0) == (f0 < 0.0):
            s0, f0 = sm, fq
        else:
            s1 = sm
    return best_pt, best, hist


def find_nodal_point(u: EigenfunctionSpec, center, search_radius: float,
                     ball_index: int = 0, rel_tol: float = NODAL_REL_TOL) -> NodalRecord:
    """Locate a zero of u within ``search_radius`` of ``center``.

    Radial transects at spacing ``search_radius/32`` are scanned for a sign
    change between neighbouring samples (center first, then outward, ray by
    ray); a full polar sweep is the fallback.  The bracket is bisected along
    the connecting geodesic until ``|u(q)| <= rel_tol * sup_B |u|``.  No sign
    change means the record carries no point; ``min_abs_sample > 0`` then
    certifies u has no zero at the sampled points.
    """
    m = u.manifold
    if not 0.0 < search_radius <= m.injectivity_radius:
        raise ValueError(f"search radius {search_radius!r} outside (0, {m.injectivity_radius}]")
    c = reduce_point(m, center)
    sup_abs = sup_on_ball("u", u, c, search_radius)
    tol = rel_tol * sup_abs
    h = search_radius / 32.0
    f_c = evaluate(u, c)
    if abs(f_c) <= tol:
        return NodalRecord(ball_index, tuple(c.tolist()), abs(f_c), search_radius, tol, sup_abs, abs(f_c))
    n_rays = 2 if m.kind is Kind.CIRCLE else 64
    min_abs = abs(f_c)
    for dense in (False, True):
        if dense and m.kind is Kind.CIRCLE:
            break
        if dense:
            pts, t, psi = polar_grid(m, c, search_radius, h)
        else:
            pts, t, psi = polar_grid(m, c, search_radius, h, n_dirs=n_rays)
        vals = evaluate(u, pts)
        min_abs = min(min_abs, float(np.min(np.abs(vals))))
        # neighbours: consecutive samples along each ray, the center to each first sample,
        # and (dense sweep) consecutive samples around each ring
        pairs = []
        if m.kind is Kind.CIRCLE or not dense:
            for d in np.unique(psi[1:]):
                ray = np.flatnonzero((psi == d) & (t > 0))
                ray = ray[np.argsort(t[ray], kind="stable")]
                seq = np.concatenate([[0], ray])
                pairs.extend(zip(seq[:-1], seq[1:]))
        else:
            for rho in np.unique(t):
                ring = np.flatnonzero(t == rho)
                if rho == 0:
                    continue
                pairs.extend(zip(ring, np.roll(ring, -1)))
        for i, j in pairs:
            vi, vj = vals[i], vals[j]
            if vj == 0.0 or vi == 0.0:
                k = j if vj == 0.0 else i
                return NodalRecord(ball_index, tuple(pts[k].tolist()), 0.0, search_radius, tol, sup_abs, 0.0)
            if (vi < 0.0) != (vj < 0.0):
                q, res, hist = _bisect(u, pts[i], pts[j], vi, tol)
                return NodalRecord(ball_index, tuple(np.asarray(q).tolist()), res, search_radius, tol,
                                   sup_abs, min_abs, len(hist), tuple(hist))
    return NodalRecord(ball_index, None, math.inf, search_radius, tol, sup_abs, min_abs)


def verify_packing(pk: Packing, n_probes: int = 10_000, seed: int | None = 0) -> dict:
    """Exact pairwise separation, probe-checked 2R covering and the volume bound."""
    m, R, C = pk.manifold, pk.radius, pk.centers
    min_sep = math.inf
    for i in range(pk.J - 1):
        min_sep = min(min_sep, float(np.min(geodesic_distance(m, C[i + 1:], C[i]))))
    probes = uniform_sample(m, n_probes, seed)
    cover = np.full(n_probes, math.inf)
    for c in C:
        cover = np.minimum(cover, geodesic_distance(m, probes, c))
    fill = pk.J * ball_volume(m, R) / m.total_volume
    return {"manifold": str(m), "R": R, "J": pk.J, "min_separation": min_sep,
            "min_separation_over_2R": min_sep / (2.0 * R),
            "max_probe_distance_over_2R": float(cover.max()) / (2.0 * R),
            "cover_violations": int(np.sum(cover > 2.0 * R)), "volume_fraction": fill,
            "separated": min_sep >= 2.0 * R, "covering": not np.any(cover > 2.0 * R),
            "volume_ok": fill <= 1.0}
