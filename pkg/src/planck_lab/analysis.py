"""Experiment pipelines: local mass ratios, Green's identity, small mass near
nodal points, mass concentration near large values, and the highest weight example.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .eigenfunctions import (
    EigenfunctionSpec, density, evaluate, global_sup, highest_weight, sup_on_ball,
)
from .geometry import (
    GLOBAL, Ball, Kind, SPHERE, ball_orders, ball_volume, global_order, quadrature, reduce_point,
)
from .packing import (
    NODAL_REL_TOL, Packing, find_nodal_point, maximal_disjoint_packing, verify_packing,
)
from .report import ExperimentReport

DEFAULT_A = {Kind.CIRCLE: 5.0, Kind.TORUS: 7.5, Kind.SPHERE: 8.0}
DEFAULT_GAMMAS = tuple(round(0.05 * i, 2) for i in range(1, 21))
FLAT_BALL_REL = 1e-14
# sampled sups that agree to this relative precision count as ties at the threshold
TIE_REL = 1e-8


def default_a(u: EigenfunctionSpec) -> float:
    return DEFAULT_A[u.manifold.kind]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PLANCK_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _require_lambda(u: EigenfunctionSpec):
    if u.eigenvalue_sq <= 0.0:
        raise ValueError(f"{u.label}: the pipelines need lambda^2 > 0 (constant functions are degenerate)")


def ball_integral(u: EigenfunctionSpec, p, r: float, what: str = "u2") -> float:
    radial, angular = ball_orders(max(u.lam, 1.0), r)
    rule = quadrature(u.manifold, Ball(tuple(np.ravel(p)), r), radial, angular)
    return rule.integrate(density(u, rule.nodes, what))


@dataclass(frozen=True)
class MassRecord:
    center: tuple
    radius: float
    local_mass: float
    volume: float
    ratio: float
    classification: str
    eps: float

    @property
    def unnormalized(self) -> float:
        """Mean of |u|^2 over the ball."""
        return self.local_mass / self.volume


def classify(rho: float, eps: float) -> str:
    if rho <= eps:
        return "CaseI_small"
    if rho >= 1.0 / eps:
        return "CaseII_large"
    return "Neutral"


def local_mass_ratio(u: EigenfunctionSpec, p, r: float, eps: float = 0.1) -> MassRecord:
    """Local L2 mass on B(p, r) and its ratio to the equidistributed value Vol(B)/Vol(M)."""
    m = u.manifold
    vol = ball_volume(m, r)
    c = reduce_point(m, p)
    mass = max(0.0, ball_integral(u, c, r, "u2"))
    rho = mass * m.total_volume / vol
    return MassRecord(tuple(c.tolist()), float(r), mass, vol, rho, classify(rho, eps), eps)


def green_identity_residual(u: EigenfunctionSpec, order: int | None = None) -> dict:
    """Relative gap in  int |grad u|^2 = lam^2 int |u|^2  plus the Cauchy-Schwarz bound on int |grad u|."""
    _require_lambda(u)
    m = u.manifold
    order = order or global_order(u.lam)
    rule = quadrature(m, GLOBAL, order)
    u2 = rule.integrate(density(u, rule.nodes, "u2"))
    g2 = rule.integrate(density(u, rule.nodes, "g2"))
    g1 = rule.integrate(density(u, rule.nodes, "grad"))
    lam2 = u.eigenvalue_sq
    bound = math.sqrt(m.total_volume) * u.lam * math.sqrt(u2)
    return {
        "residual": abs(g2 - lam2 * u2) / (lam2 * u2),
        "grad_sq_integral": g2,
        "lam2_mass": lam2 * u2,
        "mass": u2,
        "grad_l1": g1,
        "grad_l1_bound": bound,
        "grad_l1_ok": g1 <= bound,
        "order": order,
    }


def green_experiment(u: EigenfunctionSpec, order: int | None = None) -> ExperimentReport:
    res = green_identity_residual(u, order)
    tol = 1e-12 if u.family == "circle" else 1e-6
    return ExperimentReport(
        "green", str(u.manifold), u.summary(), {"order": res["order"], "tolerance": tol},
        summary=res,
        assertions={"green_residual": res["residual"] <= tol, "grad_l1_bound": bool(res["grad_l1_ok"])},
    )


def packing_experiment(u: EigenfunctionSpec, a: float | None = None, seed: int | None = 0,
                       n_probes: int = 10_000) -> ExperimentReport:
    """Maximal disjoint packing at R = a/lam with its separation, covering and volume checks."""
    _require_lambda(u)
    a = default_a(u) if a is None else float(a)
    R = a / u.lam
    pk = maximal_disjoint_packing(u.manifold, R, seed)
    chk = verify_packing(pk, n_probes, seed)
    balls = [{"ball_index": j, "center": c.tolist(), "R": R} for j, c in enumerate(pk.centers)]
    return ExperimentReport("pack", str(u.manifold), u.summary(), {"a": a, "seed": seed, "n_probes": n_probes},
                            chk, balls, assertions={"separated": chk["separated"], "covering": chk["covering"],
                                                    "volume": chk["volume_ok"]})


# --- small mass near nodal points -------------------------------------------------------

@dataclass
class _Prepared:
    u: EigenfunctionSpec
    a: float
    R: float
    packing: Packing
    g: np.ndarray
    threshold: float
    selected: np.ndarray
    c2_emp: float
    nodal: dict


def _quantile_count(eps_frac: float, J: int) -> int:
    return min(J, math.ceil(round((1.0 - eps_frac) * J, 9)))


def _prepare(u, a, eps_frac, seed, threshold="quantile", c2=None, rel_tol=NODAL_REL_TOL) -> _Prepared:
    _require_lambda(u)
    if not 0.0 < eps_frac < 1.0:
        raise ValueError(f"eps_frac={eps_frac!r} must lie in (0, 1)")
    lam = u.lam
    R = a / lam
    pk = maximal_disjoint_packing(u.manifold, R, seed)
    g = np.array(_pmap(lambda p: sup_on_ball("grad", u, p, 2.0 * R / 3.0) ** 2, pk.centers))
    if threshold == "quantile":
        K0 = _quantile_count(eps_frac, pk.J)
        T = float(np.sort(g)[K0 - 1])
    elif threshold == "fixed":
        if c2 is None:
            raise ValueError("the fixed threshold needs c2")
        T = c2 * lam * lam / eps_frac
    else:
        raise ValueError(f"unknown threshold rule {threshold!r}")
    selected = g <= T * (1.0 + TIE_REL)
    c2_emp = eps_frac * T / (lam * lam)
    idx = np.flatnonzero(selected)
    recs = _pmap(lambda j: find_nodal_point(u, pk.centers[j], R / 3.0, int(j), rel_tol), idx)
    return _Prepared(u, a, R, pk, g, T, selected, c2_emp, dict(zip(idx.tolist(), recs)))


def _check_delta(delta, a):
    if not 0.0 < delta <= a / 3.0:
        raise ValueError(f"delta={delta!r} violates the precondition 0 < delta <= a/3 = {a / 3.0!r}")


def _strip_stats(prep: _Prepared) -> dict:
    u = prep.u
    k = u.params["k"]
    w = 0.1 / math.sqrt(k)
    th = prep.packing.centers[:, 0]
    strip = np.abs(th - 0.5 * math.pi) <= w
    return {"strip_halfwidth": w, "strip_count": int(strip.sum()),
            "strip_fraction": float(strip.mean()),
            "strip_selected": int((strip & prep.selected).sum())}


def _mass_rows(prep: _Prepared, delta: float, eps_mass: float):
    u, m = prep.u, prep.u.manifold
    r = delta / u.lam
    vol_b = ball_volume(m, r)

    def one(j):
        p = prep.packing.centers[j]
        row = {"ball_index": j, "center": p.tolist(), "R": prep.R, "r": r, "g_j": float(prep.g[j]),
               "selected": bool(prep.selected[j]), "nodal_found": False, "q": None,
               "local_mass": None, "rho": None, "classification": None}
        row["rho_center"] = local_mass_ratio(u, p, r, eps_mass).ratio
        rec = prep.nodal.get(j)
        if rec is not None and rec.found:
            mr = local_mass_ratio(u, rec.point, r, eps_mass)
            row.update(nodal_found=True, q=list(rec.point), local_mass=mr.local_mass, rho=mr.ratio,
                       classification=mr.classification, nodal_residual=rec.residual,
                       chain_ok=mr.local_mass <= prep.threshold * r * r * vol_b)
        return row

    return _pmap(one, range(prep.packing.J)), r, vol_b


def _ball_stats(rows, eps_mass, vol_b):
    rhos = np.array([b["rho"] for b in rows if b["rho"] is not None])
    if rhos.size == 0:
        return {"n_rho": 0, "rho_max": None, "rho_median": None, "frac_rho_le_eps": None,
                "frac_unnormalized_le_eps": None}
    mass = np.array([b["local_mass"] for b in rows if b["rho"] is not None])
    return {"n_rho": int(rhos.size), "rho_max": float(rhos.max()), "rho_median": float(np.median(rhos)),
            "frac_rho_le_eps": float(np.mean(rhos <= eps_mass)),
            "frac_unnormalized_le_eps": float(np.mean(mass <= eps_mass * vol_b))}


def smallmass_experiment(u: EigenfunctionSpec, a: float | None = None, eps: float = 0.1,
                         delta: float = 0.3, seed: int | None = 0, *, eps_mass: float | None = None,
                         delta_cap: bool = False, threshold: str = "quantile",
                         c2: float | None = None, nodal_rel_tol: float = NODAL_REL_TOL) -> ExperimentReport:
    """Small local mass on Planck balls around nodal points in almost all packed balls.

    Packs balls of radius R = a/lam, measures g_j = sup |grad u|^2 on
    B(p_j, 2R/3), keeps the balls with g_j at most the (1-eps)-quantile
    threshold T (or the fixed ``c2 lam^2 / eps``), finds a zero q_j in
    B(p_j, R/3) and records the mass ratio on B(q_j, delta/lam).  With
    ``delta_cap`` the radius factor is lowered to ``eps_mass / sqrt(C2_emp)``
    when that is smaller.
    """
    a = default_a(u) if a is None else float(a)
    eps_frac = float(eps)
    eps_mass = eps_frac if eps_mass is None else float(eps_mass)
    _check_delta(delta, a)
    prep = _prepare(u, a, eps_frac, seed, threshold, c2, nodal_rel_tol)
    d_eff = min(delta, eps_mass / math.sqrt(prep.c2_emp)) if delta_cap else delta
    rows, r, vol_b = _mass_rows(prep, d_eff, eps_mass)
    J = prep.packing.J
    K = int(prep.selected.sum())
    sel_rows = [b for b in rows if b["selected"]]
    n_missing = sum(1 for b in sel_rows if not b["nodal_found"])
    summary = {
        "J": J, "K": K, "K_over_J": K / J, "K_min": _quantile_count(eps_frac, J),
        "R": prep.R, "r": r, "delta": d_eff, "delta_requested": delta, "threshold": prep.threshold,
        "C2_emp": prep.c2_emp, "nodal_found": len(sel_rows) - n_missing, "nodal_missing": n_missing,
        "J_ball_volume_over_vol": J * ball_volume(u.manifold, prep.R) / u.manifold.total_volume,
    }
    summary.update(_ball_stats(sel_rows, eps_mass, vol_b))
    if u.family == "highest_weight":
        summary.update(_strip_stats(prep))
    chain = [b["chain_ok"] for b in sel_rows if b["nodal_found"]]
    assertions = {
        "K_ge_quantile_bound": threshold != "quantile" or K >= summary["K_min"],
        "nodal_points_found": n_missing == 0,
        "mvt_chain": all(chain),
        "mass_bound_selected": summary["frac_rho_le_eps"] in (None, 1.0),
    }
    params = {"a": a, "eps_frac": eps_frac, "eps_mass": eps_mass, "delta": delta, "delta_cap": delta_cap,
              "threshold": threshold, "c2": c2, "seed": seed, "nodal_rel_tol": nodal_rel_tol}
    return ExperimentReport("smallmass", str(u.manifold), u.summary(), params, summary, rows,
                            diagnostics={"nodal_records": [rec.to_dict() for rec in prep.nodal.values()]},
                            assertions=assertions)


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def scale_sweep(u: EigenfunctionSpec, a: float | None = None, eps: float = 0.1,
                deltas=(0.4, 0.2, 0.1, 0.05), seed: int | None = 0, *, eps_mass: float | None = None,
                slope_tol: float = 0.3, nodal_rel_tol: float = NODAL_REL_TOL) -> ExperimentReport:
    """Max mass ratio over the selected nodal balls as the radius factor delta shrinks."""
    a = default_a(u) if a is None else float(a)
    eps_mass = float(eps) if eps_mass is None else float(eps_mass)
    deltas = [float(d) for d in deltas]
    if any(d1 <= d2 for d1, d2 in zip(deltas, deltas[1:])):
        raise ValueError(f"deltas must be strictly decreasing, got {deltas}")
    for d in deltas:
        _check_delta(d, a)
    prep = _prepare(u, a, float(eps), seed, rel_tol=nodal_rel_tol)
    vol_m = u.manifold.total_volume
    rows, balls = [], []
    for d in deltas:
        brows, r, vol_b = _mass_rows(prep, d, eps_mass)
        sel = [b for b in brows if b["selected"]]
        st = _ball_stats(sel, eps_mass, vol_b)
        bound = vol_m * prep.c2_emp / float(eps) * d * d
        rows.append({"delta": d, "r": r, "rho_max": st["rho_max"], "rho_median": st["rho_median"],
                     "n_balls": st["n_rho"], "chain_bound": bound,
                     "chain_ok": st["rho_max"] is not None and st["rho_max"] <= bound})
        balls.extend(brows)
    rmax = [r["rho_max"] for r in rows]
    ok = all(x is not None and x > 0 for x in rmax)
    slope = loglog_slope(deltas, rmax) if ok else None
    summary = {"J": prep.packing.J, "K": int(prep.selected.sum()), "R": prep.R, "C2_emp": prep.c2_emp,
               "threshold": prep.threshold, "slope": slope, "rho_max_smallest_delta": rmax[-1],
               "nodal_missing": sum(1 for j in np.flatnonzero(prep.selected)
                                    if not prep.nodal[int(j)].found)}
    assertions = {
        "chain_bound": all(r["chain_ok"] for r in rows),
        "monotone": ok and all(x2 <= x1 for x1, x2 in zip(rmax, rmax[1:])),
        "slope_2": slope is not None and abs(slope - 2.0) <= slope_tol,
        "rho_max_smallest_lt_eps": ok and rmax[-1] < eps_mass,
    }
    params = {"a": a, "eps_frac": float(eps), "eps_mass": eps_mass, "deltas": deltas, "seed": seed,
              "slope_tol": slope_tol, "nodal_rel_tol": nodal_rel_tol}
    return ExperimentReport("sweep", str(u.manifold), u.summary(), params, summary, balls, rows,
                            assertions=assertions)


# --- large values -------------------------------------------------------------------

def largevalue_experiment(u: EigenfunctionSpec, p, gammas=DEFAULT_GAMMAS,
                          eps: float = 0.1) -> ExperimentReport:
    """Mass concentration around a point where |u| is large.

    For each gamma: the mean of |u|^2 on B(p, gamma/lam) against gamma M^2,
    and on B(p, gamma M^(2/n) / lam) against 1/eps, where M = |u(p)|.
    """
    m = u.manifold
    c = reduce_point(m, p)
    M = abs(evaluate(u, c))
    n = m.dimension
    degenerate = u.eigenvalue_sq <= 0.0
    lam = 1.0 if degenerate else u.lam
    rows = []
    for g in gammas:
        g = float(g)
        row = {"gamma": g}
        r_gamma = g / lam
        r_gammaM = g * M ** (2.0 / n) / lam
        if r_gamma > m.injectivity_radius:
            row.update(skipped=True, r_gamma=r_gamma, r_gammaM=r_gammaM)
            rows.append(row)
            continue
        mr = local_mass_ratio(u, c, r_gamma, eps)
        sup_half = sup_on_ball("u", u, c, 0.5 * r_gamma) ** 2
        c_mv = mr.unnormalized / sup_half if sup_half > 0 else None
        row.update(skipped=False, r_gamma=r_gamma, ratio_gamma=mr.unnormalized, rho_gamma=mr.ratio, sup_half_sq=sup_half,
                   c_mv=c_mv, above_gamma_M2=mr.unnormalized >= g * M * M,
                   mv_ok=c_mv is not None and mr.unnormalized >= 0.5 * M * M * c_mv, r_gammaM=r_gammaM)
        if r_gammaM > m.injectivity_radius:
            row.update(gammaM_skipped=True)
        else:
            mr_big = local_mass_ratio(u, c, r_gammaM, eps)
            row.update(gammaM_skipped=False, ratio_gammaM=mr_big.unnormalized, rho_gammaM=mr_big.ratio,
                       above_inv_eps=mr_big.unnormalized >= 1.0 / eps,
                       reduction_ok=r_gammaM < r_gamma or mr_big.local_mass >= mr.local_mass * (1 - 1e-12))
        rows.append(row)
    ok_gamma = [r["gamma"] for r in rows if r.get("above_gamma_M2")]
    ok_inv_eps = [r["gamma"] for r in rows if r.get("above_inv_eps")]
    summary = {
        "M": M, "lambda": u.lam, "n": n, "point": c.tolist(), "M_ge_1": M >= 1.0, "degenerate": degenerate,
        "admissible_gamma": max(ok_gamma) if ok_gamma else None,
        "gamma_inv_eps": max(ok_inv_eps) if ok_inv_eps else None,
        "hormander_ratio": None if degenerate else M / lam ** ((n - 1) / 2.0),
        "skipped_gammas": [r["gamma"] for r in rows if r.get("skipped") or r.get("gammaM_skipped")],
    }
    assertions = {
        "mean_value_restatement": all(r.get("mv_ok", True) for r in rows),
        "gammaM_reduction": all(r.get("reduction_ok", True) for r in rows),
        "admissible_gamma_found": bool(ok_gamma),
    }
    return ExperimentReport("largevalue", str(m), u.summary(), {"gammas": [float(g) for g in gammas], "eps": eps},
                            summary, rows=rows, assertions=assertions)


def largest_value_point(u: EigenfunctionSpec):
    """Canonical point of large |u| for each family (dense search otherwise)."""
    if u.family == "zonal":
        return np.array([0.0, 0.0])
    if u.family == "highest_weight":
        return np.array([0.5 * math.pi, 0.5 * math.pi / u.params["k"]])
    if u.family == "circle":
        return np.array([u.params.get("phase", 0.0) / u.params["k"]])
    return global_sup("u", u)[1]


# --- highest weight example ---------------------------------------------------------

def highest_weight_example(k: int, delta: float = 1.0, mode: str = "equator", r_pole: float = 0.5,
                           center=None) -> dict:
    """Mass ratio of k^(1/4) sin^k(theta) sin(k phi) on an equatorial Planck ball or a polar cap."""
    u = highest_weight(k)
    if mode == "equator":
        if not 0.0 < delta <= 1.0:
            raise ValueError(f"equator mode needs 0 < delta <= 1, got {delta!r}")
        q = np.array([0.5 * math.pi, 0.5 * math.pi / k]) if center is None else reduce_point(SPHERE, center)
        if not abs(q[0] - 0.5 * math.pi) < 0.05 / math.sqrt(k):
            raise ValueError(f"equatorial center must satisfy |theta - pi/2| < k^(-1/2)/20, got theta={q[0]!r}")
        mr = local_mass_ratio(u, q, delta / k)
        return {"mode": "equator", "k": k, "delta": delta, "r": delta / k, "center": q.tolist(),
                "ratio": mr.unnormalized, "rho": mr.ratio, "ratio_over_sqrt_k": mr.unnormalized / math.sqrt(k)}
    if mode == "pole":
        if not 0.0 < r_pole < 0.5 * math.pi:
            raise ValueError(f"pole mode needs 0 < r < pi/2, got {r_pole!r}")
        mr = local_mass_ratio(u, [0.0, 0.0], r_pole)
        shape = k ** -0.5 * math.cos(r_pole) ** (k + 2) / r_pole**2
        return {"mode": "pole", "k": k, "r": r_pole, "center": [0.0, 0.0], "ratio": mr.unnormalized,
                "rho": mr.ratio, "bound_shape": shape}
    raise ValueError(f"mode must be 'equator' or 'pole', got {mode!r}")


def hwexample_experiment(ks=(16, 36, 64), delta: float = 1.0, r_pole: float = 0.5,
                         band: float = 2.0, decay: float = 0.1) -> ExperimentReport:
    ks = [int(k) for k in ks]
    eq = [highest_weight_example(k, delta, "equator") for k in ks]
    pole = [highest_weight_example(k, mode="pole", r_pole=r_pole) for k in ks]
    C = pole[0]["ratio"] / pole[0]["bound_shape"]
    for row in pole:
        row["bound"] = C * row["bound_shape"]
        row["bound_ok"] = row["ratio"] <= row["bound"] * (1.0 + 1e-12)
    norm = [r["ratio_over_sqrt_k"] for r in eq]
    spread = max(norm) / min(norm)
    summary = {"C_fit": C, "k_fit": ks[0], "equator_spread": spread,
               "pole_decay": pole[-1]["ratio"] / pole[0]["ratio"]}
    assertions = {
        "equator_band": spread <= band,
        "pole_bound": all(r["bound_ok"] for r in pole),
        "pole_decay": summary["pole_decay"] < decay,
    }
    params = {"ks": ks, "delta": delta, "r_pole": r_pole, "band": band, "decay": decay}
    return ExperimentReport("hwexample", "sphere", None, params, summary, rows=eq + pole,
                            assertions=assertions)


# --- mean value diagnostic and Weyl-type monitors -------------------------------------

def mean_value_diagnostic(u: EigenfunctionSpec, a: float | None = None, seed: int | None = 0) -> ExperimentReport:
    """Empirical constants sup_{B(p,2R/3)} |grad u|^2 * Vol(B(p,R)) / int_{B(p,R)} |grad u|^2 over a packing."""
    _require_lambda(u)
    a = default_a(u) if a is None else float(a)
    R = a / u.lam
    pk = maximal_disjoint_packing(u.manifold, R, seed)
    vol = ball_volume(u.manifold, R)

    def one(j):
        p = pk.centers[j]
        sup = sup_on_ball("grad", u, p, 2.0 * R / 3.0) ** 2
        integral = ball_integral(u, p, R, "g2")
        flat = integral < FLAT_BALL_REL * u.eigenvalue_sq
        return {"ball_index": j, "center": p.tolist(), "sup_grad_sq": sup, "grad_sq_integral": integral,
                "flat": flat, "C0": None if flat else sup * vol / integral}

    rows = _pmap(one, range(pk.J))
    c0 = np.array([r["C0"] for r in rows if r["C0"] is not None])
    summary = {"J": pk.J, "R": R, "C0_max": float(c0.max()), "C0_median": float(np.median(c0)),
               "C0_min": float(c0.min()), "flat_balls": sum(r["flat"] for r in rows)}
    return ExperimentReport("mvi", str(u.manifold), u.summary(), {"a": a, "seed": seed}, summary, rows=rows,
                            assertions={"C0_ge_1": bool(np.all(c0 >= 1.0))})


def mean_value_experiment(suite, a: float | None = None, seed: int | None = 0,
                          spread: float = 1.25) -> ExperimentReport:
    """Mean-value constants for several members; max C0 should agree within ``spread`` inside each family."""
    rows = []
    for u in suite:
        rep = mean_value_diagnostic(u, a, seed)
        rows.append(dict(label=u.label, family=u.family, lam=u.lam, **rep.summary,
                         all_ge_1=rep.assertions["C0_ge_1"]))
    assertions = {"C0_ge_1": all(r["all_ge_1"] for r in rows)}
    for fam in sorted({r["family"] for r in rows}):
        c0 = [r["C0_max"] for r in rows if r["family"] == fam]
        if len(c0) > 1:
            assertions[f"{fam}_C0_stable"] = max(c0) <= spread * min(c0)
    return ExperimentReport("mvi", "mixed", None, {"a": a, "seed": seed, "spread": spread},
                            {"members": len(rows)}, rows=rows, assertions=assertions)


def weyl_monitor(suite, growth: float = 1.5) -> ExperimentReport:
    """Global sups of |u| and |grad u| scaled by lam^((n-1)/2) and lam^((n+1)/2)."""
    rows = []
    for u in suite:
        _require_lambda(u)
        n = u.manifold.dimension
        su, _ = global_sup("u", u)
        sg, _ = global_sup("grad", u)
        su, sg = su / u.l2, sg / u.l2
        rows.append({"label": u.label, "family": u.family, "lambda": u.lam, "n": n, "sup_u": su,
                     "sup_grad": sg, "ratio_u": su / u.lam ** ((n - 1) / 2.0),
                     "ratio_grad": sg / u.lam ** ((n + 1) / 2.0), "saturating": u.family == "zonal"})
    assertions = {}
    for fam in sorted({r["family"] for r in rows}):
        grp = sorted((r for r in rows if r["family"] == fam), key=lambda r: r["lambda"])
        for col in ("ratio_u", "ratio_grad"):
            assertions[f"{fam}_{col}_bounded"] = grp[-1][col] <= growth * grp[0][col]
    return ExperimentReport("weyl", "mixed", None, {"growth": growth}, {"members": len(rows)}, rows=rows,
                            assertions=assertions)
