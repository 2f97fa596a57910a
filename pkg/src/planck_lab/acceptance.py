"""Acceptance suite: one function per criterion, plus the ``selftest`` driver.

Every criterion returns a :class:`CriterionResult` whose ``data`` is fully
deterministic for a given seed; wall-clock times are kept apart so the
artifacts written by :func:`run_selftest` are byte-reproducible.
"""
from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .eigenfunctions import (
    TORUS_PRESETS, circle_mode, evaluate, gradient, random_sphere_mode, torus_mode, zonal_harmonic,
    highest_weight,
)
from .geometry import Kind, exp_map, reduce_point, uniform_sample
from .packing import find_nodal_point, maximal_disjoint_packing, verify_packing
from .report import clean

# the calibrated radius factors the criteria are stated with
ACCEPT_A = {Kind.CIRCLE: 5.0, Kind.TORUS: 5.0, Kind.SPHERE: 8.0}
EPS = 0.1
N_PROBES = 10_000
N_FD_POINTS = 100


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}  {self.title}: {self.detail}"


def suite(seed: int = 0) -> list:
    """Circle k = 10..50, zonal and random sphere l = 10..40, torus N in {25, 100, 625} x presets."""
    out = [circle_mode(k) for k in range(10, 51, 10)]
    out += [zonal_harmonic(ell) for ell in (10, 20, 30, 40)]
    out += [random_sphere_mode(ell, seed) for ell in (10, 20, 30, 40)]
    out += [torus_mode(N, preset, seed) for N in (25, 100, 625) for preset in TORUS_PRESETS]
    return out


def accept_a(u) -> float:
    return ACCEPT_A[u.manifold.kind]


def _family_group(u) -> str:
    return u.family if u.family != "torus" else f"torus:{u.params['preset']}"


# --- criteria ---------------------------------------------------------------------

def criterion_1(seed: int = 0) -> CriterionResult:
    members = suite(seed) + [highest_weight(16)]
    rows, times = [], {}
    ok = True
    for u in members:
        t0 = time.perf_counter()
        rep = analysis.green_experiment(u)
        grp = _family_group(u)
        times[grp] = times.get(grp, 0.0) + time.perf_counter() - t0
        s = rep.summary
        rows.append({"label": u.label, "residual": s["residual"], "tolerance": rep.params["tolerance"],
                     "grad_l1": s["grad_l1"], "grad_l1_bound": s["grad_l1_bound"], "passed": rep.passed})
        ok &= rep.passed
    slow = {g: t for g, t in times.items() if t >= 10.0}
    worst = max(rows, key=lambda r: r["residual"] / r["tolerance"])
    detail = f"{sum(r['passed'] for r in rows)}/{len(rows)} members; worst {worst['label']} residual {worst['residual']:.2e}"
    if slow:
        detail += f"; families over 10 s: {sorted(slow)}"
    return CriterionResult(1, "Green identity and L1 gradient bound", ok and not slow, detail, {"rows": rows})


_PACKINGS: dict = {}


def _packing(m, R, seed):
    key = (m.kind, R, seed)
    if key not in _PACKINGS:
        _PACKINGS[key] = maximal_disjoint_packing(m, R, seed)
    return _PACKINGS[key]


def criterion_2(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rows = []
    for u in suite(seed):
        R = accept_a(u) / u.lam
        pk = _packing(u.manifold, R, seed)
        missing = [j for j, c in enumerate(pk.centers) if not find_nodal_point(u, c, R / 3.0, j).found]
        rows.append({"label": u.label, "a": accept_a(u), "R": R, "J": pk.J, "missing": missing})
    elapsed = time.perf_counter() - t0
    bad = [r for r in rows if r["missing"]]
    n_balls = sum(r["J"] for r in rows)
    n_miss = sum(len(r["missing"]) for r in rows)
    detail = f"{n_balls - n_miss}/{n_balls} balls have a zero within R/3"
    if bad:
        detail += "; misses in " + ", ".join(f"{r['label']} ({len(r['missing'])}/{r['J']})" for r in bad)
    if elapsed >= 120.0:
        detail += f"; runtime {elapsed:.0f} s over 2 min"
    return CriterionResult(2, "Nodal point in every packed ball", not bad and elapsed < 120.0, detail,
                           {"rows": rows})


def criterion_3(seed: int = 0) -> CriterionResult:
    keys = sorted({(u.manifold.kind.value, accept_a(u) / u.lam) for u in suite(seed)})
    rows = []
    for kind, R in keys:
        u_m = next(u.manifold for u in suite(seed) if u.manifold.kind.value == kind)
        chk = verify_packing(_packing(u_m, R, seed), N_PROBES, seed)
        chk["passed"] = chk["separated"] and chk["covering"] and chk["volume_ok"]
        rows.append(chk)
    ok = all(r["passed"] for r in rows)
    detail = (f"{sum(r['passed'] for r in rows)}/{len(rows)} packings; min sep/2R "
              f"{min(r['min_separation_over_2R'] for r in rows):.4f}, max probe dist/2R "
              f"{max(r['max_probe_distance_over_2R'] for r in rows):.4f}, max J Vol(B)/Vol(M) "
              f"{max(r['volume_fraction'] for r in rows):.3f}")
    return CriterionResult(3, "Packing separation, covering and volume", ok, detail, {"rows": rows})


def criterion_4(seed: int = 0) -> CriterionResult:
    rows = []
    for u in suite(seed):
        a = accept_a(u)
        rep = analysis.smallmass_experiment(u, a, EPS, 0.3 * a / 3.0, seed, delta_cap=True)
        s = rep.summary
        found = [b for b in rep.balls if b["selected"] and b["nodal_found"]]
        frac = float(np.mean([b["rho"] <= EPS for b in found])) if found else 0.0
        row = {"label": u.label, "delta": s["delta"], "C2_emp": s["C2_emp"], "K_over_J": s["K_over_J"],
               "frac_rho_le_eps": frac, "rho_max": s["rho_max"], "n_found": len(found)}
        ok = s["K_over_J"] >= 0.9 and frac >= 0.99
        if u.family == "circle":
            d = s["delta"]
            exact = 1.0 - math.sin(2.0 * d) / (2.0 * d)
            err = max(abs(b["rho"] - exact) for b in found) if found else math.inf
            row.update(closed_form=exact, closed_form_error=err)
            ok &= err <= 1e-6
        row["passed"] = ok
        rows.append(row)
    bad = [r for r in rows if not r["passed"]]
    detail = f"{len(rows) - len(bad)}/{len(rows)} members"
    if bad:
        detail += "; failing " + ", ".join(
            f"{r['label']} (delta {r['delta']:.3f}, rho_max {r['rho_max']:.4f}, frac {r['frac_rho_le_eps']:.2f})"
            for r in bad)
    return CriterionResult(4, "Small mass on nodal Planck balls", not bad, detail, {"rows": rows})


SWEEP_DELTAS = (0.4, 0.2, 0.1, 0.05)


def criterion_5(seed: int = 0) -> CriterionResult:
    rows = []
    for u in suite(seed):
        rep = analysis.scale_sweep(u, accept_a(u), EPS, SWEEP_DELTAS, seed)
        s = rep.summary
        ok = s["slope"] is not None and abs(s["slope"] - 2.0) <= 0.3 and s["rho_max_smallest_delta"] < 0.01
        rows.append({"label": u.label, "slope": s["slope"], "rho_max": [r["rho_max"] for r in rep.rows],
                     "passed": ok})
    bad = [r for r in rows if not r["passed"]]
    slopes = [r["slope"] for r in rows if r["slope"] is not None]
    detail = f"{len(rows) - len(bad)}/{len(rows)} members; slopes in [{min(slopes):.3f}, {max(slopes):.3f}]"
    if bad:
        detail += "; failing " + ", ".join(r["label"] for r in bad)
    return CriterionResult(5, "Quadratic decay of the max mass ratio", not bad, detail, {"rows": rows})


def criterion_6(seed: int = 0) -> CriterionResult:
    rows = []
    for ell in (20, 50):
        u = zonal_harmonic(ell)
        rep = analysis.largevalue_experiment(u, [0.0, 0.0], analysis.DEFAULT_GAMMAS, EPS)
        g = rep.summary["admissible_gamma"]
        at = next((r for r in rep.rows if r["gamma"] == g), None)
        rows.append({"label": u.label, "M": rep.summary["M"], "admissible_gamma": g,
                     "mv_ok_all": rep.assertions["mean_value_restatement"],
                     "ratio_at_gamma": None if at is None else at["ratio_gamma"],
                     "gamma_M2": None if g is None else g * rep.summary["M"] ** 2,
                     "c_mv": [r.get("c_mv") for r in rep.rows]})
    g20, g50 = rows[0]["admissible_gamma"], rows[1]["admissible_gamma"]
    stable = g20 is not None and g50 is not None and abs(g50 - g20) <= 0.25 * g20
    ok = stable and all(r["mv_ok_all"] for r in rows)
    detail = f"admissible gamma {g20} (l=20), {g50} (l=50); mean-value restatement {'holds' if ok else 'fails'}"
    return CriterionResult(6, "Mass near the zonal maximum", ok, detail, {"rows": rows})


def criterion_7(seed: int = 0) -> CriterionResult:
    rows, passing = [], None
    for k in (16, 36, 64):
        u = highest_weight(k)
        p = [0.5 * math.pi, 0.5 * math.pi / k]
        rep = analysis.largevalue_experiment(u, p, analysis.DEFAULT_GAMMAS, EPS)
        ok_g = {r["gamma"] for r in rep.rows if r.get("above_inv_eps")}
        passing = ok_g if passing is None else passing & ok_g
        best = max((r["ratio_gammaM"] for r in rep.rows if "ratio_gammaM" in r), default=None)
        rows.append({"k": k, "M": rep.summary["M"], "max_ratio": best, "sup_u_sq": math.sqrt(k),
                     "gammas_ok": sorted(ok_g)})
    ok = bool(passing)
    detail = (f"common gamma {min(passing)}" if ok else
              "no gamma reaches 1/eps = 10; max ratios " + ", ".join(f"k={r['k']}: {r['max_ratio']:.3f}" for r in rows)
              + " (bounded by sup|u|^2 = sqrt(k))")
    return CriterionResult(7, "Mass above 1/eps near highest weight maxima", ok, detail,
                           {"rows": rows, "common_gammas": sorted(passing or [])})


def criterion_8(seed: int = 0) -> CriterionResult:
    rep = analysis.hwexample_experiment((16, 36, 64), delta=1.0, r_pole=0.5, band=2.0, decay=0.1)
    s = rep.summary
    detail = (f"equator spread {s['equator_spread']:.3f} (<= 2), pole bound "
              f"{'holds' if rep.assertions['pole_bound'] else 'violated'}, ratio(64)/ratio(16) {s['pole_decay']:.2e}")
    return CriterionResult(8, "Highest weight equator band and pole decay", rep.passed, detail,
                           {"summary": s, "rows": rep.rows, "assertions": rep.assertions})


def fd_families(seed: int = 0) -> list:
    return [circle_mode(20, 0.3), torus_mode(25, "full", seed), torus_mode(25, "pair", seed),
            torus_mode(25, "random", seed), torus_mode(625, "random", seed), zonal_harmonic(20),
            random_sphere_mode(30, seed), highest_weight(16)]


def fd_gradient_error(u, pts) -> np.ndarray:
    """Relative error of the analytic gradient against central differences along the frame."""
    m = u.manifold
    h = 1e-4 / u.lam
    g, gn = gradient(u, pts)
    n_dirs = 1 if m.kind is Kind.CIRCLE else 2
    err = np.zeros(len(pts))
    for d in range(n_dirs):
        psi = 0.5 * math.pi * d
        fwd = np.stack([exp_map(m, p, h, psi) for p in pts])
        bwd = np.stack([exp_map(m, p, h, psi + math.pi) for p in pts])
        fd = (evaluate(u, fwd) - evaluate(u, bwd)) / (2.0 * h)
        err += (fd - g[:, d]) ** 2
    return np.sqrt(err) / np.maximum(gn, 1e-300)


def criterion_9(seed: int = 0) -> CriterionResult:
    rows = []
    for i, u in enumerate(fd_families(seed)):
        pts = reduce_point(u.manifold, uniform_sample(u.manifold, N_FD_POINTS, seed + i))
        e = fd_gradient_error(u, pts)
        rows.append({"label": u.label, "max_rel_error": float(e.max()), "passed": bool(e.max() < 1e-6)})
    ok = all(r["passed"] for r in rows)
    worst = max(rows, key=lambda r: r["max_rel_error"])
    detail = f"{sum(r['passed'] for r in rows)}/{len(rows)} families; worst {worst['label']} {worst['max_rel_error']:.2e}"
    return CriterionResult(9, "Analytic gradients against central differences", ok, detail, {"rows": rows})


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


def run_criterion(n: int, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[n](seed)
    res.seconds = time.perf_counter() - t0
    return res


def run_selftest(outdir: str | None, seed: int = 0, criteria=None, echo=print) -> list[CriterionResult]:
    """Run the criteria, print one line each and write ``criterion_NN.json`` plus ``selftest.json``."""
    criteria = sorted(criteria or CRITERIA)
    results = []
    for n in criteria:
        res = run_criterion(n, seed)
        results.append(res)
        if echo:
            echo(f"{res.line()}  [{res.seconds:.1f} s]")
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        for res in results:
            _write_json(os.path.join(outdir, f"criterion_{res.number:02d}.json"),
                        {"number": res.number, "title": res.title, "passed": res.passed,
                         "detail": res.detail, "seed": seed, "data": res.data})
        _write_json(os.path.join(outdir, "selftest.json"),
                    {"seed": seed, "results": {str(r.number): r.passed for r in results}})
    return results


def _write_json(path, obj):
    from . import __version__
    obj = dict(obj, tool="planck_lab", tool_version=__version__)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(clean(obj), indent=1, sort_keys=True, allow_nan=False) + "\n")
