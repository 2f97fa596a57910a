"""Command-line runner: ``run``, ``plotdata`` and ``selftest``.

Exit status: 0 when every assertion passes, 2 when an assertion fails,
1 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import os
import re
import sys

from . import __version__, analysis
from .config import KINDS, ConfigError, ExperimentConfig, load_config
from .report import PLOT_KINDS, ExperimentReport, emit_plotdata

EXIT_OK, EXIT_CONFIG, EXIT_ASSERT = 0, 1, 2
ENV_THREADS = "PLANCK_LAB_THREADS"
ENV_OUTDIR = "PLANCK_LAB_OUTDIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", text).strip("_")


# flag name -> config field; values are parsed by ExperimentConfig.from_strings
_RUN_FLAGS = {
    "manifold": "manifold", "a": "a", "eps": "eps_frac", "eps_mass": "eps_mass", "delta": "delta",
    "deltas": "deltas", "threshold": "threshold", "c2": "c2", "gammas": "gammas", "point": "point",
    "ks": "ks", "r_pole": "r_pole", "order": "quad_order", "nodal_tol": "nodal_rel_tol",
    "probes": "n_probes", "seed": "seed", "outdir": "outdir", "format": "formats", "plot": "plots",
    "name": "name",
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="planck-lab", description="Planck-scale mass distribution experiments for Laplace eigenfunctions.")
    p.add_argument("--version", action="version", version=f"planck_lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one experiment kind")
    r.add_argument("kind", choices=KINDS)
    r.add_argument("--config", help="INI configuration file; flags override its values")
    r.add_argument("--family", action="append", help="family spec, e.g. zonal:l=20 (repeatable)")
    r.add_argument("--manifold", choices=("circle", "torus", "sphere"))
    r.add_argument("--a", help="packing radius factor, R = a/lambda")
    r.add_argument("--eps", help="fraction of excluded balls (also the mass threshold by default)")
    r.add_argument("--eps-mass", dest="eps_mass", help="mass threshold for rho")
    r.add_argument("--delta", help="Planck ball radius factor, r = delta/lambda")
    r.add_argument("--deltas", help="decreasing list for the sweep, e.g. '0.4 0.2 0.1 0.05'")
    r.add_argument("--delta-cap", dest="delta_cap", action="store_true", default=None,
                   help="lower delta to eps/sqrt(C2_emp) when that is smaller")
    r.add_argument("--threshold", choices=("quantile", "fixed"))
    r.add_argument("--c2", help="constant for the fixed threshold c2 lambda^2/eps")
    r.add_argument("--gammas", help="list of gamma values for largevalue")
    r.add_argument("--point", help="center for largevalue, chart coordinates")
    r.add_argument("--ks", help="degrees for hwexample")
    r.add_argument("--r-pole", dest="r_pole", help="polar cap radius for hwexample")
    r.add_argument("--order", help="global quadrature order for green")
    r.add_argument("--nodal-tol", dest="nodal_tol", help="relative residual tolerance of the nodal search")
    r.add_argument("--probes", help="number of covering probes for pack")
    r.add_argument("--seed", help="packing seed ('none' for the canonical grid)")
    r.add_argument("--outdir", help=f"artifact directory (default ${ENV_OUTDIR} or '.')")
    r.add_argument("--format", help="comma-separated subset of json,csv")
    r.add_argument("--plot", help=f"comma-separated plot data to emit: {','.join(PLOT_KINDS)}")
    r.add_argument("--name", help="artifact base name")
    r.add_argument("--threads", type=int, help=f"worker threads (default ${ENV_THREADS} or 1)")
    r.add_argument("--write-config", dest="write_config", help="write the resolved config to this file and exit")
    r.add_argument("--quiet", action="store_true")

    pd = sub.add_parser("plotdata", help="emit plot-ready CSV from a JSON report")
    pd.add_argument("report", help="JSON report written by 'run'")
    pd.add_argument("--kind", required=True, choices=PLOT_KINDS)
    pd.add_argument("--bins", type=int, default=20)
    pd.add_argument("-o", "--output", help="output file (default stdout)")

    st = sub.add_parser("selftest", help="run the acceptance criteria")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--outdir", help=f"artifact directory (default ${ENV_OUTDIR}/selftest or none)")
    st.add_argument("--criteria", help="comma-separated criterion numbers (default all)")
    st.add_argument("--threads", type=int)
    return p


def resolve_config(args) -> ExperimentConfig:
    """File values, then environment, then flags."""
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if os.environ.get(ENV_OUTDIR) and not args.outdir:
        cfg = cfg.merged(outdir=os.environ[ENV_OUTDIR])
    raw = {field: getattr(args, flag) for flag, field in _RUN_FLAGS.items() if getattr(args, flag) is not None}
    if args.family:
        raw["families"] = ";".join(args.family)
    flags = ExperimentConfig.from_strings(raw) if raw else None
    over = {k: getattr(flags, k) for k in raw} if flags else {}
    over["kind"] = args.kind
    if args.delta_cap:
        over["delta_cap"] = True
    return cfg.merged(**over)


def run_experiments(cfg: ExperimentConfig, fams=None) -> list[tuple[str, ExperimentReport]]:
    """Execute the configured experiment; returns (artifact base name, report) pairs."""
    fams = cfg.validate() if fams is None else fams
    k = cfg.kind
    base = cfg.name or k
    eps_mass = cfg.eps_mass
    out = []
    if k == "hwexample":
        out.append((base, analysis.hwexample_experiment(cfg.ks, cfg.delta, cfg.r_pole)))
    elif k == "mvi":
        out.append((base, analysis.mean_value_experiment(fams, cfg.a, cfg.seed)))
    elif k == "weyl":
        out.append((base, analysis.weyl_monitor(fams)))
    else:
        for u in fams:
            if k == "green":
                rep = analysis.green_experiment(u, cfg.quad_order)
            elif k == "pack":
                rep = analysis.packing_experiment(u, cfg.a, cfg.seed, cfg.n_probes)
            elif k == "smallmass":
                rep = analysis.smallmass_experiment(u, cfg.a, cfg.eps_frac, cfg.delta, cfg.seed, eps_mass=eps_mass,
                                                    delta_cap=cfg.delta_cap, threshold=cfg.threshold, c2=cfg.c2,
                                                    nodal_rel_tol=cfg.nodal_rel_tol)
            elif k == "sweep":
                rep = analysis.scale_sweep(u, cfg.a, cfg.eps_frac, cfg.deltas, cfg.seed, eps_mass=eps_mass,
                                           nodal_rel_tol=cfg.nodal_rel_tol)
            else:
                p = cfg.point if cfg.point is not None else analysis.largest_value_point(u)
                rep = analysis.largevalue_experiment(u, p, cfg.gammas, cfg.eps_frac)
            name = f"{base}_{slug(u.label)}" if len(fams) > 1 or not cfg.name else base
            out.append((name, rep))
    echo = cfg.to_dict()
    del echo["outdir"]
    for _, rep in out:
        rep.config = echo
    return out


def write_artifacts(cfg: ExperimentConfig, results) -> list[str]:
    os.makedirs(cfg.outdir, exist_ok=True)
    written = []

    def put(path, text):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(path)

    for name, rep in results:
        stem = os.path.join(cfg.outdir, name)
        if "json" in cfg.formats:
            put(stem + ".json", rep.to_json())
        if "csv" in cfg.formats:
            put(stem + ".csv", rep.to_csv())
        for kind in cfg.plots:
            put(f"{stem}_{kind}.csv", emit_plotdata(rep, kind))
    return written


_SUMMARY_KEYS = ("J", "K", "K_over_J", "rho_max", "delta", "C2_emp", "slope", "residual", "admissible_gamma",
                 "M", "equator_spread", "pole_decay", "members", "volume_fraction")


def _num(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}" if v != 0 and (abs(v) < 1e-3 or abs(v) >= 1e4) else f"{v:.4f}"
    return str(v)


def summary_lines(name: str, rep: ExperimentReport) -> list[str]:
    label = rep.family["label"] if rep.family else rep.manifold
    stats = "  ".join(f"{k}={_num(rep.summary[k])}" for k in _SUMMARY_KEYS if rep.summary.get(k) is not None)
    lines = [f"{rep.kind} {label}: {stats}" if stats else f"{rep.kind} {label}"]
    for key, ok in rep.assertions.items():
        lines.append(f"  {'PASS' if ok else 'FAIL'} {key}")
    return lines


def cmd_run(args) -> int:
    try:
        cfg = resolve_config(args)
        if args.write_config:
            cfg.validate()
            with open(args.write_config, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(cfg.to_ini())
            return EXIT_OK
        fams = cfg.validate()
    except ConfigError as exc:
        print(f"planck-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads:
        os.environ[ENV_THREADS] = str(args.threads)
    try:
        results = run_experiments(cfg, fams)
        paths = write_artifacts(cfg, results)
    except (ValueError, OSError) as exc:
        print(f"planck-lab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        for name, rep in results:
            print("\n".join(summary_lines(name, rep)))
        for p in paths:
            print(f"wrote {p}")
    return EXIT_OK if all(rep.passed for _, rep in results) else EXIT_ASSERT


def cmd_plotdata(args) -> int:
    try:
        with open(args.report, encoding="utf-8") as fh:
            rep = ExperimentReport.from_json(fh.read())
        text = emit_plotdata(rep, args.kind, args.bins)
    except (OSError, ValueError, KeyError) as exc:
        print(f"planck-lab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import CRITERIA, run_selftest
    try:
        crit = [int(c) for c in args.criteria.split(",")] if args.criteria else None
    except ValueError:
        print(f"planck-lab: config error: criteria: cannot parse {args.criteria!r}", file=sys.stderr)
        return EXIT_CONFIG
    if crit and any(c not in CRITERIA for c in crit):
        print(f"planck-lab: config error: criteria: choose from {sorted(CRITERIA)}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads:
        os.environ[ENV_THREADS] = str(args.threads)
    outdir = args.outdir
    if outdir is None and os.environ.get(ENV_OUTDIR):
        outdir = os.path.join(os.environ[ENV_OUTDIR], "selftest")
    results = run_selftest(outdir, args.seed, crit)
    n_ok = sum(r.passed for r in results)
    print(f"selftest: {n_ok}/{len(results)} criteria passed")
    return EXIT_OK if n_ok == len(results) else EXIT_ASSERT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return {"run": cmd_run, "plotdata": cmd_plotdata, "selftest": cmd_selftest}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
