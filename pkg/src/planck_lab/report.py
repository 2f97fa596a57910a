"""Experiment reports and their JSON / CSV / plot-data serializations."""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__

SCHEMA_VERSION = 1

BALL_COLUMNS = ("ball_index", "center_1", "center_2", "R", "r", "g_j", "selected", "nodal_found",
                "q_1", "q_2", "local_mass", "rho", "classification", "rho_center")


def clean(obj):
    """Convert numpy scalars/arrays to plain Python; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def fmt(x) -> str:
    """Shortest round-trip text for one CSV cell."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return repr(x) if math.isfinite(x) else ""
    return str(x)


@dataclass
class ExperimentReport:
    kind: str
    manifold: str
    family: dict | None
    params: dict
    summary: dict = field(default_factory=dict)
    balls: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    assertions: dict = field(default_factory=dict)
    config: dict | None = None

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())

    def to_dict(self) -> dict:
        return clean({
            "schema_version": SCHEMA_VERSION,
            "tool": "planck_lab",
            "tool_version": __version__,
            "kind": self.kind,
            "manifold": self.manifold,
            "family": self.family,
            "params": self.params,
            "config": self.config,
            "summary": self.summary,
            "assertions": self.assertions,
            "diagnostics": self.diagnostics,
            "rows": self.rows,
            "balls": self.balls,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version {d.get('schema_version')!r}")
        return cls(d["kind"], d["manifold"], d.get("family"), d.get("params", {}), d.get("summary", {}),
                   d.get("balls", []), d.get("rows", []), d.get("diagnostics", {}),
                   d.get("assertions", {}), d.get("config"))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """Per-ball table when the report has balls, otherwise its row table."""
        if self.balls:
            return _csv(BALL_COLUMNS, [_ball_cells(b) for b in self.balls], self._header())
        if not self.rows:
            return self._header()
        cols = list(self.rows[0].keys())
        return _csv(cols, [[r.get(c) for c in cols] for r in self.rows], self._header())

    def _header(self) -> str:
        label = self.family["label"] if self.family else self.manifold
        return f"# planck_lab {__version__} {self.kind} {label}\n"


def _split(pt):
    if pt is None:
        return None, None
    pt = list(pt)
    return pt[0], (pt[1] if len(pt) > 1 else None)


def _ball_cells(b: dict) -> list:
    c1, c2 = _split(b.get("center"))
    q1, q2 = _split(b.get("q"))
    return [b.get("ball_index"), c1, c2, b.get("R"), b.get("r"), b.get("g_j"), b.get("selected"),
            b.get("nodal_found"), q1, q2, b.get("local_mass"), b.get("rho"), b.get("classification"),
            b.get("rho_center")]


def _csv(columns, rows, header: str = "") -> str:
    out = io.StringIO()
    out.write(header)
    out.write(",".join(columns) + "\n")
    for r in rows:
        out.write(",".join(fmt(x) for x in r) + "\n")
    return out.getvalue()


PLOT_KINDS = ("rho_vs_delta", "rho_histogram", "ratio_vs_k")


def emit_plotdata(report: ExperimentReport, kind: str, bins: int = 20) -> str:
    """Two- or three-column CSV for plotting, with a leading ``# columns:`` comment."""
    if kind == "rho_vs_delta":
        if report.kind != "sweep":
            raise ValueError(f"rho_vs_delta needs a sweep report, got {report.kind!r}")
        pairs = sorted((r["delta"], r["rho_max"]) for r in report.rows if r.get("rho_max") is not None)
        return _csv(("delta", "rho_max"), pairs, "# columns: delta, rho_max (max normalized mass ratio over selected balls)\n")
    if kind == "rho_histogram":
        # sweep reports repeat each ball once per delta; the first (largest delta) row counts
        first = {}
        for b in report.balls:
            first.setdefault(b.get("ball_index"), b)
        vals = [b.get("rho_center") for b in first.values()]
        if not first or any(v is None for v in vals):
            raise ValueError(f"rho_histogram needs a report with per-ball rho_center, got {report.kind!r}")
        counts, edges = np.histogram(np.asarray(vals, dtype=float), bins=bins)
        rows = [(edges[i], edges[i + 1], int(counts[i])) for i in range(len(counts))]
        return _csv(("bin_lo", "bin_hi", "count"), rows,
                    "# columns: bin_lo, bin_hi, count (rho at packed ball centers; counts sum to J)\n")
    if kind == "ratio_vs_k":
        rows = [r for r in report.rows if r.get("mode") == "equator"]
        if report.kind != "hwexample" or not rows:
            raise ValueError(f"ratio_vs_k needs an hwexample report with equator rows, got {report.kind!r}")
        pairs = sorted((r["k"], r["ratio_over_sqrt_k"]) for r in rows)
        return _csv(("k", "ratio_over_sqrt_k"), pairs, "# columns: k, ratio/sqrt(k) (equatorial Planck balls)\n")
    raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
