"""Experiment configuration: INI file round-trip, family spec grammar and validation."""
from __future__ import annotations

import configparser
import io
import math
from dataclasses import asdict, dataclass, fields, replace

from .analysis import DEFAULT_A, DEFAULT_GAMMAS
from .eigenfunctions import (
    TORUS_PRESETS, EigenfunctionSpec, circle_mode, constant, highest_weight, random_sphere_mode,
    torus_mode, zonal_harmonic,
)
from .geometry import get_manifold
from .packing import NODAL_REL_TOL
from .report import PLOT_KINDS

KINDS = ("green", "pack", "smallmass", "sweep", "largevalue", "hwexample", "mvi", "weyl")
FORMATS = ("json", "csv")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# --- family grammar -----------------------------------------------------------------
#   family := name ":" param "=" value {"," param "=" value}

_FAMILY_PARAMS = {
    "cos": {"k": int, "phase": float},
    "torus": {"N": int, "preset": str, "seed": int},
    "zonal": {"l": int},
    "hw": {"k": int},
    "randsphere": {"l": int, "seed": int},
    "const": {"manifold": str},
}
_REQUIRED = {"cos": ("k",), "torus": ("N",), "zonal": ("l",), "hw": ("k",), "randsphere": ("l",),
             "const": ()}


def parse_family(text: str, manifold: str | None = None) -> EigenfunctionSpec:
    """Build an eigenfunction from a spec such as ``zonal:l=20`` or ``torus:N=25,preset=random,seed=7``."""
    text = text.strip()
    name, _, rest = text.partition(":")
    name = name.strip()
    if name not in _FAMILY_PARAMS:
        raise ConfigError("family", f"unknown family {name!r} in {text!r}; expected one of {sorted(_FAMILY_PARAMS)}")
    allowed = _FAMILY_PARAMS[name]
    kw = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        key = key.strip()
        if not eq or key not in allowed:
            raise ConfigError("family", f"bad parameter {item!r} in {text!r}; {name} takes {sorted(allowed)}")
        try:
            kw[key] = allowed[key](val.strip())
        except ValueError:
            raise ConfigError("family", f"{key}={val.strip()!r} in {text!r} is not a valid {allowed[key].__name__}")
    missing = [k for k in _REQUIRED[name] if k not in kw]
    if missing:
        raise ConfigError("family", f"{text!r} is missing {missing}")
    try:
        if name == "cos":
            return circle_mode(kw["k"], kw.get("phase", 0.0))
        if name == "torus":
            preset = kw.get("preset", "full")
            if preset not in TORUS_PRESETS:
                raise ConfigError("family", f"preset {preset!r} in {text!r}; expected one of {TORUS_PRESETS}")
            return torus_mode(kw["N"], preset, kw.get("seed", 0))
        if name == "zonal":
            return zonal_harmonic(kw["l"])
        if name == "hw":
            return highest_weight(kw["k"])
        if name == "randsphere":
            return random_sphere_mode(kw["l"], kw.get("seed", 0))
        return constant(get_manifold(kw.get("manifold", manifold or "sphere")))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("family", f"{text!r}: {exc}") from None


# --- config ---------------------------------------------------------------------------

def _floats(text) -> tuple:
    if isinstance(text, str):
        text = [t for t in text.replace(",", " ").split() if t]
    return tuple(float(t) for t in text)


def _ints(text) -> tuple:
    if isinstance(text, str):
        text = [t for t in text.replace(",", " ").split() if t]
    return tuple(int(t) for t in text)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "smallmass"
    manifold: str | None = None
    families: tuple = ()
    a: float | None = None
    eps_frac: float = 0.1
    eps_mass: float | None = None
    delta: float = 0.3
    deltas: tuple = (0.4, 0.2, 0.1, 0.05)
    delta_cap: bool = False
    threshold: str = "quantile"
    c2: float | None = None
    gammas: tuple = DEFAULT_GAMMAS
    point: tuple | None = None
    ks: tuple = (16, 36, 64)
    r_pole: float = 0.5
    quad_order: int | None = None
    nodal_rel_tol: float = NODAL_REL_TOL
    n_probes: int = 10_000
    seed: int | None = 0
    outdir: str = "."
    formats: tuple = FORMATS
    plots: tuple = ()
    name: str | None = None

    # -- serialization

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError(extra[0], "unknown configuration key")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kw)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        sections = {"experiment": ("kind", "manifold", "families", "seed", "name"),
                    "parameters": ("a", "eps_frac", "eps_mass", "delta", "deltas", "delta_cap", "threshold",
                                   "c2", "gammas", "point", "ks", "r_pole", "quad_order", "nodal_rel_tol",
                                   "n_probes"),
                    "output": ("outdir", "formats", "plots")}
        for sec, keys in sections.items():
            cp[sec] = {}
            for k in keys:
                v = getattr(self, k)
                if v is None:
                    if k == "seed":
                        cp[sec][k] = "none"
                    continue
                if k == "families":
                    cp[sec][k] = "; ".join(v)
                elif isinstance(v, tuple):
                    cp[sec][k] = " ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
                elif isinstance(v, bool):
                    cp[sec][k] = "true" if v else "false"
                else:
                    cp[sec][k] = repr(v) if isinstance(v, float) else str(v)
        out = io.StringIO()
        cp.write(out)
        return out.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("config", f"unreadable file ({exc.__class__.__name__}: {exc})") from None
        raw = {}
        for sec in cp.sections():
            for k, v in cp[sec].items():
                raw[k] = v
        return cls.from_strings(raw)

    @classmethod
    def from_strings(cls, raw: dict) -> "ExperimentConfig":
        """Typed config from string values (file entries or command-line flags)."""
        conv = {
            "kind": str, "manifold": str, "name": str, "threshold": str, "outdir": str,
            "families": lambda s: tuple(t.strip() for t in s.split(";") if t.strip()),
            "a": float, "eps_frac": float, "eps_mass": float, "delta": float, "c2": float, "r_pole": float,
            "nodal_rel_tol": float, "deltas": _floats, "gammas": _floats, "point": _floats, "ks": _ints,
            "quad_order": int, "n_probes": int, "seed": lambda s: None if s.lower() == "none" else int(s),
            "delta_cap": _bool,
            "formats": lambda s: tuple(t for t in s.replace(",", " ").split() if t),
            "plots": lambda s: tuple(t for t in s.replace(",", " ").split() if t),
        }
        kw = {}
        for k, v in raw.items():
            if k not in conv:
                raise ConfigError(k, "unknown configuration key")
            try:
                kw[k] = conv[k](v) if isinstance(v, str) else v
            except ValueError:
                raise ConfigError(k, f"cannot parse {v!r}") from None
        return cls(**kw)

    def merged(self, **overrides) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    # -- validation

    def resolve_families(self) -> list[EigenfunctionSpec]:
        return [parse_family(f, self.manifold) for f in self.families]

    def validate(self) -> list[EigenfunctionSpec]:
        """Check every precondition before any computation; returns the parsed families."""
        if self.kind not in KINDS:
            raise ConfigError("kind", f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.manifold is not None:
            try:
                get_manifold(self.manifold)
            except ValueError as exc:
                raise ConfigError("manifold", str(exc)) from None
        fams = self.resolve_families()
        if self.kind != "hwexample" and not fams:
            raise ConfigError("families", f"experiment {self.kind!r} needs at least one family")
        for u in fams:
            if self.manifold is not None and str(u.manifold) != get_manifold(self.manifold).kind.value:
                raise ConfigError("families", f"{u.label} lives on the {u.manifold}, not the {self.manifold}")
            if self.kind not in ("largevalue",) and u.eigenvalue_sq <= 0.0:
                raise ConfigError("families", f"{u.label}: experiment {self.kind!r} needs lambda^2 > 0")
        if not 0.0 < self.eps_frac < 1.0:
            raise ConfigError("eps_frac", f"{self.eps_frac!r} must lie in (0, 1)")
        if self.eps_mass is not None and not self.eps_mass > 0.0:
            raise ConfigError("eps_mass", f"{self.eps_mass!r} must be positive")
        if self.a is not None and not self.a > 0.0:
            raise ConfigError("a", f"{self.a!r} must be positive")
        for u in fams:
            if self.kind in ("pack", "smallmass", "sweep", "mvi"):
                a = self.a if self.a is not None else DEFAULT_A[u.manifold.kind]
                if a / u.lam > 0.5 * u.manifold.injectivity_radius:
                    raise ConfigError("a", f"R = a/lambda = {a / u.lam:.4g} for {u.label} exceeds pi/2")
                if self.kind == "smallmass" and not 0.0 < self.delta <= a / 3.0:
                    raise ConfigError("delta", f"precondition 0 < delta <= a/3 violated: delta={self.delta!r}, a/3={a / 3.0!r}")
                if self.kind == "sweep":
                    ds = self.deltas
                    if not ds or any(d1 <= d2 for d1, d2 in zip(ds, ds[1:])):
                        raise ConfigError("deltas", f"{list(ds)} must be non-empty and strictly decreasing")
                    if not all(0.0 < d <= a / 3.0 for d in ds):
                        raise ConfigError("deltas", f"precondition 0 < delta <= a/3 = {a / 3.0!r} violated by {list(ds)}")
        if self.threshold not in ("quantile", "fixed"):
            raise ConfigError("threshold", f"{self.threshold!r}; expected 'quantile' or 'fixed'")
        if self.threshold == "fixed" and (self.c2 is None or self.c2 <= 0.0):
            raise ConfigError("c2", "the fixed threshold needs a positive c2")
        if self.kind == "largevalue":
            if not self.gammas or any(g <= 0.0 for g in self.gammas):
                raise ConfigError("gammas", f"{list(self.gammas)} must be non-empty and positive")
            if self.point is not None:
                dims = {u.manifold.chart_dim for u in fams}
                if dims != {len(self.point)}:
                    raise ConfigError("point", f"{list(self.point)} has the wrong number of coordinates")
        if self.kind == "hwexample":
            if not self.ks or any(k < 1 for k in self.ks):
                raise ConfigError("ks", f"{list(self.ks)} must be positive integers")
            if not 0.0 < self.delta <= 1.0:
                raise ConfigError("delta", f"equatorial balls need 0 < delta <= 1, got {self.delta!r}")
            if not 0.0 < self.r_pole < 0.5 * math.pi:
                raise ConfigError("r_pole", f"{self.r_pole!r} must lie in (0, pi/2)")
        if self.quad_order is not None and self.quad_order < 2:
            raise ConfigError("quad_order", f"{self.quad_order!r} must be at least 2")
        if not self.nodal_rel_tol > 0.0:
            raise ConfigError("nodal_rel_tol", f"{self.nodal_rel_tol!r} must be positive")
        if self.n_probes < 1:
            raise ConfigError("n_probes", f"{self.n_probes!r} must be positive")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad or not self.formats:
            raise ConfigError("formats", f"{list(self.formats)}; expected a subset of {FORMATS}")
        bad = [p for p in self.plots if p not in PLOT_KINDS]
        if bad:
            raise ConfigError("plots", f"unknown plot kinds {bad}; expected a subset of {PLOT_KINDS}")
        return fams


def _bool(s: str) -> bool:
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path!r}: {exc.strerror}") from None
    return ExperimentConfig.from_ini(text)
