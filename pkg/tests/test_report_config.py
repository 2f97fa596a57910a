import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from planck_lab.analysis import hwexample_experiment, scale_sweep, smallmass_experiment
from planck_lab.config import ConfigError, ExperimentConfig, load_config, parse_family
from planck_lab.eigenfunctions import circle_mode, zonal_harmonic
from planck_lab.report import BALL_COLUMNS, ExperimentReport, clean, emit_plotdata, fmt


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_is_shortest_round_trip(x):
    assert float(fmt(x)) == x
    assert fmt(np.float64(x)) == fmt(x)


def test_fmt_special_values():
    assert fmt(None) == "" and fmt(math.inf) == "" and fmt(math.nan) == ""
    assert fmt(True) == "1" and fmt(np.bool_(False)) == "0" and fmt(np.int64(7)) == "7"


def test_clean_converts_numpy():
    out = clean({"a": np.arange(3), "b": (np.float32(0.5), np.inf), 3: np.bool_(True)})
    assert out == {"a": [0, 1, 2], "b": [0.5, None], "3": True}
    assert type(out["a"][0]) is int


@pytest.fixture(scope="module")
def circle_report():
    return smallmass_experiment(circle_mode(20), 5, 0.1, 0.3, 0)


def test_report_json_round_trip(circle_report):
    text = circle_report.to_json()
    back = ExperimentReport.from_json(text)
    assert back.to_json() == text
    assert back.passed == circle_report.passed


def test_report_rejects_other_schema(circle_report):
    d = circle_report.to_dict()
    d["schema_version"] = 99
    with pytest.raises(ValueError, match="schema"):
        ExperimentReport.from_dict(d)


def test_report_csv_columns(circle_report):
    lines = circle_report.to_csv().splitlines()
    assert lines[0].startswith("# planck_lab") and "cos:k=20" in lines[0]
    assert lines[1].split(",") == list(BALL_COLUMNS)
    body = [ln.split(",") for ln in lines[2:]]
    assert len(body) == circle_report.summary["J"]
    for row, ball in zip(body, circle_report.balls):
        assert float(row[BALL_COLUMNS.index("rho")]) == ball["rho"]
        assert row[BALL_COLUMNS.index("center_2")] == ""


def test_plotdata_sweep_and_histogram():
    rep = scale_sweep(circle_mode(10), 5, 0.1)
    lines = emit_plotdata(rep, "rho_vs_delta").splitlines()
    assert lines[0].startswith("# columns:")
    pairs = [tuple(map(float, ln.split(","))) for ln in lines[2:]]
    assert [d for d, _ in pairs] == sorted([0.4, 0.2, 0.1, 0.05])
    assert all(r > 0 for _, r in pairs)
    hist = [ln.split(",") for ln in emit_plotdata(rep, "rho_histogram", 5).splitlines()[2:]]
    assert sum(int(c) for _, _, c in hist) == rep.summary["J"]


def test_plotdata_ratio_vs_k():
    rows = emit_plotdata(hwexample_experiment(), "ratio_vs_k").splitlines()[2:]
    assert [int(r.split(",")[0]) for r in rows] == [16, 36, 64]


def test_plotdata_incompatible(circle_report):
    with pytest.raises(ValueError):
        emit_plotdata(circle_report, "rho_vs_delta")
    with pytest.raises(ValueError):
        emit_plotdata(circle_report, "ratio_vs_k")
    with pytest.raises(ValueError):
        emit_plotdata(circle_report, "scatter")


# --- config ----------------------------------------------------------------------------

@pytest.mark.parametrize("text, label", [
    ("zonal:l=20", "zonal:l=20"),
    (" torus:N=25,preset=random,seed=7 ", "torus:N=25,preset=random,seed=7"),
    ("hw:k=16", "hw:k=16"),
    ("const:manifold=torus", "const:manifold=torus"),
])
def test_parse_family(text, label):
    assert parse_family(text).label == label


@pytest.mark.parametrize("text", ["bessel:n=1", "zonal", "zonal:l=x", "zonal:m=3", "torus:N=3",
                                  "torus:N=25,preset=odd", "cos:k"])
def test_parse_family_errors_name_field(text):
    with pytest.raises(ConfigError) as exc:
        parse_family(text)
    assert exc.value.field == "family"


configs = st.builds(
    ExperimentConfig,
    kind=st.sampled_from(["smallmass", "sweep", "green", "pack"]),
    manifold=st.sampled_from([None, "sphere"]),
    families=st.lists(st.sampled_from(["zonal:l=20", "randsphere:l=12,seed=3"]), min_size=1, max_size=2).map(tuple),
    a=st.one_of(st.none(), st.floats(1.0, 10.0)),
    eps_frac=st.floats(0.01, 0.9),
    eps_mass=st.one_of(st.none(), st.floats(0.001, 1.0)),
    delta=st.floats(0.01, 0.3),
    delta_cap=st.booleans(),
    seed=st.one_of(st.none(), st.integers(0, 10**6)),
    point=st.one_of(st.none(), st.tuples(st.floats(0, 3), st.floats(0, 6))),
    name=st.one_of(st.none(), st.sampled_from(["run1", "x"])),
)


@given(configs)
def test_config_ini_round_trip(cfg):
    assert ExperimentConfig.from_ini(cfg.to_ini()) == cfg
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_config_file_flags_precedence(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(ExperimentConfig(families=("zonal:l=20",), delta=0.2).to_ini())
    cfg = load_config(str(path)).merged(delta=0.25)
    assert cfg.delta == 0.25 and cfg.families == ("zonal:l=20",)


@pytest.mark.parametrize("over, field", [
    (dict(delta=3.0), "delta"),
    (dict(eps_frac=1.5), "eps_frac"),
    (dict(kind="bogus"), "kind"),
    (dict(families=()), "families"),
    (dict(families=("cos:k=10",), manifold="sphere"), "families"),
    (dict(manifold="klein"), "manifold"),
    (dict(a=-1.0), "a"),
    (dict(a=200.0), "a"),
    (dict(kind="sweep", deltas=(0.1, 0.2)), "deltas"),
    (dict(threshold="fixed"), "c2"),
    (dict(formats=("xml",)), "formats"),
    (dict(plots=("scatter",)), "plots"),
    (dict(kind="largevalue", gammas=(-1.0,)), "gammas"),
    (dict(kind="largevalue", point=(1.0,)), "point"),
    (dict(kind="hwexample", r_pole=2.0), "r_pole"),
    (dict(kind="green", quad_order=1), "quad_order"),
    (dict(eps_mass=0.0), "eps_mass"),
])
def test_validation_names_field(over, field):
    cfg = ExperimentConfig(families=("zonal:l=20",)).merged(**over)
    with pytest.raises(ConfigError) as exc:
        cfg.validate()
    assert exc.value.field == field
    assert str(exc.value).startswith(field)


def test_unknown_and_unparsable_keys():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_ini("[experiment]\ncolour = red\n")
    assert exc.value.field == "colour"
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_ini("[parameters]\ndelta = small\n")
    assert exc.value.field == "delta"
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_ini("no section header\n")
    assert exc.value.field == "config"
    with pytest.raises(ConfigError):
        load_config("/nonexistent/planck.ini")


def test_validation_returns_families():
    fams = ExperimentConfig(families=("zonal:l=20", "zonal:l=30")).validate()
    assert [u.label for u in fams] == ["zonal:l=20", "zonal:l=30"]
    assert fams[0].lam == zonal_harmonic(20).lam
