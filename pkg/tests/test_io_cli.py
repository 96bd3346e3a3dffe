import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xcftorus import acceptance, cli
from xcftorus import initial_data as init_mod
from xcftorus.errors import ParseError, ValidationError
from xcftorus.io import (
    KEYS,
    OUTPUT_ENV,
    SNAPSHOT_COLUMNS,
    RunConfig,
    format_config,
    format_value,
    parse_config,
    resolve_output_dir,
)
from xcftorus.diagnostics import SERIES_COLUMNS

MINIMAL = """\
initial.kind = hyperbolic
initial.b = 1
initial.s0 = 1
grid.n = 128
time.t_end = 1
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# -- parsing -----------------------------------------------------------------------

def test_minimal_config_is_valid():
    cfg = parse_config(MINIMAL)
    assert cfg.kind == "hyperbolic" and cfg.n == 128 and cfg.flow.t_end == 1.0
    assert cfg.b == 1.0 and cfg.s0 == 1.0


def test_feasibility_violation_is_named():
    with pytest.raises(ValidationError, match=r"2\*pi\*s0 = 6.28319 >= ell1 = 6"):
        parse_config("initial.kind = two_pi\ninitial.ell1 = 6.0\ninitial.s0 = 1.0\n")


def test_misspelled_key():
    with pytest.raises(ParseError, match="unknown key 'grdi.n'") as exc:
        parse_config("initial.kind = hyperbolic\n  grdi.n = 64\n")
    assert (exc.value.line, exc.value.column) == (2, 3)


@pytest.mark.parametrize("text,line,col", [
    ("grid.n 64\n", 1, 1),
    ("grid.n = 64\ngrid.n = 32\n", 2, 1),
    ("grid.n = sixty\n", 1, 10),
    ("grid.n = 64.5\n", 1, 10),
    ("time.cfl = nan\n", 1, 12),
    ("# comment\n = 3\n", 2, 2),
    ("time.cfl =\n", 1, 11),
])
def test_parse_errors_have_positions(text, line, col):
    with pytest.raises(ParseError) as exc:
        parse_config(text)
    assert (exc.value.line, exc.value.column) == (line, col)


@pytest.mark.parametrize("text", [
    "grid.n = 8\n",
    "time.cfl = 0.6\n",
    "initial.kind = sphere\n",
    "initial.b = -1\n",
    "initial.epsilon = -0.1\n",
    "time.max_steps = 0\n",
])
def test_validation_errors(text):
    with pytest.raises(ValidationError):
        parse_config(text)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\ngrid.n = 64   # inline\n")
    assert cfg.n == 64


def test_defaults():
    assert parse_config("") == RunConfig()


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["hyperbolic", "two_pi"]), st.floats(1.0, 3.0), st.floats(0.0, 0.1),
       st.integers(16, 512), st.floats(0.01, 5.0), st.floats(0.05, 0.5))
def test_format_parse_round_trip(kind, ratio, eps, n, t_end, cfl):
    s0 = 1.0
    text = (f"initial.kind = {kind}\ninitial.ell1 = {format_value(6.3 * ratio)}\n"
            f"initial.epsilon = {format_value(eps)}\ngrid.n = {n}\n"
            f"time.t_end = {format_value(t_end)}\ntime.cfl = {format_value(cfl)}\ninitial.s0 = {s0}\n")
    cfg = parse_config(text)
    assert parse_config(format_config(cfg)) == cfg


def test_echo_covers_every_key():
    assert set(RunConfig().echo()) == set(KEYS)


def test_output_dir_env_override(monkeypatch, tmp_path):
    cfg = parse_config("output.dir = somewhere\n")
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    assert str(resolve_output_dir(cfg)) == "somewhere"
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert resolve_output_dir(cfg) == tmp_path


def test_format_value_digits():
    assert format_value(0.1) == "0.10000000000000001"
    assert float(format_value(np.pi)) == np.pi
    assert format_value(True) == "1"
    assert format_value(7) == "7"


# -- run -----------------------------------------------------------------------------

def small_run_cfg(out, kind="hyperbolic", extra=""):
    return (f"initial.kind = {kind}\ninitial.ell1 = 8\ninitial.L = 5\ninitial.s0 = 1\n"
            f"grid.n = 32\ntime.t_end = 0.2\ntime.snapshot_every = 0.05\noutput.dir = {out}\n{extra}")


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_hyperbolic(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, small_run_cfg(out))
    assert cli.main(["run", str(cfg)]) == 0
    series = read_csv(out / "series.csv")
    assert series[0] == SERIES_COLUMNS
    assert len(series) == 1 + 5
    j = [float(r[SERIES_COLUMNS.index("J")]) for r in series[1:]]
    assert max(abs(x) for x in j) < 1e-5
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["exit_code"] == 0
    assert manifest["config_echo"]["grid.n"] == 32
    listed = {o["file"]: o["rows"] for o in manifest["outputs"]}
    for name, rows in listed.items():
        assert (out / name).exists()
        if name.endswith(".csv"):
            assert rows == len(read_csv(out / name)) - 1
    snap = read_csv(out / "snapshot_0.200000.csv")
    assert snap[0] == SNAPSHOT_COLUMNS and len(snap) == 33
    raw = (out / "series.csv").read_bytes()
    assert b"\r" not in raw


def test_run_is_bit_identical(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    digests = []
    for name in ("a", "b"):
        cfg = write_cfg(tmp_path, small_run_cfg(tmp_path / "x", kind="two_pi",
                                               extra="initial.epsilon = 0.05\n"), f"{name}.cfg")
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / name))
        assert cli.main(["run", str(cfg)]) == 0
        digests.append({p.name: p.read_bytes() for p in (tmp_path / name).iterdir()})
    assert digests[0] == digests[1]


def test_run_two_pi_J_nonincreasing(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "o"))
    cfg = write_cfg(tmp_path, small_run_cfg("unused", kind="two_pi", extra="initial.epsilon = 0.05\n"))
    assert cli.main(["run", str(cfg)]) == 0
    rows = read_csv(tmp_path / "o" / "series.csv")[1:]
    j = [float(r[SERIES_COLUMNS.index("J")]) for r in rows]
    assert j[0] > 0
    assert all(b < a for a, b in zip(j, j[1:]))


def test_run_step_limit_exits_one(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "o"))
    cfg = write_cfg(tmp_path, "time.t_end = 1000\ntime.max_steps = 5\ngrid.n = 16\n")
    assert cli.main(["run", str(cfg)]) == 1
    assert "MaxStepsExceeded" in capsys.readouterr().err
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["status"] == "error" and manifest["exit_code"] == 1


def test_run_flag_violation_exits_two(tmp_path, monkeypatch):
    # tube data with boundary values pulled in the wrong direction break the bounds
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "o"))
    cfg = write_cfg(tmp_path, "grid.n = 32\ntime.t_end = 0.1\ntime.snapshot_every = 0.05\n")
    real = RunConfig.boundary_curvature
    monkeypatch.setattr(RunConfig, "boundary_curvature", lambda self: 3.0 * real(self))
    assert cli.main(["run", str(cfg)]) == 2
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["exit_code"] == 2 and manifest["status"].startswith("violated")


def test_run_bad_config_exits_one(tmp_path):
    cfg = write_cfg(tmp_path, "grdi.n = 32\n")
    assert cli.main(["run", str(cfg)]) == 1


def test_run_missing_file_exits_one(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.cfg")]) == 1


def test_run_cusp_rejected(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "o"))
    cfg = write_cfg(tmp_path, "initial.kind = cusp_test\ngrid.n = 32\n")
    assert cli.main(["run", str(cfg)]) == 1


# -- make-metric ---------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["hyperbolic", "two_pi", "cusp_test"])
def test_make_metric(tmp_path, monkeypatch, kind):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "m"))
    cfg = write_cfg(tmp_path, f"initial.kind = {kind}\ngrid.n = 64\n")
    assert cli.main(["make-metric", str(cfg)]) == 0
    files = sorted(p.name for p in (tmp_path / "m").iterdir())
    assert files == ["manifest.json", "snapshot_0.000000.csv"]
    rows = read_csv(tmp_path / "m" / "snapshot_0.000000.csv")
    alpha = np.array([float(r[5]) for r in rows[1:]])
    assert np.all(alpha > 0)


def test_make_metric_infeasible(tmp_path):
    cfg = write_cfg(tmp_path, "initial.kind = two_pi\ninitial.ell1 = 6\n")
    assert cli.main(["make-metric", str(cfg)]) == 1


# -- verify / converge ---------------------------------------------------------------

def test_converge_reports_order(capsys):
    assert cli.main(["converge"]) == 0
    out = capsys.readouterr().out
    assert "fitted order" in out and "within" in out


def test_verify_detects_beta_sign_flip(monkeypatch, capsys):
    real = init_mod.curvatures

    def flipped(m, *a, **k):
        c = real(m, *a, **k)
        return type(c)(c.grid, c.alpha, -c.beta, c.gamma, c.core_alpha, -c.core_beta, c.core_gamma)

    monkeypatch.setattr(init_mod, "curvatures", flipped)
    monkeypatch.setattr(acceptance, "CRITERIA", (acceptance.criterion_feasibility,))
    assert cli.main(["verify"]) != 0
    assert "[FAIL] 8." in capsys.readouterr().out


def test_interrupt_gives_nonzero_exit(monkeypatch):
    def interrupted(args):
        raise KeyboardInterrupt

    monkeypatch.setattr(cli, "cmd_verify", interrupted)
    assert cli.main(["verify"]) == 1


def test_grid_below_minimum_rejected():
    with pytest.raises(Exception):
        acceptance.convergence_study((8, 16, 32))


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])
