import os

import numpy as np
import pytest

from epaut import cli


def write(path, text):
    path.write_text(text)
    return str(path)


MINIMAL_PEAKONS = """
name = "two-peakon"
kind = "peakons"

[params]
T = 1.0
"""


def test_parse_minimal_peakons(tmp_path):
    s = cli.parse_scenario(write(tmp_path / "p.toml", MINIMAL_PEAKONS))
    assert s.kind == "peakons"
    assert s.name == "two-peakon"
    assert s.seed == 0
    # schema round trip is stable
    d = cli.serialize_scenario(s)
    assert d == cli.serialize_scenario(
        cli.Scenario(s.name, s.kind, dict(s.params), s.out_dir, s.stride,
                     s.formats, s.seed))


def test_parse_negative_alpha_names_field(tmp_path):
    bad = """
name = "x"
kind = "ch2"

[params]
alpha1 = -1.0
"""
    with pytest.raises(cli.ScenarioValidationError) as exc:
        cli.parse_scenario(write(tmp_path / "b.toml", bad))
    assert any("alpha1" in e for e in exc.value.errors)


def test_parse_conflicting_initial_data(tmp_path):
    bad = """
name = "x"
kind = "ch2"

[params]
m_preset = "cosine"
m_expression = "cos(x)"
"""
    with pytest.raises(cli.ScenarioValidationError) as exc:
        cli.parse_scenario(write(tmp_path / "b.toml", bad))
    assert any("conflict" in e for e in exc.value.errors)


def test_parse_aggregates_all_errors(tmp_path):
    bad = """
name = ""
kind = "euler2d"
bogus = 1

[params]
dt = -2.0
junk = true
"""
    with pytest.raises(cli.ScenarioValidationError) as exc:
        cli.parse_scenario(write(tmp_path / "b.toml", bad))
    msgs = exc.value.errors
    assert len(msgs) >= 3
    assert any("bogus" in m for m in msgs)
    assert any("dt" in m for m in msgs)
    assert any("junk" in m for m in msgs)


def test_parse_unknown_kind(tmp_path):
    with pytest.raises(cli.ScenarioValidationError):
        cli.parse_scenario(write(tmp_path / "b.toml",
                                 'name = "x"\nkind = "nope"\n'))


def test_run_peakons_writes_csv_and_passes(tmp_path):
    text = f"""
name = "pk"
kind = "peakons"

[output]
directory = "{tmp_path}"
stride = 100

[params]
T = 1.0
dt = 1e-3
"""
    s = cli.parse_scenario(write(tmp_path / "p.toml", text))
    rep = cli.run_scenario(s)
    assert rep.passed
    csv_path = tmp_path / "pk.csv"
    assert csv_path.exists()
    head = csv_path.read_text().splitlines()[0]
    for col in ("t", "Q1_1", "Q2_1", "P1_1", "P2_1", "H"):
        assert col in head.split(",")


def test_run_determinism_byte_identical(tmp_path):
    text = f"""
name = "det"
kind = "ch2"
seed = 7

[output]
directory = "{tmp_path}"
stride = 50

[params]
N = 128
T = 0.2
dt = 2e-3
group = "so3"
"""
    s = cli.parse_scenario(write(tmp_path / "p.toml", text))
    cli.run_scenario(s)
    first = (tmp_path / "det.csv").read_bytes()
    cli.run_scenario(s)
    assert (tmp_path / "det.csv").read_bytes() == first


def test_run_ch2_expression(tmp_path):
    text = f"""
name = "expr"
kind = "ch2"

[output]
directory = "{tmp_path}"
stride = 20

[params]
N = 128
T = 0.1
dt = 2e-3
m_expression = "0.2 * cos(x)"
sigma_amplitude = 0.1
"""
    rep = cli.run_scenario(cli.parse_scenario(write(tmp_path / "p.toml", text)))
    assert rep.passed
    assert (tmp_path / "expr.csv").exists()
    assert (tmp_path / "expr_m_final.csv").exists()


def test_run_euler2d_with_svg(tmp_path):
    text = f"""
name = "eul"
kind = "euler2d"
seed = 3

[output]
directory = "{tmp_path}"
stride = 10
formats = ["csv", "svg"]

[params]
N = 32
T = 0.05
dt = 1e-3
preset = "random"
kmax = 3
"""
    rep = cli.run_scenario(cli.parse_scenario(write(tmp_path / "p.toml", text)))
    assert rep.passed
    assert (tmp_path / "eul.csv").exists()
    svg = (tmp_path / "eul_varpi_final.svg")
    assert svg.exists()
    assert svg.read_bytes().startswith(b"<?xml")


def test_run_clebsch_check(tmp_path):
    text = f"""
name = "cleb"
kind = "clebsch-check"

[output]
directory = "{tmp_path}"
stride = 20

[params]
N = 32
T = 0.1
dt = 2e-3
seed_kind = "euler"
"""
    rep = cli.run_scenario(cli.parse_scenario(write(tmp_path / "p.toml", text)))
    assert rep.passed
    assert (tmp_path / "cleb.csv").exists()


def test_plot_time_series_and_heatmap(tmp_path):
    ts = tmp_path / "series.csv"
    ts.write_text("t,energy\n0,1.0\n0.1,1.0\n0.2,0.999\n")
    out = tmp_path / "series.svg"
    cli.plot_csv(str(ts), str(out))
    assert out.read_bytes().startswith(b"<?xml")

    mat = tmp_path / "field.csv"
    cli.write_matrix_csv(str(mat), np.outer(np.sin(np.linspace(0, 6, 20)),
                                            np.cos(np.linspace(0, 6, 20))))
    out2 = tmp_path / "field.svg"
    cli.plot_csv(str(mat), str(out2))
    assert out2.read_bytes().startswith(b"<?xml")


def test_plot_empty_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError):
        cli.plot_csv(str(empty), str(tmp_path / "x.svg"))


def test_verify_lie_passes():
    rep = cli.verify("lie")
    assert rep.passed
    assert all(cid == "AC1" for cid, *_ in rep.checks)


def test_verify_unknown_module():
    with pytest.raises(cli.ScenarioValidationError):
        cli.verify("nonsense")


def test_main_exit_codes(tmp_path, capsys):
    # validation failure
    bad = write(tmp_path / "bad.toml", 'name = "x"\nkind = "nope"\n')
    assert cli.main(["run", bad]) == 2
    # verify unknown module
    assert cli.main(["verify", "nonsense"]) == 2
    # plot on missing file
    assert cli.main(["plot", str(tmp_path / "missing.csv")]) == 1
    # good run
    good = write(tmp_path / "good.toml", f"""
name = "ok"
kind = "peakons"

[output]
directory = "{tmp_path}"
stride = 200

[params]
T = 0.5
dt = 1e-3
""")
    assert cli.main(["run", good]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
