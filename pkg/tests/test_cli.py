import filecmp
import os

import pytest

from pdfrac import cli, dynamics
from pdfrac.config import parse_config, parse_string
from pdfrac.errors import ConfigurationError
from pdfrac.lattice import build_grid, build_neighborhoods

MINIMAL = """
[model]
rho = 1.0
f_prime_0 = 1.0
f_infinity = 1.0
[domain]
horizon = 0.125
spacing = 0.03125
[time]
T = {T}
"""


def write(tmp_path, text, name="case.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_minimal_config_fills_dt():
    cfg = parse_string(MINIMAL.format(T=0.1))
    model = cfg.model()
    table = build_neighborhoods(build_grid(model.domain), model.influence)
    assert cfg.get("domain", "horizon_ratio") == 4.0
    assert cfg.get("time", "dt") == pytest.approx(0.5 * dynamics.stable_dt(model, table), rel=1e-15)


@pytest.mark.parametrize("edit, key, section", [
    (("horizon = 0.125", "horizon = 0"), "horizon", "domain"),
    (("horizon = 0.125", "horizon = -1"), "horizon", "domain"),
    (("rho = 1.0", "rho = abc"), "rho", "model"),
    (("rho = 1.0\n", ""), "rho", "model"),
    (("T = 0.1", "T = 0.1\nbogus = 3"), "bogus", "time"),
])
def test_validation_names_key(edit, key, section):
    text = MINIMAL.format(T=0.1).replace(*edit)
    with pytest.raises(ConfigurationError) as exc:
        parse_string(text)
    assert exc.value.key == key and exc.value.section == section
    assert f"[{section}] {key}" in str(exc.value)


def test_collar_narrower_than_horizon():
    text = MINIMAL.format(T=0.1) + "collar_width = 0.1\n"
    text = text.replace("[time]", "[domain_extra]")
    with pytest.raises(ConfigurationError):
        parse_string(text)
    text = MINIMAL.format(T=0.1).replace("spacing = 0.03125", "spacing = 0.03125\ncollar_width = 0.1")
    with pytest.raises(ConfigurationError, match="nonlocal Dirichlet"):
        parse_string(text)


def test_echo_round_trips():
    text = MINIMAL.format(T=0.1) + "[initial]\nmode_amplitude = 0.1\ncracks = 0.3 0.5 0.7 0.5 0.8\n"
    cfg = parse_string(text)
    again = parse_string(cfg.to_ini())
    assert again == cfg
    assert again.to_ini() == cfg.to_ini()


def test_calibrate_prints_constants(tmp_path, capsys):
    status = cli.main(["calibrate", "--config", write(tmp_path, MINIMAL.format(T=0.1)),
                       "--out", str(tmp_path / "o")])
    out = capsys.readouterr().out
    assert status == 0
    assert "mu = 1.0471975" in out and "Gc = 2.0943951" in out


def test_run_zero_time_single_snapshot(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", "--config", write(tmp_path, MINIMAL.format(T=0.0)), "--out", str(out)]) == 0
    snaps = [f for f in os.listdir(out) if f.startswith("snap_")]
    assert snaps == ["snap_0.csv"]
    assert (out / "energy.csv").read_text().count("\n") == 2
    assert parse_config(str(out / "resolved_config.txt")) == parse_config(str(tmp_path / "case.ini"))


def test_run_with_huge_dt_exits_2(tmp_path, capsys):
    cfg = parse_string(MINIMAL.format(T=0.1))
    dt = 100 * cfg.get("time", "dt") / 0.5
    text = MINIMAL.format(T=20 * dt) + f"dt = {dt!r}\n[initial]\nmode_amplitude = 0.1\n"
    status = cli.main(["run", "--config", write(tmp_path, text), "--out", str(tmp_path / "o")])
    assert status == 2
    assert "at step" in capsys.readouterr().err


def test_bound_violation_exits_3(tmp_path, monkeypatch):
    monkeypatch.setattr(dynamics, "GRONWALL_SLACK", 1e-3)
    text = MINIMAL.format(T=0.05) + "[initial]\nmode_amplitude = 0.1\n"
    assert cli.main(["run", "--config", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 3


def test_invalid_config_exits_1(tmp_path):
    text = MINIMAL.format(T=0.1).replace("horizon = 0.125", "horizon = -0.125")
    assert cli.main(["run", "--config", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 1
    assert cli.main(["run", "--config", str(tmp_path / "missing.ini")]) == 1


def test_run_outputs_are_deterministic(tmp_path):
    text = MINIMAL.format(T=0.1) + ("[initial]\nmode_amplitude = 0.2\n"
                                     "cracks = 0.3 0.5 0.7 0.5\n[output]\nsnapshot_stride = 4\n")
    path = write(tmp_path, text)
    for name in ("a", "b"):
        assert cli.main(["run", "--config", path, "--out", str(tmp_path / name)]) == 0
    files = sorted(os.listdir(tmp_path / "a"))
    assert "energy.csv" in files and "unstable_0.125.csv" in files
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", files, shallow=False)
    assert not mismatch and not errors


def test_sweep_independent_of_threads(tmp_path):
    text = MINIMAL.format(T=0.1) + ("[initial]\nmode_amplitude = 0.1\ncracks = 0.3 0.5 0.7 0.5\n"
                                     "[sweep]\neps = 0.25, 0.125, 0.0625\nn_samples = 2\n")
    path = write(tmp_path, text)
    for n in (1, 3):
        assert cli.main(["sweep", "--config", path, "--out", str(tmp_path / f"t{n}"),
                         "--threads", str(n)]) == 0
    files = sorted(f for f in os.listdir(tmp_path / "t1") if f != "resolved_config.txt")
    assert "concentration.csv" in files and "sweep_summary.txt" in files
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "t1", tmp_path / "t3", files, shallow=False)
    assert not mismatch and not errors


def test_nucleate_gamma_wave(tmp_path, capsys):
    text = MINIMAL.format(T=0.2) + ("[initial]\ncracks = 0.3 0.5 0.7 0.5\n"
                                     "[nucleate]\npoints = 0.5 0.5; 0.2 0.2\n"
                                     "[gamma]\nfield = mode\neps = 0.125, 0.0625\n"
                                     "[wave]\nsample_count = 4\n")
    path = write(tmp_path, text)
    assert cli.main(["nucleate", "--config", path, "--out", str(tmp_path / "n")]) == 0
    rows = (tmp_path / "n" / "nucleation.csv").read_text().splitlines()
    assert rows[0] == "x,y,A_star,theta_star,unstable" and len(rows) == 3
    assert cli.main(["gamma", "--config", path, "--out", str(tmp_path / "g")]) == 0
    assert len((tmp_path / "g" / "gamma.csv").read_text().splitlines()) == 3
    assert cli.main(["wave", "--config", path, "--out", str(tmp_path / "w")]) == 0
    assert len([f for f in os.listdir(tmp_path / "w") if f.startswith("snap_")]) == 5
    capsys.readouterr()


def test_nucleate_point_outside(tmp_path):
    text = MINIMAL.format(T=0.2) + "[nucleate]\npoints = 1.5 0.5\n"
    assert cli.main(["nucleate", "--config", write(tmp_path, text), "--out", str(tmp_path / "n")]) == 1


def test_grid_summary_flag(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["calibrate", "--config", write(tmp_path, MINIMAL.format(T=0.1)),
                     "--out", str(out), "--grid-summary"]) == 0
    text = (out / "grid_summary.txt").read_text()
    assert "interior           1024" in text and "m_discrete" in text
