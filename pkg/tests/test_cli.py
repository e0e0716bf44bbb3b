import csv
import hashlib
import json
import math

import pytest

from dephasim.cli import format_value, main, run
from dephasim.dynamics import dephasing_factor, dephasing_rate
from dephasim.nonmarkov import channel_capacity
from dephasim.spectral import CutoffKind, SpectralParams, TemperatureSpec


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] if r[0] not in ("soft", "hard") else r for r in rows[1:]]


def test_trace(tmp_path):
    out = tmp_path / "trace"
    code = main(["trace", "--s", "3", "--cutoff", "soft", "--temp", "zero", "--tau-max", "50",
                 "--points", "500", "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out / "data.csv")
    assert header[:4] == ["tau", "lambda", "gamma", "capacity"]
    assert len(rows) == 500
    assert rows[0][3] == 1.0
    assert (out / "plot.gp").read_text().startswith("# ")
    meta = json.loads((out / "meta.json").read_text())
    for name in ("data.csv", "plot.gp"):
        digest = hashlib.sha256((out / name).read_bytes()).hexdigest()
        assert meta["checksums"][name] == digest
    assert b"\r\n" not in (out / "data.csv").read_bytes()


def test_trace_round_trip(tmp_path):
    out = tmp_path / "rt"
    assert main(["trace", "--s", "2.6", "--cutoff", "hard", "--temp", "finite", "--t-tilde",
                 "0.4", "--tau-max", "30", "--points", "61", "--out", str(out)]) == 0
    cfg = json.loads((out / "meta.json").read_text())["config"]
    _, rows = read_csv(out / "data.csv")
    p = SpectralParams(cfg["s"], CutoffKind(cfg["cutoff"]))
    t = TemperatureSpec.finite(cfg["t_tilde"])
    for row in (rows[7], rows[40]):
        lam = dephasing_factor(p, t, row[0])
        assert row[1] == pytest.approx(lam, rel=1e-9, abs=1e-11)
        assert row[2] == pytest.approx(dephasing_rate(p, t, row[0]), rel=1e-8, abs=1e-11)
        assert row[3] == pytest.approx(channel_capacity(lam), rel=1e-9, abs=1e-11)


def test_sopt(tmp_path):
    assert main(["sopt", "--cutoff", "hard", "--temp", "high", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "data.csv")
    assert header[0] == "s_opt" and len(rows) == 1
    assert rows[0][0] == pytest.approx(4.92, abs=0.01)


def test_stationary_and_convexity(tmp_path):
    assert main(["stationary", "--s", "2", "--out", str(tmp_path / "a")]) == 0
    _, rows = read_csv(tmp_path / "a" / "data.csv")
    assert rows[0][2] == pytest.approx(math.exp(-2), rel=1e-10)
    assert main(["convexity", "--s", "3", "--out", str(tmp_path / "b")]) == 0
    text = (tmp_path / "b" / "data.csv").read_text()
    assert "non_convex" in text and "vanishes" in text


def test_nonmark(tmp_path):
    assert main(["nonmark", "--s", "3", "--tau-max", "100", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "data.csv")
    assert header[0:2] == ["a", "b"] and len(rows) == 1
    assert rows[0][0] == pytest.approx(math.sqrt(3), abs=1e-5)
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["summary"]["n_q"] == pytest.approx(rows[0][6], rel=1e-10)


@pytest.mark.slow
def test_crossover(tmp_path):
    assert main(["crossover", "--cutoff", "soft", "--temp", "zero", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "data.csv")
    assert rows[0][0] == pytest.approx(2.0, abs=0.02)


def test_config_file_and_override(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# stationary run\ns = 3\ncutoff = hard\ntemp = high\nt-tilde = 2\n")
    assert main(["stationary", "--config", str(conf), "--out", str(tmp_path / "a")]) == 0
    _, rows = read_csv(tmp_path / "a" / "data.csv")
    assert rows[0][1] == pytest.approx(2 * math.gamma(0.5), rel=1e-10)
    assert main(["stationary", "--config", str(conf), "--t-tilde", "1",
                 "--out", str(tmp_path / "b")]) == 0
    _, rows = read_csv(tmp_path / "b" / "data.csv")
    assert rows[0][1] == pytest.approx(math.gamma(0.5), rel=1e-10)


@pytest.mark.parametrize("argv", [
    ["trace", "--s", "-1"],
    ["trace", "--cutoff", "square"],
    ["trace", "--temp", "finite", "--t-tilde", "0"],
    ["trace", "--points", "1"],
    ["sweep-s", "--s-max", "9"],
])
def test_config_errors_exit_2(tmp_path, argv):
    out = tmp_path / "never"
    assert main(argv + ["--out", str(out)]) == 2
    assert not out.exists() or not any(out.iterdir())


def test_bad_config_file(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    assert main(["trace", "--config", str(conf), "--out", str(tmp_path / "o")]) == 2


def test_numerical_failure_exit_3(tmp_path):
    out = tmp_path / "o"
    assert main(["crossover", "--tau-max", "0.01", "--out", str(out)]) == 3
    assert not (out / "data.csv").exists()


def test_determinism(tmp_path):
    argv = ["sweep-s", "--s-min", "0.5", "--s-max", "4", "--s-step", "0.5", "--tau-max", "40"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "data.csv").read_bytes() == (tmp_path / "b" / "data.csv").read_bytes()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("DEPHASIM_OUT", str(tmp_path / "env"))
    assert main(["stationary", "--s", "3"]) == 0
    assert (tmp_path / "env" / "meta.json").exists()


def test_no_staging_left_behind(tmp_path):
    assert main(["stationary", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["data.csv", "meta.json", "plot.gp"]


def test_run_entry_point(tmp_path):
    assert main(["stationary", "--s", "2.5", "--out", str(tmp_path / "first")]) == 0
    cfg = json.loads((tmp_path / "first" / "meta.json").read_text())["config"]
    cfg["out"] = str(tmp_path / "second")
    assert run(cfg) == 0
    assert (tmp_path / "first" / "data.csv").read_bytes() == (
        tmp_path / "second" / "data.csv").read_bytes()


def test_figure2_checkpoint(tmp_path):
    assert main(["figure", "fig2", "--s-min", "1", "--s-max", "4", "--s-step", "0.5",
                 "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "data.csv")
    at3 = next(r for r in rows if r[0] == 3.0)
    soft, hard = at3[header.index("coherence_soft")], at3[header.index("coherence_hard")]
    assert hard - soft == pytest.approx(math.exp(-1) - math.exp(-2), abs=1e-3)
    assert "n_q_soft" not in header


def test_figure3_normalised(tmp_path):
    assert main(["figure", "fig3", "--s-min", "1", "--s-max", "4", "--s-step", "0.5",
                 "--tau-max", "60", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "data.csv")
    for name in ("n_q_soft_norm", "n_q_hard_norm", "coherence_soft_norm"):
        col = [r[header.index(name)] for r in rows]
        assert max(col) == pytest.approx(1.0)
    plot = (tmp_path / "plot.gp").read_text()
    assert "using 1:" in plot


def test_figure1_small(tmp_path):
    assert main(["figure", "fig1", "--t-points", "4", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "data.csv")
    assert header == ["t_tilde", "s_opt_soft", "coherence_soft", "s_opt_hard", "coherence_hard"]
    assert len(rows) == 4


def test_format_value():
    assert format_value(-0.0) == "0"
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(True) == "1"
    assert format_value(float("inf")) == "inf"
