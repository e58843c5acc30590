import csv
import io
from dataclasses import fields

import numpy as np
import pytest

from emfexposure import NetworkParams, __version__
from emfexposure import cli
from emfexposure.cli import SweepSpec, main, point_seed
from emfexposure.core_types import ConfigError
from emfexposure.gil_pelaez import BracketError
from emfexposure.quadrature import QuadratureError


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    lines = text.splitlines()
    assert lines[0].startswith("#")
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    return rows[0], rows[1:]


def column(header, rows, name):
    k = header.index(name)
    return [r[k] for r in rows]


def test_mean_defaults(capsys):
    code, out, _ = invoke(capsys, "mean")
    assert code == 0
    header, rows = table(out)
    assert header == ["point", "ei_bs", "ei_ul_u", "ei_ul_tr", "ei_total", "percent_ul_u"]
    assert float(column(header, rows, "ei_bs")[0]) == pytest.approx(4.2e-7, rel=1e-12)
    assert float(column(header, rows, "ei_ul_u")[0]) == pytest.approx(5.647059887302475e-08, rel=1e-9)


def test_header_comment_is_self_describing(capsys):
    _, out, _ = invoke(capsys, "mean", "--param", "eta=0.6", "--model", "mcp2")
    first = out.splitlines()[0]
    assert first.startswith(f"# emfexposure {__version__} model=mcp2 observer=passive")
    for f in fields(NetworkParams):
        assert f" {f.name}=" in first
    assert " eta=0.6 " in first


def test_rows_are_rfc4180(capsys):
    _, out, _ = invoke(capsys, "mean")
    body = out.split("\n", 1)[1]
    assert body.count("\r\n") == 2


def test_ratio_sweep(capsys):
    code, out, _ = invoke(capsys, "mean", "--sweep", "user_density_ratio", "--grid", "1,10,100,1000,10000,100000")
    assert code == 0
    header, rows = table(out)
    ul_u = np.array(column(header, rows, "ei_ul_u"), float)
    assert np.all(np.diff(ul_u) > 0)
    assert len(set(column(header, rows, "ei_bs"))) == 1


def test_mc_columns_only_when_requested(capsys):
    _, out, _ = invoke(capsys, "mean", "--model", "mcp2")
    assert not any(c.startswith("mc_") for c in table(out)[0])
    _, out, _ = invoke(capsys, "mean", "--model", "mcp2", "--mc-trials", "3")
    header, rows = table(out)
    assert "mc_ei_total" in header and "mc_ei_total_ci" in header
    assert float(column(header, rows, "mc_ei_total")[0]) > 0


@pytest.mark.parametrize("argv", [
    ["mean", "--param", "eta=-1"],
    ["mean", "--param", "beta=2"],
    ["mean", "--param", "nonsense=1"],
    ["mean", "--sweep", "eta", "--grid", "0.2,0.6,0.4"],
    ["mean", "--grid", "1,2"],
    ["mean", "--sweep", "eta", "--grid", "a,b"],
    ["sweep", "--outputs", "mean,median"],
    ["percentile", "--q", "1.5"],
    ["mean", "--config", "/nonexistent/file.cfg"],
    ["mean", "--mc-trials", "-1"],
])
def test_config_errors_exit_2(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.startswith("config error: ")


def test_config_error_names_every_field(capsys):
    code, _, err = invoke(capsys, "mean", "--param", "eta=-1", "--param", "p_a=2")
    assert code == 2
    assert "eta" in err and "p_a" in err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "net.cfg"
    cfg.write_text("# densities\nlambda_b = 2 per_km2\nG_b = 10 dBi\n")
    code, out, _ = invoke(capsys, "mean", "--config", str(cfg))
    assert code == 0
    header, rows = table(out)
    assert float(column(header, rows, "ei_bs")[0]) == pytest.approx(8.4e-7, rel=1e-12)


def test_numerical_failure_exits_3(capsys, monkeypatch):
    def boom(*a, **k):
        raise QuadratureError("did not converge", estimate=0.5, error_bound=1.0)

    monkeypatch.setattr(cli, "ei_cdf", boom)
    code, out, err = invoke(capsys, "cdf", "--points", "3")
    assert code == 3
    assert out == "" and "numerical failure" in err


def test_failed_quantile_row_is_na(capsys, monkeypatch):
    real = cli.ei_quantile

    def flaky(q, p, *a, **k):
        if p.eta == 0.6:
            raise BracketError("no sign change")
        return real(q, p, *a, **k)

    monkeypatch.setattr(cli, "ei_quantile", flaky)
    code, out, _ = invoke(capsys, "percentile", "--sweep", "eta", "--grid", "0.4,0.6,0.8")
    assert code == 0
    header, rows = table(out)
    q = column(header, rows, "quantile")
    assert q[1] == "NA" and q[0] != "NA" and q[2] != "NA"


def test_percentile_self_test(capsys):
    code, out, _ = invoke(capsys, "percentile", "--self-test", "--q", "0.5")
    assert code == 0
    header, rows = table(out)
    assert float(column(header, rows, "quantile")[0]) == pytest.approx(1.0, rel=1e-4)


def test_percentile_default(capsys):
    _, out, _ = invoke(capsys, "percentile")
    header, rows = table(out)
    assert float(column(header, rows, "quantile")[0]) == pytest.approx(3.29158e-7, rel=2e-4)


def test_byte_identical_reruns(capsys, tmp_path):
    argv = ["percentile", "--model", "mcp2", "--mc-trials", "20", "--seed", "4"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().count(b"\r\n") == 2


def test_point_seeds_do_not_shift():
    assert [point_seed(5, i) for i in range(3)] == [point_seed(5, i) for i in range(6)][:3]


def test_cdf_command(capsys):
    code, out, _ = invoke(capsys, "cdf", "--w", "3e-8,1e-7,3e-7")
    assert code == 0
    header, rows = table(out)
    assert header == ["w", "cdf"]
    F = np.array(column(header, rows, "cdf"), float)
    assert F == pytest.approx([0.29914, 0.83781, 0.94556], abs=2e-5)


def test_coverage_near_one_for_tiny_gamma(capsys):
    code, out, _ = invoke(capsys, "coverage", "--param", "gamma=-60 dB")
    assert code == 0
    header, rows = table(out)
    assert all(float(c) > 0.99 for c in column(header, rows, "coverage"))
    assert sum(int(a) for a in column(header, rows, "argmax")) == 1


def test_coverage_ppp_equals_mcp1(capsys):
    _, a, _ = invoke(capsys, "coverage", "--model", "ppp")
    _, b, _ = invoke(capsys, "coverage", "--model", "mcp1")
    ca = np.array(column(*table(a), "coverage"), float)
    cb = np.array(column(*table(b), "coverage"), float)
    assert np.allclose(ca, cb, rtol=1e-12, atol=0)


def test_coverage_with_mc(capsys):
    _, out, _ = invoke(capsys, "coverage", "--model", "mcp2", "--mc-trials", "30", "--etas", "0.4,0.8")
    header, rows = table(out)
    assert header == ["eta", "coverage", "mc_coverage", "mc_coverage_ci", "argmax"]
    assert len(rows) == 2


def test_simulate(capsys, tmp_path):
    path = tmp_path / "trials.csv"
    code, _, _ = invoke(capsys, "simulate", "--observer", "active", "--model", "mcp2", "--mc-trials", "5",
                        "--out", str(path))
    assert code == 0
    header, rows = table(path.read_text())
    assert header == ["trial", "observer", "ei_bs", "ei_ul_u", "ei_ul_tr", "ei_total", "sinr_db"]
    assert len(rows) == 5 and all(r[1] == "active" and r[6] != "" for r in rows)


def test_sweep_outputs(capsys):
    code, out, _ = invoke(capsys, "sweep", "--model", "mcp2", "--sweep", "gamma_db", "--grid", "0,10,20",
                          "--outputs", "mean,coverage,percent_ul_u")
    assert code == 0
    header, rows = table(out)
    assert header == ["gamma_db", "ei_total", "coverage", "percent_ul_u"]
    cov = np.array(column(header, rows, "coverage"), float)
    assert np.all(np.diff(cov) < 0)
    assert len(set(column(header, rows, "ei_total"))) == 1


def test_sweep_spec_invariants():
    with pytest.raises(ConfigError):
        SweepSpec("eta", ())
    with pytest.raises(ConfigError):
        SweepSpec("rho_b", (1.0,))
    assert SweepSpec("eta", (1.0, 0.5)).grid == (1.0, 0.5)
