import json

import numpy as np
import pytest

from bornspec import cli, io


def run(tmp_path, *argv, name="run"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, out


def test_spectrum_writes_outputs(tmp_path):
    code, out = run(tmp_path, "spectrum", "--shape", "sphere", "--radius", "1", "--h", "0.25", "--k", "0.5",
                    "--dump-matrix", "--emit-plot-data")
    assert code == 0
    for name in ("config.json", "spectrum.csv", "series.json", "operator.bspc", "compressed.bspc", "plot_spectrum.csv"):
        assert (out / name).exists(), name
    series = json.loads((out / "series.json").read_text())
    assert {"series_value", "frob_G12", "frob_G122", "schur_margin"} <= series.keys()
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["command"] == "spectrum" and cfg["h"] == 0.25


def test_csv_format(tmp_path):
    code, out = run(tmp_path, "spectrum", "--h", "1/4", "--kind", "static")
    assert code == 0
    raw = (out / "spectrum.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "re,im,label,div_ratio"
    for line in lines[1:]:
        re_txt, im_txt, label, rho_txt = line.split(",")
        for txt in (re_txt, im_txt, rho_txt):
            assert txt == format(float(txt), ".17g")
        assert label in ("physical", "longitudinal", "numerical_null")
    assert len(io.read_spectrum_csv(out / "spectrum.csv")) == len(lines) - 1


def test_spectrum_is_reproducible(tmp_path):
    a = run(tmp_path, "spectrum", "--h", "0.25", "--k", "0.3", name="a")[1]
    b = run(tmp_path, "spectrum", "--h", "0.25", "--k", "0.3", name="b")[1]
    assert (a / "spectrum.csv").read_bytes() == (b / "spectrum.csv").read_bytes()
    assert (a / "series.json").read_bytes() == (b / "series.json").read_bytes()


def test_threads_flag_does_not_change_results(tmp_path):
    a = run(tmp_path, "spectrum", "--h", "0.25", "--threads", "1", name="a")[1]
    b = run(tmp_path, "spectrum", "--h", "0.25", name="b")[1]
    assert (a / "spectrum.csv").read_bytes() == (b / "spectrum.csv").read_bytes()


def test_solve(tmp_path):
    code, out = run(tmp_path, "solve", "--h", "1/4", "--chi", "1", "--polarization", "0", "0", "1",
                    "--direction", "1", "0", "0")
    assert code == 0
    rep = json.loads((out / "solve.json").read_text())
    assert rep["mean_field"][2]["re"] == pytest.approx(0.75, rel=0.05)


def test_bounds(tmp_path):
    code, out = run(tmp_path, "bounds", "--h", "0.2", "--k", "1", "--surface-subdiv", "1",
                    "--fourier-samples", "10000")
    assert code == 0
    rep = json.loads((out / "bounds.json").read_text())
    kv = rep["k"] ** 3 * rep["volume"]
    assert rep["im_bound"] == pytest.approx(min(kv / (4 * np.pi), 3 / (5 * np.pi) * kv ** (2 / 3), 5 / 8 * rep["r_v"]))
    assert rep["discrete_gamma_hs"] <= rep["gamma_hs_bound"] * 1.05
    assert rep["series_upper"] > 0 and rep["i_fourier"] > 0


def test_mie_verify_table(tmp_path):
    code, out = run(tmp_path, "mie-verify", "--lmax", "3", "--h", "0.125")
    assert code == 0
    rows = (out / "mie_table.csv").read_text().splitlines()
    assert rows[0].startswith("l,target,count")
    assert len(rows) == 4


def test_mie_verify_mismatch_exits_3(tmp_path):
    assert run(tmp_path, "mie-verify", "--lmax", "3", "--h", "0.125", "--tol", "1e-6")[0] == 3


def test_surface_hs(tmp_path):
    code, out = run(tmp_path, "surface-hs", "--subdiv", "2")
    assert code == 0
    rep = json.loads((out / "surface_report.json").read_text())
    assert rep["panel_count"] == 320
    assert rep["rel_error"] == pytest.approx(abs(rep["trace4_value"] / rep["oracle_value"] - 1))


def test_convergence(tmp_path):
    code, out = run(tmp_path, "convergence", "--hs", "1/3,1/4", "--k", "1", "--emit-plot-data")
    assert code == 0
    rows = (out / "convergence.csv").read_text().splitlines()
    assert len(rows) == 3 and "frob_acoustic" in rows[0]
    assert (out / "plot_convergence.csv").exists()


def test_unknown_flag_exits_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["spectrum", "--h", "0.25", "--bogus"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_empty_shape_exits_2(tmp_path):
    assert run(tmp_path, "spectrum", "--h", "3")[0] == 2


def test_bad_voxel_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "vox.txt"
    bad.write_text("0 0 0\n1 2\n")
    assert run(tmp_path, "spectrum", "--shape", "file", "--file", str(bad), "--h", "1")[0] == 2
    assert "vox.txt:2" in capsys.readouterr().err


def test_memory_cap_exits_2(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("BSPC_MEMORY_CAP_BYTES", "1000")
    assert run(tmp_path, "spectrum", "--h", "0.25")[0] == 2
    assert "bytes" in capsys.readouterr().err


def test_singular_solve_exits_3(tmp_path, capsys):
    code, _ = run(tmp_path, "solve", "--shape", "box", "--sides", "0.2", "0.2", "0.2", "--h", "0.2", "--chi", "-3")
    assert code == 3
    assert "condition" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "bornspec", "surface-hs", "--subdiv", "0", "--out", str(tmp_path)],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0, res.stderr
    assert np.isfinite(json.loads((tmp_path / "surface_report.json").read_text())["trace4_value"])
