"""Command-line interface: subcommands, exit codes, determinism."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qgs import (CouplingMatrix, Edge, MetricGraph, ScanResolution, Vertex,
                 robin_to_dirichlet, serialize_graph)
from qgs.cli import main, parse_grid


@pytest.fixture
def graph_file(tmp_path):
    g = MetricGraph(
        [Vertex("V1", 0.5), Vertex("V2", -0.25), Vertex("V3", 1.0)],
        [Edge("V1", "V2", 1.0), Edge("V2", "V3", math.sqrt(2)),
         Edge("V1", "V3", math.sqrt(3))],
        leads=["V1"])
    path = tmp_path / "graph.json"
    path.write_text(serialize_graph(g))
    return str(path)


@pytest.fixture
def interval_file(tmp_path):
    g = MetricGraph([Vertex("A"), Vertex("B")], [Edge("A", "B", 1.0)])
    path = tmp_path / "interval.json"
    path.write_text(serialize_graph(g))
    return str(path)


# --------------------------------------------------------------------------
# grid parsing
# --------------------------------------------------------------------------

def test_parse_grid_range_inclusive():
    assert parse_grid("1:2:0.5") == [1.0, 1.5, 2.0]


def test_parse_grid_comma_and_scalar():
    assert parse_grid("3,1,2") == [3.0, 1.0, 2.0]
    assert parse_grid("4.25") == [4.25]


def test_parse_grid_rejects_bad_range():
    with pytest.raises(ValueError):
        parse_grid("1:2:0")
    with pytest.raises(ValueError):
        parse_grid("1:2:3:4")


# --------------------------------------------------------------------------
# spectrum
# --------------------------------------------------------------------------

def test_spectrum_both_modes(interval_file, capsys):
    rc = main(["spectrum", "--graph", interval_file, "--zmax", "100"])
    out = capsys.readouterr().out
    assert rc == 0
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert lines[0] == "index,eigenvalue_weyl,eigenvalue_matching,multiplicity"
    rows = [ln.split(",") for ln in lines[1:]]
    assert len(rows) == 4
    for row in rows:
        assert float(row[1]) == pytest.approx(float(row[2]), abs=1e-8)
    assert float(rows[1][1]) == pytest.approx(math.pi ** 2, abs=1e-8)


def test_spectrum_single_mode_columns(interval_file, capsys):
    rc = main(["spectrum", "--graph", interval_file, "--zmax", "50",
               "--mode", "matching"])
    out = capsys.readouterr().out
    assert rc == 0
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert lines[0] == "index,eigenvalue,multiplicity,mode"
    assert lines[1].endswith(",matching")


def test_spectrum_kappa_override(interval_file, capsys):
    rc = main(["spectrum", "--graph", interval_file, "--zmax", "50",
               "--kappa", "1e6,1e6", "--mode", "weyl"])
    out = capsys.readouterr().out
    assert rc == 0
    first = [ln for ln in out.splitlines() if not ln.startswith("#")][1]
    z1 = float(first.split(",")[1])
    assert z1 == pytest.approx(math.pi ** 2, rel=1e-4)


def test_spectrum_deterministic_bytes(graph_file, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out1, out2):
        rc = main(["spectrum", "--graph", graph_file, "--zmax", "40",
                   "--out", str(out)])
        assert rc == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.read_bytes().endswith(b"\n")


def test_spectrum_bad_kappa_count(interval_file, capsys):
    rc = main(["spectrum", "--graph", interval_file, "--zmax", "10",
               "--kappa", "1,2,3"])
    assert rc == 2
    assert "canonical vertex order" in capsys.readouterr().err


def test_spectrum_missing_file(capsys):
    rc = main(["spectrum", "--graph", "/nonexistent.json", "--zmax", "10"])
    assert rc == 2


def test_spectrum_invalid_graph(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": [{"id": "A"}], "edges": []}')
    rc = main(["spectrum", "--graph", str(bad), "--zmax", "10"])
    assert rc == 2
    assert "no edges" in capsys.readouterr().err


# --------------------------------------------------------------------------
# smatrix
# --------------------------------------------------------------------------

def test_smatrix_scalar_json(graph_file, capsys):
    rc = main(["smatrix", "--graph", graph_file, "--s", "2.0"])
    out = capsys.readouterr().out
    assert rc == 0
    payload = json.loads(out)
    assert payload["s"] == 2.0
    assert payload["external_order"] == ["V1"]
    assert payload["unitarity_defect"] < 1e-10
    entry = complex(payload["entries_re"][0][0], payload["entries_im"][0][0])
    assert abs(abs(entry) - 1.0) < 1e-10


def test_smatrix_grid_csv(graph_file, tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main(["smatrix", "--graph", graph_file, "--s", "0.5:5:0.5",
               "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    data = [ln for ln in lines if ln and not ln.startswith("#")]
    assert data[0].split(",")[:3] == ["s", "re_V1_V1", "im_V1_V1"]
    assert len(data) == 11  # header + 10 points


def test_smatrix_jobs_deterministic(graph_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["smatrix", "--graph", graph_file, "--s", "0.5:8:0.25",
          "--jobs", "4", "--out", str(a)])
    main(["smatrix", "--graph", graph_file, "--s", "0.5:8:0.25",
          "--jobs", "1", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_smatrix_skips_poles(tmp_path, capsys):
    g = MetricGraph([Vertex("V1"), Vertex("V2")], [Edge("V1", "V2", 1.0)],
                    leads=["V1"])
    path = tmp_path / "g.json"
    path.write_text(serialize_graph(g))
    rc = main(["smatrix", "--graph", str(path), "--s",
               f"1.0,{math.pi**2},4.0"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "# skipped" in out
    data = [ln for ln in out.splitlines() if ln and not ln.startswith("#")]
    assert len(data) == 3  # header + 2 surviving points


def test_smatrix_needs_leads(interval_file, capsys):
    rc = main(["smatrix", "--graph", interval_file, "--s", "1.0"])
    assert rc == 2
    assert "lead" in capsys.readouterr().err


# --------------------------------------------------------------------------
# invert
# --------------------------------------------------------------------------

def test_invert_forward_roundtrip(graph_file, tmp_path, capsys):
    res = tmp_path / "residuals.csv"
    rc = main(["invert", "--graph-topology", graph_file,
               "--oracle", "forward", "--true-couplings", "0.5,-0.25,1.0",
               "--residuals-out", str(res)])
    out = capsys.readouterr().out
    assert rc == 0
    payload = json.loads(out)
    assert payload["couplings"]["V1"][0] == pytest.approx(0.5, abs=1e-6)
    assert payload["couplings"]["V2"][0] == pytest.approx(-0.25, abs=1e-6)
    assert payload["couplings"]["V3"][0] == pytest.approx(1.0, abs=1e-6)
    assert payload["metadata"]["mode"] == "forward-oracle"
    lines = res.read_text().splitlines()
    assert lines[1] == "target,path_length,value_re,value_im,residual"
    assert len(lines) == 5


def test_invert_needs_a_source(graph_file, capsys):
    rc = main(["invert", "--graph-topology", graph_file])
    assert rc == 2


def test_invert_from_samples(graph_file, tmp_path, capsys):
    g = MetricGraph(
        [Vertex("V1", 0.5), Vertex("V2", -0.25), Vertex("V3", 1.0)],
        [Edge("V1", "V2", 1.0), Edge("V2", "V3", math.sqrt(2)),
         Edge("V1", "V3", math.sqrt(3))],
        leads=["V1"])
    k = CouplingMatrix.from_graph(g)
    csv = tmp_path / "samples.csv"
    rows = ["z,re,im"]
    for j in range(8):
        z = -((32.0 * 2 ** j) ** 2)
        v = robin_to_dirichlet(g, k, z)[0, 0]
        rows.append(f"{z},{v.real},{v.imag}")
    csv.write_text("\n".join(rows) + "\n")
    rc = main(["invert", "--graph-topology", graph_file,
               "--rtd-samples", str(csv)])
    out = capsys.readouterr().out
    assert rc == 0
    payload = json.loads(out)
    assert payload["metadata"]["mode"] == "sampled-data"
    assert payload["couplings"]["V1"][0] == pytest.approx(0.5, abs=1e-6)


def test_invert_diverges_on_bad_samples(graph_file, tmp_path, capsys):
    csv = tmp_path / "coarse.csv"
    rows = ["z,re,im"]
    for z in np.linspace(-10, -1, 12):
        rows.append(f"{z},{1.0 / z},0.0")
    csv.write_text("\n".join(rows) + "\n")
    with pytest.warns(ScanResolution):  # grid stops far short of the ladder
        rc = main(["invert", "--graph-topology", graph_file,
                   "--rtd-samples", str(csv)])
    assert rc == 3
    assert "numerical failure" in capsys.readouterr().err


def test_invert_rejects_malformed_csv(graph_file, tmp_path, capsys):
    csv = tmp_path / "broken.csv"
    csv.write_text("z,re,im\n-1024.0,0.5\n")
    rc = main(["invert", "--graph-topology", graph_file,
               "--rtd-samples", str(csv)])
    assert rc == 2


# --------------------------------------------------------------------------
# homog
# --------------------------------------------------------------------------

def test_homog_table_and_orders(tmp_path):
    disp = tmp_path / "disp.csv"
    rc = main(["homog", "--l1", "0.25", "--l2", "0.5",
               "--eps-list", "0.2,0.1,0.05", "--tau-grid", "0,1.5",
               "--bands", "2", "--out", str(disp)])
    assert rc == 0
    text = disp.read_text()
    assert "# convergence" in text
    data = [ln for ln in text.splitlines()
            if ln and not ln.startswith("#")]
    # 2 taus * 2 bands * (3 eps + hom + hom-shifted)
    assert len([r for r in data if r.startswith("eps:")]) == 12
    assert len([r for r in data if r.startswith("hom,")]) == 4
    assert len([r for r in data if r.startswith("hom-shifted,")]) == 4
    # fitted orders sit near 2
    conv = [ln for ln in data if ln[0].isdigit() and ln.count(",") == 4]
    orders = {float(ln.split(",")[4]) for ln in conv
              if ln.split(",")[4] != "nan"}
    assert orders and all(1.8 < o < 2.3 for o in orders)


def test_homog_split_orders_file(tmp_path):
    disp, orders = tmp_path / "d.csv", tmp_path / "o.csv"
    rc = main(["homog", "--l1", "0.25", "--l2", "0.5",
               "--eps-list", "0.2,0.1,0.05", "--tau-grid", "1.0",
               "--bands", "1", "--out", str(disp),
               "--orders-out", str(orders)])
    assert rc == 0
    assert "# convergence" not in disp.read_text()
    assert "fitted_order" in orders.read_text()


def test_homog_rejects_bad_widths(capsys):
    rc = main(["homog", "--l1", "0.7", "--l2", "0.5",
               "--eps-list", "0.1", "--tau-grid", "0"])
    assert rc == 2


def test_homog_deterministic_across_jobs(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out, jobs in ((a, "3"), (b, "1")):
        main(["homog", "--l1", "0.3", "--l2", "0.45",
              "--eps-list", "0.1", "--tau-grid", "0:3.0:0.75",
              "--bands", "2", "--jobs", jobs, "--out", str(out)])
    assert a.read_bytes() == b.read_bytes()


# --------------------------------------------------------------------------
# check + module entry
# --------------------------------------------------------------------------

def test_check_suite_passes(capsys):
    rc = main(["check"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "FAIL" not in out
    assert out.strip().splitlines()[-1].endswith("invariants passed")


def test_module_entry_help():
    proc = subprocess.run([sys.executable, "-m", "qgs", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("spectrum", "smatrix", "invert", "homog", "check"):
        assert sub in proc.stdout


def test_unknown_subcommand_is_usage_error():
    proc = subprocess.run([sys.executable, "-m", "qgs", "frobnicate"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
