import csv
import io
import json
import math

import pytest

from netgeo import cli
from netgeo.graph import clique_network, to_edge_list
from netgeo.volume import KappaCache


@pytest.fixture
def run(capsys, tmp_path, monkeypatch):
    """Run the CLI in-process with a private kappa cache; returns (code, out, err)."""
    monkeypatch.setenv("NETGEO_KAPPA_CACHE", str(tmp_path / "kappa.txt"))

    def _run(*argv):
        code = cli.main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# --- entropy ----------------------------------------------------------------


def test_entropy_json_record(run, tmp_path):
    g = write(tmp_path, "e.txt", "3\n1 2\n")
    code, out, _ = run("entropy", g, "--samples", 20000)
    assert code == 0
    rec = json.loads(out)
    assert list(rec) == list(cli.RESULT_FIELDS)
    assert rec["n"] == 3 and rec["samples"] == 20000 and rec["seed"] == 42 and rec["log_base"] == "2"
    assert rec["entropy"] == pytest.approx(-math.log2(rec["volume"]), rel=1e-15)


def test_entropy_empty_graph_is_zero(run, tmp_path):
    g = write(tmp_path, "empty6.txt", "6\n")
    code, out, _ = run("entropy", g, "--samples", 400_000)
    rec = json.loads(out)
    assert code == 0
    assert abs(rec["entropy"]) <= 3 * rec["entropy_stderr"] + 3 * rec["volume_stderr"] / math.log(2)


def test_entropy_complete_six_graph(run, tmp_path):
    g = write(tmp_path, "k6.txt", to_edge_list(clique_network(6, 6)))
    code, out, _ = run("entropy", g, "--samples", 2_000_000)
    rec = json.loads(out)
    assert code == 0
    assert abs(rec["entropy"] - 4.0767) <= max(0.03, 3 * rec["entropy_stderr"])
    assert 0.0 < rec["accepted_fraction"] < 1.0


def test_entropy_self_loop_exit_2(run, tmp_path):
    g = write(tmp_path, "bad.txt", "3\n1 2\n2 2\n")
    code, out, err = run("entropy", g)
    assert code == 2 and out == ""
    assert "line 3" in err


def test_entropy_missing_file_exit_2(run, tmp_path):
    code, _, err = run("entropy", tmp_path / "nope.txt")
    assert code == 2 and "nope.txt" in err


def test_entropy_adjacency_input_and_natural_log(run, tmp_path):
    g = write(tmp_path, "a.txt", "2\n0 1\n1 0\n")
    code, out, _ = run("entropy", g, "--graph-format", "adjacency-matrix", "--log-base", "e", "--samples", 5000)
    rec = json.loads(out)
    assert code == 0 and rec["log_base"] == "e"
    assert rec["entropy"] == pytest.approx(-math.log(rec["volume"]), rel=1e-15)


def test_too_few_samples_is_usage_error(run, tmp_path):
    g = write(tmp_path, "e.txt", "2\n")
    code, _, err = run("entropy", g, "--samples", 1)
    assert code == 2 and "--samples" in err


# --- table ------------------------------------------------------------------


def test_table_json_and_csv_agree(run):
    code, js, _ = run("table", "--n", 3, "--samples", 30000)
    assert code == 0
    code, cs, _ = run("table", "--n", 3, "--samples", 30000, "--format", "csv")
    assert code == 0
    records = json.loads(js)
    rows = list(csv.DictReader(io.StringIO(cs)))
    assert [r["k"] for r in records] == [0, 1, 2]
    assert list(rows[0]) == ["k"] + list(cli.RESULT_FIELDS)
    for r, c in zip(records, rows):
        for field in ("kappa", "volume", "volume_stderr", "entropy", "entropy_stderr", "accepted_fraction"):
            assert float(c[field]) == float(format(r[field], ".6g"))
        assert int(c["samples"]) == r["samples"] and c["network"] == r["network"]


def test_json_floats_round_trip():
    v = 0.1 + 0.2
    assert json.loads(cli.format_json({"x": v}))["x"] == v
    assert "0.30000000000000004" in cli.format_json({"x": v})


def test_table_two_vertices(run):
    code, out, _ = run("table", "--n", 2, "--samples", 200_000)
    rows = json.loads(out)
    assert code == 0 and len(rows) == 2
    assert rows[1]["volume"] < rows[0]["volume"]


def test_table_single_vertex(run):
    code, out, _ = run("table", "--n", 1, "--samples", 100_000)
    (row,) = json.loads(out)
    assert code == 0 and row["k"] == 0
    assert abs(row["volume"] - 1.0) <= 3 * math.hypot(row["volume_stderr"], row["volume_stderr"])


def test_table_plain_has_plot_block(run):
    code, out, _ = run("table", "--n", 3, "--samples", 20000, "--format", "plain")
    assert code == 0
    block = out.split("# k entropy\n")[1].strip().splitlines()
    assert [line.split()[0] for line in block] == ["0", "1", "2"]
    assert all(len(line.split()) == 2 for line in block)
    float(block[2].split()[1])


def test_table_requires_n(run):
    assert run("table")[0] == 2
    assert run("table", "--n", 0)[0] == 2


def test_table_threads_byte_identical(run):
    a = run("table", "--n", 3, "--samples", 100_000, "--threads", 1, "--recalibrate")[1]
    b = run("table", "--n", 3, "--samples", 100_000, "--threads", 8, "--recalibrate")[1]
    assert a == b


# --- kappa and its cache ----------------------------------------------------


def test_kappa_command_fills_cache(run, tmp_path):
    code, out, _ = run("kappa", "--n", 2, "--samples", 5000)
    rec = json.loads(out)
    assert code == 0 and rec["n"] == 2
    assert KappaCache(tmp_path / "kappa.txt").get(2, 5000, 42).kappa == rec["kappa"]


def test_kappa_flag_beats_environment(run, tmp_path):
    flag = tmp_path / "flag.txt"
    run("kappa", "--n", 2, "--samples", 5000, "--kappa-cache", flag)
    assert flag.exists() and not (tmp_path / "kappa.txt").exists()


def test_kappa_cache_path_precedence(monkeypatch):
    monkeypatch.setenv("NETGEO_KAPPA_CACHE", "/env/k.txt")
    assert cli.kappa_cache_path("/flag/k.txt") == "/flag/k.txt"
    assert cli.kappa_cache_path(None) == "/env/k.txt"
    monkeypatch.delenv("NETGEO_KAPPA_CACHE")
    monkeypatch.setenv("XDG_CACHE_HOME", "/xdg")
    assert cli.kappa_cache_path(None) == "/xdg/netgeo/kappa.txt"


def test_cached_kappa_is_reused(run, tmp_path):
    KappaCache(tmp_path / "kappa.txt").put(
        __import__("netgeo").KappaRecord(2, 0.5, 0.01, 5000, 42)
    )
    rec = json.loads(run("kappa", "--n", 2, "--samples", 5000)[1])
    assert rec["kappa"] == 0.5
    rec = json.loads(run("kappa", "--n", 2, "--samples", 5000, "--recalibrate")[1])
    assert rec["kappa"] != 0.5


def test_corrupt_cache_is_replaced(run, tmp_path):
    (tmp_path / "kappa.txt").write_text("corrupt\n")
    code, out, _ = run("kappa", "--n", 2, "--samples", 5000)
    assert code == 0
    assert KappaCache(tmp_path / "kappa.txt").get(2, 5000, 42).kappa == json.loads(out)["kappa"]


# --- iso-check --------------------------------------------------------------


def test_iso_check_relabelled_five_vertex_graph(run, tmp_path):
    a = write(tmp_path, "a.txt", "5\n1 2\n2 3\n3 4\n1 3\n4 5\n")
    b = write(tmp_path, "b.txt", "5\n5 4\n4 3\n3 2\n5 3\n2 1\n")
    code, out, _ = run("iso-check", a, b, "--samples", 400_000)
    res = json.loads(out)
    assert code == 0 and res["isomorphic"]
    assert res["sigmas"] <= 3.0
    assert sorted(res["permutation"]) == [1, 2, 3, 4, 5]


def test_iso_check_k4_vs_c4(run, tmp_path):
    k4 = write(tmp_path, "k4.txt", to_edge_list(clique_network(4, 4)))
    c4 = write(tmp_path, "c4.txt", "4\n1 2\n2 3\n3 4\n4 1\n")
    code, out, _ = run("iso-check", k4, c4, "--format", "plain")
    assert code == 0 and out.strip() == "not isomorphic"
    assert json.loads(run("iso-check", k4, c4)[1]) == {"isomorphic": False}


def test_iso_check_size_bound(run, tmp_path):
    a = write(tmp_path, "a.txt", "9\n1 2\n")
    code, out, err = run("iso-check", a, a)
    assert code == 4 and "n <= 8" in err


def test_iso_check_parse_error(run, tmp_path):
    a = write(tmp_path, "a.txt", "3\n1 2\n")
    b = write(tmp_path, "b.txt", "3\n1 5\n")
    assert run("iso-check", a, b)[0] == 2


# --- verify -----------------------------------------------------------------


def test_verify_low_samples_reports_without_crashing(run):
    code, out, _ = run("verify", "--samples", 1000)
    lines = out.strip().splitlines()
    assert len(lines) == 10
    assert all(line.split()[0] in ("PASS", "FAIL", "WIDE") for line in lines)
    # deterministic checks do not depend on --samples
    for name in ("metric closed form", "pointwise isomorphism", "Bessel", "two-vertex volume inequality"):
        assert any(line.startswith("PASS") and name in line for line in lines), name
    assert code == (1 if any(line.startswith("FAIL") for line in lines) else 0)


@pytest.mark.slow
def test_verify_with_corrupt_cache_passes(run, tmp_path):
    (tmp_path / "kappa.txt").write_text("3 not-a-number\n")
    code, out, err = run("verify")
    assert "rejected" in err
    assert code == 0, out
    assert not KappaCache(tmp_path / "kappa.txt").rejected
