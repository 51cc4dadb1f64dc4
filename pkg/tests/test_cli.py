import csv
import io
import json
import math
import os

import pytest

from zetaladder import cli
from zetaladder.cache import DiskStore


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


@pytest.fixture(scope="module")
def shared(tmp_path_factory):
    return str(tmp_path_factory.mktemp("shared-cache"))


def test_moment_upper_zero(capsys, tmp_path):
    code, out, _ = run(capsys, "moment", "--kind", "crit2", "--upper", 0, "--cache-dir", tmp_path)
    assert code == 0
    (row,) = rows_of(out)
    assert float(row["value"]) == 0.0


def test_moment_J1000_and_cache(capsys, tmp_path, oracle, monkeypatch):
    argv = ("moment", "--kind", "crit2", "--upper", 1000, "--cache-dir", tmp_path)
    code, first, _ = run(capsys, *argv)
    assert code == 0
    (row,) = rows_of(first)
    assert abs(float(row["value"]) - oracle["J_1000"]) <= float(row["err_estimate"])
    assert "# config.sigma = 1.0" in first

    def boom(*a, **k):
        raise AssertionError("recomputed instead of reading the cache")

    monkeypatch.setattr(cli, "moment_integral", boom)
    code, second, _ = run(capsys, *argv)
    assert code == 0 and second == first


def test_cache_matches_fresh_computation(capsys, tmp_path):
    argv = ("moment", "--kind", "crit4", "--lower", 100, "--upper", 400, "--out", "json")
    _, cached, _ = run(capsys, *argv, "--cache-dir", tmp_path)
    _, fresh, _ = run(capsys, *argv, "--cache-dir", tmp_path, "--no-cache")
    assert json.loads(cached)["results"] == json.loads(fresh)["results"]


def test_corrupt_cache_entries_are_dropped(capsys, tmp_path):
    argv = ("moment", "--kind", "crit2", "--upper", 120, "--cache-dir", tmp_path)
    _, first, _ = run(capsys, *argv)
    path = os.path.join(tmp_path, "records.json")
    with open(path) as fh:
        data = json.load(fh)
    for entry in data.values():
        entry["value"]["value"] = 12345.0
    with open(path, "w") as fh:
        json.dump(data, fh)
    assert DiskStore(str(tmp_path), "records")._entries == {}
    _, second, _ = run(capsys, *argv)
    assert second == first


def test_no_cache_writes_nothing(capsys, tmp_path):
    d = tmp_path / "never"
    code, _, _ = run(capsys, "moment", "--upper", 60, "--cache-dir", d, "--no-cache")
    assert code == 0 and not d.exists()


def test_ladder(capsys, tmp_path):
    code, out, _ = run(capsys, "ladder", "--T", 1000, "--k", 3, "--cache-dir", tmp_path)
    assert code == 0
    its = [float(r["iterate"]) for r in rows_of(out)]
    assert len(its) == 4 and its == sorted(its) and len(set(its)) == 4


def test_zeros(capsys, tmp_path):
    code, out, _ = run(capsys, "zeros", "--T", 100, "--out", "json", "--cache-dir", tmp_path)
    doc = json.loads(out)
    assert code == 0 and doc["results"]["count"] == 29
    assert doc["results"]["zeros"][0] == pytest.approx(14.134725141734695, abs=1e-9)
    assert any(n.startswith("zeros-5000-") for n in os.listdir(tmp_path))


@pytest.mark.parametrize(
    "argv",
    [
        ("chain", "--tau", "0"),
        ("chain", "--tau", "3000", "--tau", "1000"),
        ("chain", "--sigma", "0.52"),
        ("fermat", "--triple", "1", "1", "1", "--n", "2"),
        ("fermat", "--triple", "0", "1", "1", "--n", "3"),
        ("moment",),
        ("nonsense",),
        ("fit", "--grid", "500:10000"),
    ],
)
def test_usage_errors(capsys, tmp_path, argv):
    code, _, err = run(capsys, *argv, "--cache-dir", tmp_path) if argv[0] != "nonsense" else run(capsys, *argv)
    assert code == 1
    assert "usage" in err


def test_config_file(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("sigma = 1.0\ncolour = blue\n")
    code, _, err = run(capsys, "ladder", "--T", 1000, "--config", bad, "--cache-dir", tmp_path)
    assert code == 1 and "colour" in err
    good = tmp_path / "good.cfg"
    good.write_text("# closed-form steps\nmode = asymptotic\nout = json\n")
    code, out, _ = run(capsys, "ladder", "--T", 1000, "--k", 1, "--config", good, "--cache-dir", tmp_path)
    doc = json.loads(out)
    assert code == 0 and doc["config"]["mode"] == "asymptotic" and doc["results"]["mode"] == "asymptotic"
    code, out, _ = run(capsys, "ladder", "--T", 1000, "--k", 1, "--config", good, "--mode", "integral", "--cache-dir", tmp_path)
    assert json.loads(out)["results"]["mode"] == "integral"


def test_computation_failure_exit_2(capsys, tmp_path):
    code, out, _ = run(capsys, "ladder", "--T", 50, "--cache-dir", tmp_path)
    assert code == 2
    doc = json.loads(out)
    assert doc["errors"][0]["code"] == "domain_error" and doc["results"] is None


def test_fit_stores_coefficients(capsys, shared):
    code, out, _ = run(capsys, "fit", "--grid", "500:10000:8", "--out", "json", "--cache-dir", shared)
    assert code == 0
    a = json.loads(out)["results"]["a_coeffs"]
    assert a[0] == 1 / (2 * math.pi**2)
    with open(os.path.join(shared, "config.cfg")) as fh:
        stored = fh.read()
    for s in range(1, 5):
        assert f"a{s} = {a[s]!r}" in stored


def test_calibrate_then_chain(capsys, shared):
    code, out, _ = run(capsys, "calibrate", "--l", 1, "--tau-ref", 5000, "--cache-dir", shared)
    assert code == 0
    (row,) = rows_of(out)
    assert float(row["cbar"]) == pytest.approx(0.7470091293511821, rel=1e-9)
    argv = ("chain", "--tau", 1000, "--tau", 3000, "--cache-dir", shared, "--plot", "svg", "--plot-file", os.path.join(shared, "c.svg"))
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert "missing_constant" not in out and "# error" not in out
    rows = rows_of(out)
    assert len(rows) == 2
    assert all(float(r["ratio_basic_state"]) == 1.0 for r in rows)
    with open(os.path.join(shared, "c.svg")) as fh:
        assert fh.read().startswith("<svg")
    # rerun is byte-identical
    assert run(capsys, *argv)[1] == out


def test_chain_without_calibration_still_reports(capsys, tmp_path):
    code, out, _ = run(capsys, "chain", "--tau", 1000, "--cache-dir", tmp_path)
    assert code == 0
    (row,) = rows_of(out)
    assert row["s1_moment"] == "missing_constant"
    assert float(row["basic_state"]) > 0


def test_fermat_json(capsys, shared):
    code, out, _ = run(capsys, "fermat", "--triple", 1, 1, 1, "--n", 3, "--mode", "asymptotic", "--out", "json", "--cache-dir", shared)
    assert code == 0
    res = json.loads(out)["results"]
    assert res["rational"] == "2"
    assert res["verdict"] == "separated from 1"
    for sample in res["samples"]:
        for name in cli.FIVE_INTEGRALS:
            assert sample["components"][name] > 0


def test_functional_command(capsys, shared):
    code, out, _ = run(capsys, "functional", "--name", "F1", "--x", 1, "--x", 2, "--tau", 1000, "--mode", "asymptotic", "--cache-dir", shared)
    assert code == 0
    rows = rows_of(out)
    assert [float(r["x"]) for r in rows] == [1.0, 2.0]
    assert float(rows[1]["value"]) > float(rows[0]["value"])
