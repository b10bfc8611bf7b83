import csv
import json

import numpy as np
import pytest

from photokin.cli import main, read_field_csv


def run(tmp_path, *extra, name="out"):
    out = tmp_path / name
    rc = main(["run", "--problem", "test-1", *extra, "--out", str(out)])
    return rc, out


def test_run_writes_outputs(tmp_path, capsys):
    rc, out = run(tmp_path, "--scheme", "nsfd", "--theta", "2^-2")
    assert rc == 0
    for name in ("field.csv", "audit.json", "manifest.json"):
        assert (out / name).exists()
    audit = json.loads((out / "audit.json").read_text())
    assert audit["summary"]["all_positive"] and audit["summary"]["columnwise_monotone"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["resolved"]["grid"] == {"nx": 4, "nt": 4, "nl": 4}
    t, x, c, cB = read_field_csv(out / "field.csv")
    assert c.shape == (5, 5)
    np.testing.assert_allclose(c + cB, np.broadcast_to(c[0], c.shape), atol=1e-15)
    assert "all_positive=True" in capsys.readouterr().out


def test_run_zero_steps_gives_initial_row(tmp_path):
    rc, out = run(tmp_path, "--nx", "4", "--nt", "0", "--nl", "4")
    assert rc == 0
    t, x, c, cB = read_field_csv(out / "field.csv")
    assert c.shape == (1, 5)
    np.testing.assert_allclose(c[0], np.exp(-(x**2) / 5), rtol=1e-15)
    assert np.all(cB == 0)


def test_run_is_bit_identical(tmp_path):
    _, a = run(tmp_path, "--scheme", "dq", "--theta", "2^-3", name="a")
    _, b = run(tmp_path, "--scheme", "dq", "--theta", "2^-3", name="b")
    for name in ("field.csv", "audit.json", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("L: [1,")
    rc = main(["run", "--problem", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "malformed" in capsys.readouterr().err


def test_invalid_problem_exit_code(tmp_path):
    rc, _ = run(tmp_path, "--horizon", "-1")
    assert rc == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scheme", "nope", "--out", "x"])
    assert exc.value.code == 2


def test_audit_pass_and_fail(tmp_path, capsys):
    _, ok = run(tmp_path, "--scheme", "nsfd", "--theta", "2^-2", name="ok")
    assert main(["audit", str(ok / "field.csv")]) == 0
    _, bad = run(
        tmp_path, "--scheme", "ftrq", "--horizon", "20", "--dt", "5", "--dx", "0.125", "--dl", "0.125", name="bad"
    )
    capsys.readouterr()
    assert main(["audit", str(bad / "field.csv")]) == 1
    out = capsys.readouterr().out
    assert "first nonpositive value" in out and out.strip().endswith("FAIL")


def test_audit_detects_tampering(tmp_path):
    _, out = run(tmp_path, "--scheme", "nsfd", "--theta", "2^-2")
    path = out / "field.csv"
    rows = list(csv.reader(path.open()))
    header = rows[0]
    ci = header.index("c")
    last = rows[-1]
    last[ci] = repr(-float(last[ci]))
    with path.open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    assert main(["audit", str(path)]) == 1


def test_audit_dq_box(tmp_path, capsys):
    _, out = run(tmp_path, "--scheme", "dq", "--theta", "2^-2")
    capsys.readouterr()
    assert main(["audit", str(out / "field.csv")]) == 0
    assert "within_box=True" in capsys.readouterr().out


def test_series_metrics(tmp_path):
    _, out = run(tmp_path, "--scheme", "rq", "--theta", "2^-2")
    m = tmp_path / "m.csv"
    assert main(["series", str(out / "field.csv"), "--metric", "m_c", "--out", str(m)]) == 0
    vals = [float(r["m_c"]) for r in csv.DictReader(m.open())]
    assert len(vals) == 5 and vals[0] == pytest.approx(np.exp(-0.2), rel=1e-15)
    assert all(b < a for a, b in zip(vals, vals[1:]))
    r = tmp_path / "r.csv"
    assert main(["series", str(out / "field.csv"), "--metric", "R_c", "--out", str(r)]) == 0
    red = [float(row["R_c"]) for row in csv.DictReader(r.open())]
    assert red[0] == pytest.approx(1.0, abs=1e-2)
    assert all(0 < b < a for a, b in zip(red, red[1:]))
    e = tmp_path / "e.csv"
    assert main(["series", str(out / "field.csv"), "--metric", "e_t", "--reference", str(out / "field.csv"), "--out", str(e)]) == 0
    assert all(float(row["e_t"]) == 0.0 for row in csv.DictReader(e.open()))
    assert main(["series", str(out / "field.csv"), "--metric", "e_t"]) == 2


def test_weights_dump(capsys):
    assert main(["weights", "--weights", "gregory-1", "--n", "4"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,weight"
    w = [float(line.split(",")[1]) for line in lines[1:]]
    assert w == pytest.approx([5 / 12, 13 / 12, 1.0, 13 / 12, 5 / 12])
    assert main(["weights", "--n", "0"]) == 2


def test_convergence_csv_and_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("PHOTOKIN_CACHE_DIR", str(tmp_path / "cache"))
    base = ["convergence", "--problem", "test-1", "--scheme", "nsfd", "--ref-theta", "2^-5"]
    assert main([*base, "--thetas", "2^-2", "--out", str(tmp_path / "one")]) == 0
    rows = list(csv.reader((tmp_path / "one" / "convergence.csv").open()))
    assert rows[0] == ["theta", "E", "eoc"] and rows[1][2] == ""
    thetas = ["--thetas", "2^-2", "2^-3", "2^-4"]
    assert main([*base, *thetas, "--workers", "1", "--out", str(tmp_path / "a")]) == 0
    assert main([*base, *thetas, "--workers", "3", "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "convergence.csv").read_bytes()
    assert a == (tmp_path / "b" / "convergence.csv").read_bytes()
    assert len(list((tmp_path / "cache").glob("*.npz"))) == 1


def test_convergence_non_nested(tmp_path):
    rc = main(["convergence", "--thetas", "0.3", "--ref-theta", "2^-3", "--out", str(tmp_path / "x")])
    assert rc == 2
