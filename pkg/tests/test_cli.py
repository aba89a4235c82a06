import csv
import io
import json
import subprocess
import sys

import pytest

from annulus_xing.cli import RunConfig, build_parser, main, render
from annulus_xing.exceptions import DomainError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_exact_rows(capsys):
    code, out, _ = run(capsys, "exact", "--tau", "0.5", "--tau", "2")
    assert code == 0
    rows = table(out)
    assert [r["tau"] for r in rows] == ["0.5", "2"]
    for r in rows:
        for k in ("p_B", "p_BW", "p_BB", "p_one_interface"):
            assert 0 < float(r[k]) < 1
    assert rows[0]["channel"] == "eta;eta;open;closed"
    assert rows[1]["channel"] == "eta;eta;closed;closed"


def test_exact_channels_agree(capsys):
    _, closed, _ = run(capsys, "exact", "--tau", "0.5", "--channel", "closed")
    _, opened, _ = run(capsys, "exact", "--tau", "0.5", "--channel", "open")
    a, b = table(closed)[0], table(opened)[0]
    assert abs(float(a["p_BB"]) - float(b["p_BB"])) < 1e-8
    assert b["channel"] == "open;open;open;open"


def test_exact_thin_annulus(capsys):
    _, out, _ = run(capsys, "exact", "--tau", "0.05")
    r = table(out)[0]
    assert min(float(r["p_B"]), float(r["p_BW"]), float(r["p_BB"])) > 0.99


def test_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "exact", "--tau", "1")
    assert table(out)[0]["p_B"] == "0.636454001888"


def test_roots_table(capsys):
    code, out, _ = run(capsys, "roots", "--n-roots", "4")
    assert code == 0
    rows = table(out)
    assert len(rows) == 7
    assert all(float(r["residual"]) < 1e-10 for r in rows)
    for a, b in ((rows[1], rows[2]), (rows[3], rows[4])):
        assert a["re_s"] == b["re_s"] and float(a["im_s"]) == -float(b["im_s"])
        assert a["residue_re"] == b["residue_re"]
        assert float(a["residue_im"]) == -float(b["residue_im"])


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--x", "1")
    rows = table(out)
    assert code == 0
    assert {r["check"] for r in rows} == {"quadrature", "duality"}
    assert all(r["passed"] == "true" for r in rows)


def test_verify_fails_on_tight_tol(capsys):
    code, out, _ = run(capsys, "verify", "--x", "1", "--tol", "1e-16")
    assert code == 1
    assert any(r["passed"] == "false" for r in table(out))


def test_simulate_deterministic(capsys, tmp_path):
    args = ["simulate", "--tau", "0.25", "--mesh", "8", "--trials", "300", "--seed", "5"]
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(f1)]) == 0
    assert main(args + ["--out", str(f2)]) == 0
    assert f1.read_bytes() == f2.read_bytes()
    rows = table(f1.read_text())
    assert [r["event"] for r in rows] == ["B", "BW", "BB"]


def test_compare_json(capsys):
    code, out, _ = run(capsys, "compare", "--tau", "0.25", "--mesh", "16", "--trials", "1000",
                       "--events", "B,BW", "--format", "json")
    rows = [json.loads(line) for line in out.splitlines()]
    assert [r["event"] for r in rows] == ["B", "BW"]
    assert code == (0 if all(r["passed"] for r in rows) else 1)
    assert all(isinstance(r["passed"], bool) for r in rows)


def test_compare_fails_with_no_allowance(capsys):
    # a coarse mesh is biased; with zero allowance and many trials the check must fail
    code, out, _ = run(capsys, "compare", "--tau", "0.5", "--mesh", "8", "--trials", "4000",
                       "--events", "BW", "--tol", "1e-9")
    assert code == 1


def test_pretty(capsys):
    code, out, _ = run(capsys, "exact", "--tau", "1", "--format", "pretty")
    lines = out.splitlines()
    assert code == 0 and set(lines[1]) <= {"-", " "} and len(lines) == 3


@pytest.mark.parametrize("argv", [["exact"], ["exact", "--tau", "-1"], ["roots", "--n-roots", "1"],
                                  ["simulate", "--tau", "0.25", "--trials", "0"],
                                  ["simulate", "--tau", "0.25", "--events", "B,Q"]])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_convergence_failure_named(capsys):
    code, _, err = run(capsys, "exact", "--tau", "0.01", "--channel", "closed")
    assert code == 3
    assert "tau=0.01" in err and "p_BB" in err


def test_argparse_rejects_channel():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["exact", "--channel", "sideways"])


def test_config_validation():
    with pytest.raises(DomainError):
        RunConfig("exact", [0.5], seed=2**64).validate()
    RunConfig("roots").validate()


def test_render_csv_quotes():
    text = render([{"a": 1.0, "b": "x,y"}], ("a", "b"), "csv")
    assert text == 'a,b\n1,"x,y"\n'


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "annulus_xing", "exact", "--tau", "1"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("tau,p_B,")
