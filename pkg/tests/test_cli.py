import json
import subprocess
import sys

import pytest

from gaplimits.cli import SCHEMA, main, resolve
from gaplimits.config import parse_config
from gaplimits.report import parse_text


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_measure(capsys):
    code, out, err = run(["measure", "--kappa", "9", "--format", "text"], capsys)
    assert code == 0 and err == ""
    vals = parse_text(out)
    assert vals["measure.asymptotic_density"] == "1/8"
    assert vals["measure.effective_density"] == "35/761"


def test_mk_bound_k2(capsys):
    code, out, _ = run(["mk-bound", "--k", "2", "--degree", "0", "--format", "tree"], capsys)
    assert code == 0
    tree = json.loads(out)
    assert tree["sections"]["bound"]["value"] == "4/3"


def test_construct_success_and_infeasible(capsys):
    ok = ["construct", "--betas", "0,1", "--y", "500", "--y1", "3", "--y2", "25", "--delta", "50", "--z", "1500"]
    code, out, _ = run(ok + ["--format", "text"], capsys)
    assert code == 0
    vals = parse_text(out)
    assert vals["checks.residual_exact"] == "true"
    assert vals["checks.sieved_interval"] == "true"
    bad = ["construct", "--betas", "0,1,2,3", "--y", "2000", "--y1", "5", "--y2", "400", "--delta", "500"]
    code, out, err = run(bad, capsys)
    assert code == 1 and out == ""
    assert err.startswith("error[E_INFEASIBLE]") and "stage" in err


def test_reruns_are_byte_identical(capsys):
    argv = ["lemma46", "--k", "10", "--samples", "2000", "--points", "50", "--seed", "7"]
    first = run(argv, capsys)[1]
    second = run(argv, capsys)[1]
    assert first == second
    other = run(argv[:-1] + ["8"], capsys)[1]
    assert other != first


def test_formats_render(capsys):
    for fmt in ("csv", "tree", "text"):
        code, out, _ = run(["bv-scan", "--N", "1000", "--theta", "0.3", "--format", fmt], capsys)
        assert code == 0 and out
    csv_out = run(["bv-scan", "--N", "1000", "--theta", "0.3"], capsys)[1]
    assert csv_out.startswith("# command: bv-scan\n")


def test_config_defaults_and_override(tmp_path, capsys):
    f = tmp_path / "run.cfg"
    f.write_text("# minimal\ncommand = measure\n")
    cfg = resolve(["--config", str(f)])
    assert cfg.params["kappa"] == 9 and cfg.format == "csv"
    f.write_text("command = measure\nkappa = 5\nformat = text\n")
    assert resolve(["--config", str(f)]).params["kappa"] == 5
    cfg = resolve(["--config", str(f), "measure", "--kappa", "4"])
    assert cfg.params["kappa"] == 4 and cfg.format == "text"


@pytest.mark.parametrize(
    "body, code",
    [
        ("command = measure\nkappa = 3\nkappa = 4\n", "E_DUPLICATE_KEY"),
        ("command = measure\nkapa = 3\n", "E_UNKNOWN_KEY"),
        ("command = construct\nbetas = 0,x\n", "E_MALFORMED"),
        ("command = measure\nkappa 3\n", "E_MALFORMED"),
    ],
)
def test_config_errors(tmp_path, capsys, body, code):
    f = tmp_path / "bad.cfg"
    f.write_text(body)
    rc, out, err = run(["--config", str(f)], capsys)
    assert rc == 1 and out == ""
    assert err.startswith(f"error[{code}]")


def test_flag_errors(capsys):
    rc, _, err = run(["measure", "--kappa", "abc"], capsys)
    assert rc == 1 and "E_MALFORMED" in err
    rc, _, err = run(["measure", "--nope", "1"], capsys)
    assert rc == 2 and "E_USAGE" in err
    rc, _, err = run([], capsys)
    assert rc == 2
    rc, _, err = run(["measure", "--kappa", "1"], capsys)
    assert rc == 1 and "E_ARG" in err


def test_unwritable_output(tmp_path, capsys):
    target = tmp_path / "missing" / "dir" / "out.csv"
    rc, _, err = run(["measure", "--out", str(target)], capsys)
    assert rc == 1 and "E_OUTPUT" in err


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.txt"
    assert run(["measure", "--out", str(target), "--format", "text"], capsys)[0] == 0
    assert "35/761" in target.read_text()


def test_canonical_round_trip(tmp_path):
    cfg = resolve(["construct", "--betas", "0,1/2", "--y", "500", "--excluded", "13,17", "--seed", "3"])
    text = cfg.canonical()
    f = tmp_path / "c.cfg"
    f.write_text(text)
    again = parse_config(f, SCHEMA)
    assert again == cfg
    assert again.canonical() == text


def test_spec_file(tmp_path, capsys):
    f = tmp_path / "f.spec"
    f.write_text("operation = ratio\nk = 2\nmonomial = 1 : 0,0\n")
    code, out, _ = run(["mk-bound", "--spec", str(f), "--format", "text"], capsys)
    assert code == 0
    assert parse_text(out)["functional.value"] == "4/3"
    f.write_text("operation = ratio\nk = 2\nk = 3\n")
    code, _, err = run(["mk-bound", "--spec", str(f)], capsys)
    assert code == 1 and "E_DUPLICATE_KEY" in err


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "gaplimits", "measure", "--kappa", "3", "--format", "text"], capture_output=True, text=True)
    assert p.returncode == 0
    assert "measure.effective_density = 1/3" in p.stdout
