import csv
import io
import json

import pytest

from mtcc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_csv_to_stdout(capsys):
    code, out, _ = run(capsys, "simulate", "--k", "3", "--l", "2", "--n", "3", "--m-cache", "1",
                       "--file-size", "90", "--trials", "3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and rows[0]["decode_failures"] == "0" and rows[0]["trials"] == "3"


def test_simulate_dump_schedule(tmp_path, capsys):
    dump = tmp_path / "blocks.jsonl"
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "simulate", "--k", "3", "--l", "2", "--m-cache", "1", "--file-size", "30",
                     "--trials", "1", "--format", "json", "--out", str(out), "--dump-schedule", str(dump))
    assert code == 0
    blocks = [json.loads(x) for x in dump.read_text().splitlines()]
    assert blocks and set(blocks[0]) == {"alpha", "T", "omega", "blocklen"}
    assert json.loads(out.read_text())[0]["trials"] == 1


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--k", "4", "--m-cache", "2", "--file-size", "50", "--trials", "2",
                       "--sweep-param", "L", "--sweep-values", "1,2,3")
    assert code == 0
    assert [r["sweep_value"] for r in csv.DictReader(io.StringIO(out))] == ["1", "2", "3"]


def test_sweep_is_byte_identical(capsys):
    args = ("sweep", "--k", "4", "--m-cache", "2", "--file-size", "40", "--trials", "3",
            "--sweep-param", "M", "--sweep-values", "0,1,2", "--seed", "5")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_analytic(capsys):
    code, out, _ = run(capsys, "analytic", "--k", "3", "--l", "2", "--n", "3", "--m-cache", "1")
    assert code == 0
    data = json.loads(out)
    assert data["delay_infinite"] == pytest.approx(22 / 27)
    assert data["hybrid_superior"] is False


def test_fit_gamma(capsys):
    code, out, _ = run(capsys, "fit-gamma", "--k", "6", "--m-cache", "3", "--file-size", "5000",
                       "--alpha", "2", "--trials", "2")
    assert code == 0
    data = json.loads(out)
    assert data["n_used"] == 2 * 6 * 5 and data["shape"] > 0


def test_figure_to_file(tmp_path, capsys):
    out = tmp_path / "fig3.csv"
    code, _, _ = run(capsys, "figure", "3", "--trials", "1", "--out", str(out))
    assert code == 0 and len(out.read_text().splitlines()) == 17


@pytest.mark.parametrize("argv", [
    ("bogus",),
    ("simulate", "--k", "x"),
    ("simulate", "--k", "5", "--n", "3"),
    ("simulate", "--placement", "centralized", "--k", "4", "--m-cache", "1.5"),
    ("sweep", "--sweep-param", "L", "--sweep-values", "a,b"),
    ("analytic", "--k", "3", "--kc", "4"),
    ("fit-gamma", "--k", "3", "--alpha", "9"),
    ("simulate", "--demands", "0,x"),
])
def test_usage_errors_exit_1(argv, capsys):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_runtime_error_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--k", "2", "--file-size", "10", "--trials", "1",
                       "--out", str(tmp_path / "no" / "such" / "dir.csv"))
    assert code == 2 and "OSError" in err


def test_degenerate_fit_is_runtime_error(capsys):
    # M = 0: every level-1 piece has length F, so the sample has no spread
    code, _, err = run(capsys, "fit-gamma", "--k", "3", "--alpha", "1", "--trials", "2")
    assert code == 2 and "DegenerateSample" in err
