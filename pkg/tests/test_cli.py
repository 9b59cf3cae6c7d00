import csv
import xml.etree.ElementTree as ET

import pytest

from symtri.cli import CSV_HEADER, main, parse_axis, parse_rational
from symtri.localmodel import dumps_model, rational_appendix_model


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_rational_is_exact():
    assert str(parse_rational("0.1753")) == "1753/10000"
    assert str(parse_rational("-1/3")) == "-1/3"
    assert parse_rational("E1C").denominator > 1
    assert [str(v) for v in parse_axis("0:1/10:1/20")] == ["0", "1/20", "1/10"]
    assert parse_axis("") == []


def test_check_heptagon(capsys, tmp_path):
    cert = tmp_path / "y.txt"
    code, out, _ = run(capsys, "check", "--e1", "1753/10000", "--e2", "-1/3", "--ring", "7",
                       "--families", "L1,L2", "--dump-certificate", str(cert))
    assert code == 2
    assert "INFEASIBLE_SYMMETRIC" in out and "verified  True" in out
    assert cert.read_text().strip()


def test_check_exit_codes(capsys):
    assert run(capsys, "check", "--e1", "0", "--e2", "0", "--ring", "7")[0] == 0
    assert run(capsys, "check", "--e1", "9/10", "--e2", "0", "--ring", "4")[0] == 3
    code, _, err = run(capsys, "check", "--e1", "nope", "--e2", "0", "--ring", "4")
    assert code == 4 and "not a rational" in err
    assert run(capsys, "check", "--e1", "0", "--e2", "0")[0] == 4
    assert run(capsys, "check", "--e1", "0", "--e2", "0", "--ring", "99")[0] > 3


def test_check_99_over_100(capsys):
    code, out, _ = run(capsys, "check", "--e1", "99/100", "--e2", "99/100", "--ring", "4")
    assert code in (0, 2)      # the E3 range is nonempty there, so the LP decides


def test_witness_eval(capsys):
    code, out, _ = run(capsys, "witness", "eval", "--paper", "--e1", "0", "--e2", "0")
    assert code == 0 and "-165823/10000" in out
    code, out, _ = run(capsys, "witness", "eval", "--paper", "--e1", "1656/10000", "--e2", "-1/3")
    assert "positive" in out


def test_witness_derive(capsys, tmp_path):
    path = tmp_path / "w.txt"
    code, out, _ = run(capsys, "witness", "derive", "--anchor", "1656/10000,-1/3", "--ring", "7",
                       "--out", str(path))
    assert code == 1 and "not refuted" in out and not path.exists()
    code, out, _ = run(capsys, "witness", "derive", "--anchor", "1/4,-1/3", "--ring", "7",
                       "--out", str(path))
    assert code == 0 and path.exists()
    code, out, _ = run(capsys, "witness", "eval", "--file", str(path), "--e1", "1/4", "--e2", "-1/3")
    assert "positive" in out
    assert run(capsys, "witness", "derive", "--anchor", "1/4,-1/3", "--ring", "7",
               "--families", "L1", "--out", str(path))[0] == 4


def test_verify_model_default_and_low_precision(capsys):
    code, out, _ = run(capsys, "verify-model")
    assert code == 0 and "match" in out
    code, out, _ = run(capsys, "verify-model", "--precision", "64")
    assert code == 0 and "relaxed to 1e-06" in out


def test_verify_model_files(capsys, tmp_path):
    good = tmp_path / "good.txt"
    good.write_text(dumps_model(rational_appendix_model()))
    assert run(capsys, "verify-model", "--model", str(good))[0] == 0
    bad = tmp_path / "bad.txt"
    bad.write_text(good.read_text().replace("f_b\n1 1 0", "f_b\n1 7 0"))
    code, _, err = run(capsys, "verify-model", "--model", str(bad))
    assert code > 3 and "f_b" in err
    sym = tmp_path / "sym.txt"
    sym.write_text("kind symmetric\nsource\n1/4 1/4\n1/4 1/4\nresponse\n1 0\n1/2 1/3\n")
    code, out, _ = run(capsys, "verify-model", "--model", str(sym), "--max-ring", "6")
    assert code == 0 and "all hold" in out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_scan_row_and_resume(capsys, tmp_path):
    out = tmp_path / "scan.csv"
    svg = tmp_path / "scan.svg"
    code, _, _ = run(capsys, "scan", "--e1", "0.165,0.17,0.1753", "--e2", "-1/3", "--level", "4",
                     "--out", str(out), "--svg", str(svg))
    assert code == 0
    rows = _rows(out)
    assert rows[0] == CSV_HEADER
    assert [(r[4], r[5]) for r in rows[1:]] == [("INFEASIBLE_SYMMETRIC", "4")] * 3
    # extend the grid; finished points are not redone
    code, text, _ = run(capsys, "scan", "--e1", "0,0.165,0.17,0.1753", "--e2", "-1/3",
                        "--level", "4", "--out", str(out), "--svg", str(svg))
    assert "resuming: 3" in text
    rows = _rows(out)
    assert len(rows) == 5 and rows[-1][:2] == ["0", "1"]
    root = ET.parse(svg).getroot()
    rects = [e for e in root.iter() if e.tag.endswith("rect")]
    assert len(rects) == 4


def test_scan_config_env_and_threads(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "scan.cfg"
    out = tmp_path / "grid.csv"
    cfg.write_text(f"# grid\ne1 = 0:1/2\ne2 = -1/2:1/2\nstep = 1/2\nlevel = 2\nout = {out}\n")
    monkeypatch.setenv("SYMTRI_THREADS", "2")
    assert run(capsys, "scan", "--config", str(cfg))[0] == 0
    rows = _rows(out)[1:]
    assert len(rows) == 6
    verdicts = {(r[0], r[2]): r[4] for r in rows}
    assert verdicts[("0", "0")] == "UNDECIDED"
    assert verdicts[("0", "-1")] == "INVALID_GRAY"
    again = tmp_path / "again.csv"
    cfg.write_text(cfg.read_text().replace(str(out), str(again)))
    monkeypatch.setenv("SYMTRI_THREADS", "1")
    run(capsys, "scan", "--config", str(cfg))
    strip = lambda rs: [r[:7] for r in rs]
    assert strip(_rows(again)) == strip(_rows(out))


def test_scan_empty_range(capsys, tmp_path):
    out = tmp_path / "empty.csv"
    assert run(capsys, "scan", "--e1", "", "--e2", "0", "--out", str(out))[0] == 0
    assert _rows(out) == [CSV_HEADER]


def test_scan_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert run(capsys, "scan", "--config", str(cfg))[0] == 4
