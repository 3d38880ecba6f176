import json

import numpy as np
import pytest

from pushasep import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def test_transition_sums_to_one(capsys):
    code, out, _ = run(capsys, "transition", "--L", "5", "--N", "2", "--Y", "0,2", "--t", "0.5")
    assert code == 0
    body = rows(out)
    assert body[0] == "X,re,im" and len(body) == 11
    total = sum(float(r.split(",")[1]) for r in body[1:])
    assert total == pytest.approx(1, abs=1e-8)


def test_missing_time_is_config_error(capsys):
    code, _, err = run(capsys, "transition", "--L", "5", "--N", "2", "--Y", "0,2")
    assert code == 2 and "--t" in err


def test_bad_configuration_is_config_error(capsys):
    code, _, _ = run(capsys, "transition", "--L", "5", "--N", "2", "--Y", "0,7", "--t", "1")
    assert code == 2


def test_numerical_failure_exit(capsys):
    code, _, err = run(capsys, "limit", "f1", "--tau", "20", "--x=-30")
    assert code == 1 and "numerical failure" in err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# ring\nL = 4\nN = 2\nt = 0.7\nY = 0,1\n")
    code, out, _ = run(capsys, "oracle", "--config", str(cfg))
    assert code == 0
    assert '"t": 0.7' in out
    code2, out2, _ = run(capsys, "oracle", "--config", str(cfg), "--t", "0.7")
    assert rows(out) == rows(out2)


def test_jsonl_output(capsys):
    code, out, _ = run(
        capsys, "current-cdf", "--L", "4", "--N", "2", "--Y", "0,2", "--t", "0.5", "--Q", "0,1", "--format", "jsonl"
    )
    assert code == 0
    recs = [json.loads(line) for line in out.splitlines()]
    assert "meta" in recs[0]
    assert len(recs) == 3


def test_output_is_reproducible(tmp_path):
    argv = ["simulate", "--L", "5", "--N", "2", "--Y", "0,2", "--t", "0.5", "--trials", "200", "--seed", "3"]
    path = tmp_path / "run.csv"
    assert cli.main(argv + ["--out", str(path)]) == 0
    first = path.read_bytes()
    assert cli.main(argv + ["--out", str(path)]) == 0
    assert path.read_bytes() == first


def test_fuss_catalan(capsys):
    code, out, _ = run(capsys, "fuss-catalan", "--fc-p", "2", "--fc-r", "2", "--m", "3")
    assert code == 0
    assert [int(r.split(",")[-1]) for r in rows(out)[1:]] == [1, 2, 5, 14]


def test_limit_grid(capsys):
    code, out, _ = run(capsys, "limit", "f1", "--tau", "1", "--x=-1,0,1")
    assert code == 0
    vals = [float(r.split(",")[-1]) for r in rows(out)[1:]]
    assert len(vals) == 3 and np.all(np.diff(vals) > 0)


def test_parsers():
    assert cli._int_list("-2:3") == [-2, -1, 0, 1, 2, 3]
    assert cli._int_list("0,2") == [0, 2]
    assert list(cli._float_grid("0:1:3")) == [0.0, 0.5, 1.0]
    assert cli._complex("0.8+0.6j") == 0.8 + 0.6j


def test_validate_subset(capsys):
    code, out, err = run(capsys, "validate", "--only", "ac5", "ac12")
    assert code == 0
    assert "AC-5 PASS" in err and "AC-12 PASS" in err
    assert rows(out)[0].startswith("criterion,passed")
