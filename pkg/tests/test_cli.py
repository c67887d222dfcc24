import csv
import io
import json
import subprocess
import sys
from itertools import groupby

import numpy as np
import pytest

from heatseries.cli import main


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_kernel_eval(capsys):
    code, out = run(["kernel-eval", "--n", "1", "--x", "0", "--t", "0", "--y", "0", "--s", "1"], capsys)
    assert code == 0
    assert rows(out)[0]["value"] == "0.28209479177387814"


def test_kernel_eval_vector_arguments(capsys):
    code, out = run(["kernel-eval", "--n", "2", "--x=1,0", "--t", "0", "--y", "0,0", "--s", "0.5"], capsys)
    assert code == 0
    assert float(rows(out)[0]["value"]) == pytest.approx(np.exp(-0.5) / (2 * np.pi), rel=1e-15)


def test_kernel_eval_bad_vector(capsys):
    assert main(["kernel-eval", "--n", "2", "--x=1,0,3", "--t", "0", "--y", "0", "--s", "1"]) == 2


def test_caloric_verify(capsys):
    code, out = run(["caloric-verify", "--n", "2", "--max-degree", "6"], capsys)
    assert code == 0
    records = rows(out)
    assert len(records) == 28
    assert all(r["heat_operator_zero"] == "true" and r["homogeneous"] == "true" for r in records)
    assert records[3]["polynomial"].endswith("(x1^2 - 2*t)")


def test_taylor_error(capsys):
    code, out = run(["taylor-error", "--n", "1", "--tol", "1e-10"], capsys)
    assert code == 0
    records = rows(out)
    assert list(records[0]) == ["n", "t_over_s", "K", "rel_error", "envelope"]
    ratios = []
    for r, group in groupby(records, key=lambda d: d["t_over_s"]):
        ratios.append(float(r))
        g = list(group)
        env = [float(d["envelope"]) for d in g]
        assert all(b <= a for a, b in zip(env, env[1:]))
        assert float(g[-1]["rel_error"]) <= 1e-10
    assert ratios == pytest.approx([i / 10 for i in range(1, 10)])


def test_taylor_error_fails_when_cap_too_low(capsys):
    code, _ = run(["taylor-error", "--n", "1", "--tol", "1e-10", "--K", "20"], capsys)
    assert code == 1


def test_mehler_check(capsys):
    code, out = run(["mehler-check", "--n", "3", "--count", "20"], capsys)
    assert code == 0
    assert len(rows(out)) == 20
    assert max(float(r["rel_error"]) for r in rows(out)) <= 1e-9


@pytest.mark.parametrize("n", ["2", "3"])
def test_laplace_error(capsys, n):
    code, out = run(["laplace-error", "--n", n], capsys)
    assert code == 0
    records = rows(out)
    assert len(records) == 5 * 49


def test_convolution_check(capsys):
    code, out = run(["convolution-check"], capsys)
    assert code == 0
    assert {r["identity"] for r in rows(out)} == {"laplace", "heat"}


def test_fastsum_bench_from_files(tmp_path, capsys):
    rng = np.random.default_rng(0)
    src = tmp_path / "sources.csv"
    tgt = tmp_path / "targets.csv"
    np.savetxt(src, np.column_stack([rng.uniform(-2, 2, (300, 2)), rng.uniform(-1, 1, 300)]), delimiter=",",
               header="y1,y2,weight", comments="")
    np.savetxt(tgt, rng.uniform(-2, 2, (200, 2)), delimiter=",", header="# targets")
    code, out = run(["fastsum-bench", "--sources", str(src), "--targets", str(tgt), "--tol", "1e-8"], capsys)
    assert code == 0
    (rec,) = rows(out)
    assert list(rec) == ["N", "M", "K", "max_error", "time_direct", "time_fast"]
    assert rec["N"] == "300" and rec["M"] == "200"
    assert float(rec["max_error"]) <= 1e-7


def test_json_mirrors_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "a.json"
    assert main(["laplace-error", "--n", "2", "--K", "10", "--tol", "1e-3", "--output", str(a)]) == 0
    assert main(["laplace-error", "--n", "2", "--K", "10", "--tol", "1e-3", "--output", str(b), "--format", "json"]) == 0
    from_csv = rows(a.read_text())
    from_json = json.loads(b.read_text())
    assert len(from_csv) == len(from_json)
    for c, j in zip(from_csv, from_json):
        assert list(c) == list(j)
        assert float(c["rel_error"]) == j["rel_error"]


@pytest.mark.parametrize(
    "argv",
    [
        ["mehler-check", "--n", "2", "--count", "10"],
        ["taylor-error", "--n", "2"],
        ["caloric-verify", "--n", "3", "--max-degree", "4", "--format", "json"],
        ["convolution-check", "--seed", "7"],
    ],
)
def test_reports_are_byte_identical(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    main(argv + ["--output", str(a)])
    main(argv + ["--output", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_seed_changes_report(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["mehler-check", "--count", "5", "--output", str(a)])
    main(["mehler-check", "--count", "5", "--seed", "1", "--output", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_unknown_subcommand():
    proc = subprocess.run([sys.executable, "-m", "heatseries", "frobnicate"], capture_output=True, text=True)
    assert proc.returncode != 0
    assert "usage:" in proc.stderr
    assert proc.stdout == ""


def test_missing_subcommand():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code != 0
