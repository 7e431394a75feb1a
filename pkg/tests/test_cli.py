import csv
import json

import numpy as np
import pytest

from entmon.cli import main, parse_matrix, perturb_offdiag


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- classify ---------------------------------------------------------------------------------


def test_classify_rational(capsys):
    code, out, _ = run(capsys, "classify", "--spectrum", "1/2,1/4,1/4", "--base", "2")
    report = json.loads(out)
    assert code == 0 and report["verdict"] == "rational" and report["value"] == "3/2"
    assert report["schema"] == "1"


def test_classify_zero(capsys):
    code, out, _ = run(capsys, "classify", "--spectrum", "1,0", "--base", "e")
    assert code == 0 and json.loads(out)["verdict"] == "zero"


def test_classify_bad_sum(capsys):
    code, _, err = run(capsys, "classify", "--spectrum", "1/2,1/3", "--base", "2")
    assert code == 2 and "sum" in err


def test_classify_unsupported_base(capsys):
    assert run(capsys, "classify", "--spectrum", "1/2,1/2", "--base", "sqrt2")[0] == 2


def test_classify_from_file(tmp_path, capsys):
    f = tmp_path / "spec.json"
    f.write_text(json.dumps({"spectrum": ["1/3", "1/3", "1/3"], "base": "2"}))
    code, out, _ = run(capsys, "classify", "--input", str(f))
    assert code == 0 and json.loads(out)["verdict"] == "transcendental"
    assert run(capsys, "classify", "--input", str(tmp_path / "missing.json"))[0] == 2


# -- monodromy -----------------------------------------------------------------------------------


def test_monodromy_default(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "monodromy", "--through", "0.2,0.3", "--batches", "5", "--trace", str(trace))
    report = json.loads(out)
    assert code == 0
    assert report["verdicts"]["n_distinct"] == 6 and report["verdicts"]["distinct"]
    with open(trace) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["step", "lambda1_re", "lambda1_im"] and len(rows) > 1000


def test_monodromy_zero_batches(capsys):
    code, out, _ = run(capsys, "monodromy", "--through", "0.2,0.3", "--batches", "0")
    assert code == 0 and json.loads(out)["records"] == []


def test_monodromy_path_through_branch_point(capsys):
    # the circle centred at 0.1 through 0.2 runs through the log singularity lambda1 = 0
    code, _, err = run(capsys, "monodromy", "--through", "0.2,0.3", "--center", "0.1", "--batches", "1")
    assert code == 3 and "singular point" in err


def test_monodromy_trivial_loop_exit_code(capsys):
    # a returning loop yields repeated f-values, so the distinctness check fails
    code, out, _ = run(capsys, "monodromy", "--through", "0.2,0.3", "--xi1", "0.28", "--lambda2-seed", "0.2",
                       "--center", "0.3", "--batches", "2")
    report = json.loads(out)
    assert code == 3 and report["period"] == 1 and not report["verdicts"]["distinct"]


def test_monodromy_bad_tolerance(capsys):
    assert run(capsys, "--tol-newton", "-1", "monodromy", "--through", "0.2,0.3")[0] == 2


def test_monodromy_global_flags_after_subcommand(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "monodromy", "--through", "0.2,0.3", "--batches", "0", "--out", str(out))
    assert code == 0 and json.loads(out.read_text())["command"] == "monodromy"


def test_deterministic_reports(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(capsys, "--seed", "3", "--out", str(path), "monodromy", "--through", "0.2,0.3",
                   "--batches", "2")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    for path in (a, b):
        assert run(capsys, "--seed", "3", "--out", str(path), "witness-d2", "--c", "0.5")[0] == 0
    assert a.read_bytes() == b.read_bytes()


# -- other subcommands ------------------------------------------------------------------------


def test_witness(capsys):
    code, out, _ = run(capsys, "witness-d2", "--c", "0.5", "--samples", "200")
    report = json.loads(out)
    assert code == 0 and report["max_deviation"] <= 1e-10 and report["pass"]
    assert run(capsys, "witness-d2", "--c", "0.9")[0] == 2


def test_tangent_rank(capsys):
    code, out, _ = run(capsys, "tangent-rank", "--rho", "diag:0.2,0.3,0.5", "--sigma", "diag:0.5,0.3,0.2",
                       "--perturb", "offdiag")
    report = json.loads(out)
    assert code == 0 and report["rank"] == 3 and report["commutator_norm"] > 0
    code, out, _ = run(capsys, "tangent-rank", "--rho", "diag:0.2,0.3,0.5", "--sigma", "diag:0.5,0.3,0.2")
    assert json.loads(out)["rank"] == 2 and json.loads(out)["commutator_norm"] == 0
    code, out, _ = run(capsys, "tangent-rank", "--rho", "diag:0.2,0.3,0.5", "--grad-h", "identity/3")
    assert json.loads(out)["rank"] == 2


def test_chart(capsys):
    code, out, _ = run(capsys, "chart", "--rho", "diag:0.2,0.3,0.5")
    report = json.loads(out)
    assert code == 0 and report["full_rank"] and report["jacobian_condition"] == pytest.approx(1)
    assert run(capsys, "chart", "--rho", "identity/3")[0] == 2


def test_levelset_csv(capsys):
    code, out, _ = run(capsys, "levelset", "--through", "0.2,0.3", "--range", "0.18,0.24", "--points", "5")
    rows = list(csv.reader(out.splitlines()))
    assert code == 0 and len(rows) == 6 and rows[0][:2] == ["lambda1", "lambda2"]
    assert float(rows[2][1]) > float(rows[2][0])


def test_matrix_parsing():
    np.testing.assert_allclose(parse_matrix("identity/2"), np.eye(2) / 2)
    np.testing.assert_allclose(parse_matrix('{"dim": 2, "re": [[0.5, 0], [0, 0.5]]}'), np.eye(2) / 2)
    m = perturb_offdiag(np.diag([0.2, 0.3, 0.5]))
    assert np.all(np.linalg.eigvalsh(m) > 0) and np.trace(m).real == pytest.approx(1)
