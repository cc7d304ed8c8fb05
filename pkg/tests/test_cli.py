import json

import pytest

from medianlab.cli import InputError, main, parse_range
from medianlab.spaces import grid_space


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def body(text):
    data = json.loads(text)
    data.pop("timings")
    return data


def test_parse_range():
    assert parse_range("4-8:2") == [4, 6, 8]
    assert parse_range("1,3,5") == [1, 3, 5]
    with pytest.raises(InputError):
        parse_range("8-4")
    with pytest.raises(InputError):
        parse_range("a-b")


def test_free_algebra(capsys):
    code, out, _ = run(capsys, "free-algebra", "3")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["elements"] == 4 and res["rank"] == 1


def test_free_algebra_limit(capsys):
    code, _, err = run(capsys, "free-algebra", "6")
    assert code == 2 and "limit" in err


def test_report_ledger(capsys):
    code, out, _ = run(capsys, "report", "--K", "1", "--H0", "0", "--H3", "1", "--H4", "2", "--H5", "1")
    res = json.loads(out)["results"]
    assert code == 0
    assert (res["kappa0"], res["kappa4"], res["kappa5"]) == (8, 8, 5)
    assert res["C_n"]["2"] == 10 and res["D_n"]["2"] == 20


def test_verify_is_deterministic(capsys):
    first = body(run(capsys, "verify", "shifted:3", "--seed", "4")[1])
    second = body(run(capsys, "verify", "shifted:3", "--seed", "4")[1])
    assert first == second
    assert first["results"]["ok"] is True
    assert first["results"]["interval_dichotomy"]["differing_pairs"] > 0


def test_verify_from_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(grid_space(2).to_json()))
    code, out, _ = run(capsys, "verify", str(path))
    res = json.loads(out)["results"]
    assert code == 0 and res["kappa0"] == 0 and res["kappa4"]["value"] == 0
    assert len(json.loads(out)["input_digest"]) == 64


def test_bad_inputs_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "verify", str(bad))[0] == 1
    assert run(capsys, "verify", "nosuch:3")[0] == 1
    assert run(capsys, "verify", "missing.json")[0] == 1
    assert run(capsys, "rank-scan", "--windows", "9-3")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1


def test_rank_scan_csv(tmp_path, capsys):
    csv_path = tmp_path / "rank.csv"
    code, out, _ = run(capsys, "rank-scan", "--windows", "2-4", "--k", "2", "--csv", str(csv_path))
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "# medianlab rank-scan csv v1"
    assert lines[1].startswith("family,window,k")
    assert len(lines) == 5
    fit = json.loads(out)["results"]["fits"]["2"]
    assert fit["slope"] == pytest.approx(1) and fit["growth"] == "linear"


def test_counterexample_and_out_file(tmp_path, capsys):
    out_path = tmp_path / "c.json"
    code, out, _ = run(capsys, "counterexample", "--n", "1-3", "--out", str(out_path))
    assert code == 0 and out == ""
    res = json.loads(out_path.read_text())["results"]
    assert res["hausdorff_equals_n_plus_1"] and res["all_geodesic"]
    assert [r["d_ab"] for r in res["rows"]] == [6, 9, 12]


def test_delta_command(capsys):
    res = json.loads(run(capsys, "delta", "grid:2", "--thin")[1])["results"]
    assert res["gromov_delta"]["value"] == 2
    assert res["thin_interval_lambda"]["value"] == 2
    assert res["gromov_delta"]["witness"] == [[0, 0], [2, 2], [2, 0], [0, 2]]


def test_space_command_round_trips(tmp_path, capsys):
    code, out, _ = run(capsys, "space", "tripod:2")
    assert code == 0
    path = tmp_path / "t.json"
    path.write_text(json.dumps(json.loads(out)["results"]))
    res = json.loads(run(capsys, "delta", str(path))[1])["results"]
    assert res["gromov_delta"]["value"] == 0
    gamma = json.loads(run(capsys, "space", "gamma:1")[1])["results"]
    assert gamma["length"] == 6 and len(gamma["points"]) == 7
