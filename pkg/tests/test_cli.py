import json

from steercert.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_table1_csv(capsys):
    code, out = run(capsys, "table1", "--kmax", "3", "--nmax", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,n,eta_lower,value,source"
    assert len(lines) == 1 + 2 * 3
    assert any(",0.2679,qubit_triplet_exact" in l for l in lines)


def test_table1_full_grid(capsys):
    code, out = run(capsys, "table1")
    rows = [l.split(",") for l in out.strip().splitlines()[1:]]
    cells = {(int(r[0]), int(r[1])): r[3] for r in rows}
    assert len(cells) == 7 * 6
    assert cells[(2, 2)] == "0.1716"
    assert cells[(4, 4)] == "0.7778"


def test_certify_command(capsys):
    code, out = run(capsys, "certify", "--sr", "0.30", "--k", "2")
    assert code == 0
    assert any(
        l.endswith("certified_n") and ",4," in l
        for l in out.strip().splitlines()
    )
    code, out = run(capsys, "certify", "--sr", "0", "--k", "3")
    final = out.strip().splitlines()[-1]
    assert ",1," in final and final.endswith("certified_n")


def test_sr_command_json(capsys):
    code, out = run(capsys, "sr", "--d", "2", "--k", "2", "--v", "1",
                    "--format", "json")
    assert code == 0
    row = json.loads(out)[0]
    assert abs(row["value"] - 0.1716) < 1e-3
    assert row["status"] == "optimal"


def test_sr_command_noise_free(capsys):
    code, out = run(capsys, "sr", "--d", "3", "--k", "3", "--v", "0",
                    "--format", "json")
    assert abs(json.loads(out)[0]["value"]) < 1e-6


def test_eta_command(capsys):
    code, out = run(capsys, "eta", "--d", "3", "--k", "2", "--format", "json")
    assert code == 0
    assert abs(json.loads(out)[0]["value"] - 0.7887) < 1e-4


def test_capability_error_exit_code(capsys):
    code = main(["sr", "--d", "6", "--k", "4"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_table2_capacity_skips(capsys):
    code, out = run(capsys, "table2", "--max-strategies", "30",
                    "--format", "json")
    assert code == 0
    rows = json.loads(out)
    computed = [r for r in rows if "value" in r]
    skipped = [r for r in rows if r.get("skipped") == "capacity"]
    assert {(r["k"], r["d"]) for r in computed} == {(2, 2), (2, 3), (2, 4),
                                                    (2, 5), (3, 2), (3, 3)}
    assert skipped  # out-of-budget cells are reported, not dropped


def test_table2_jobs_deterministic_order(capsys):
    _, out1 = run(capsys, "table2", "--max-strategies", "30")
    _, out2 = run(capsys, "table2", "--max-strategies", "30", "--jobs", "3")
    assert out1.splitlines()[0] == "k,d,value,gap,status,skipped"
    keys1 = [l.split(",")[:2] for l in out1.splitlines()[1:]]
    keys2 = [l.split(",")[:2] for l in out2.splitlines()[1:]]
    assert keys1 == keys2


def test_output_file(tmp_path, capsys):
    path = tmp_path / "t1.csv"
    code, out = run(capsys, "table1", "--kmax", "3", "--nmax", "2",
                    "--output", str(path))
    assert code == 0 and out == ""
    assert path.read_text().startswith("k,n,")
