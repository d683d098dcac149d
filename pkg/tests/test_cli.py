import csv
import json

import pytest

from fasalab.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_drift_command(tmp_path):
    assert main(["drift", "--min", "0.05", "--max", "10", "--step", "0.01", "--out", str(tmp_path / "a")]) == 0
    out = tmp_path / "a"
    for nu in (1, 2, 3):
        rows = read_csv(out / f"drift_fasa_nu{nu}.csv")
        assert list(rows[0]) == ["rho", "delta", "scheme", "nu", "eta"]
        (row,) = [r for r in rows if float(r["rho"]) == 1.0]
        assert abs(float(row["delta"])) < 1e-9
    assert "FAIL" not in (out / "proposition1.txt").read_text()
    assert json.loads((out / "summary.json").read_text())["checks_passed"] is True
    main(["drift", "--out", str(tmp_path / "b")])
    assert tree_bytes(out) == tree_bytes(tmp_path / "b")


@pytest.mark.parametrize("argv", [
    ["drift", "--min", "-1"],
    ["drift", "--min", "5", "--max", "1"],
    ["simulate", "--scheme", "nonsense", "--reps", "1"],
    ["simulate", "-N", "0"],
    ["stability", "--horizon", "100"],
    ["stability", "--lambda-list", "-0.1"],
    ["sweep", "--n-list", "0"],
])
def test_preconditions_give_nonzero_exit(tmp_path, argv, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_scheme_lists_valid_names(tmp_path, capsys):
    main(["simulate", "--scheme", "aloha", "--out", str(tmp_path)])
    assert "ideal, kelly, pb-aloha, qplus, fasa" in capsys.readouterr().err


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate", "-N", "5", "--reps", "1", "--out", str(blocker / "sub")]) == 1


def test_simulate_single_device(tmp_path):
    assert main(["simulate", "-N", "1", "--scheme", "ideal", "--reps", "1", "--out", str(tmp_path)]) == 0
    (row,) = read_csv(tmp_path / "delays.csv")
    assert row["delay_slots"] == "0"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["mean_delay"] == 0.0 and summary["traffic"]["alpha"] == 3.0


def test_simulate_deterministic(tmp_path):
    argv = ["simulate", "-N", "200", "--scheme", "fasa", "--nu", "2", "--eta", "1", "--reps", "5", "--seed", "3"]
    main(argv + ["--out", str(tmp_path / "a")])
    main(argv + ["--out", str(tmp_path / "b")])
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")
    assert set(tree_bytes(tmp_path / "a")) == {"cdf.csv", "delays.csv", "summary.json"}


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scheme": "qplus", "n_devices": 30, "reps": 2, "seed": 9}))
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
    s = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert (s["scheme"], s["n_devices"], s["reps"], s["seed"]) == ("qplus", 30, 2, 9)
    main(["simulate", "--config", str(cfg), "--scheme", "fasa", "--out", str(tmp_path / "b")])
    assert json.loads((tmp_path / "b" / "summary.json").read_text())["scheme"] == "fasa"


def test_sweep_single_row(tmp_path):
    assert main(["sweep", "--n-list", "50", "--schemes", "fasa", "--reps", "3", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "divergence.csv")
    assert [r["scheme"] for r in rows] == ["ideal", "fasa"]
    assert float(rows[0]["divergence_pct"]) == 0.0


def test_stability_zero_rate(tmp_path):
    argv = ["stability", "--lambda-list", "0", "--schemes", "pb-aloha,qplus,fasa",
            "--horizon", "10000", "--n-seeds", "2"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    rows = read_csv(tmp_path / "a" / "stability.csv")
    assert len(rows) == 6 and {r["verdict"] for r in rows} == {"bounded"}
    main(argv + ["--out", str(tmp_path / "b")])
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")
