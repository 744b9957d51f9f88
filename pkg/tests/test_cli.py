import json

import pytest

from lagdisc import cli


def run_cli(*args):
    return cli.main(list(args))


def test_dump_mesh(tmp_path):
    out = tmp_path / "o"
    code = run_cli("--command", "dump-mesh", "--mesh", "2,8,1.0",
                   "--out", str(out))
    assert code == 0
    data = json.loads((out / "mesh.json").read_text())
    assert len(data["nodes"]) == 17
    assert len(data["triangles"]) == 24
    assert len(data["boundary_edges"]) == 8


def test_invalid_combination_exits_1(tmp_path, capsys):
    code = run_cli("--command", "verify-example", "--example", "nonminimal",
                   "--domain", "ball", "--out", str(tmp_path / "o"))
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_command_exits_1(tmp_path):
    # argparse rejects unknown choices with SystemExit(2): catch via config path
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "frobnicate"}))
    assert run_cli("--config", str(cfg)) == 1


def test_unknown_config_key_exits_1(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "dump-mesh", "bogus": 1}))
    assert run_cli("--config", str(cfg)) == 1


def test_missing_command_exits_1(tmp_path):
    assert run_cli("--out", str(tmp_path / "o")) == 1


def test_verify_example_sw(tmp_path):
    out = tmp_path / "o"
    code = run_cli("--command", "verify-example", "--example", "sw:1,2",
                   "--mesh", "8,32,1.0", "--refinements", "3",
                   "--out", str(out))
    assert code == 0
    lines = (out / "report.csv").read_text().strip().splitlines()
    # header + 3 levels x 9 checks
    assert len(lines) == 1 + 27
    summary = json.loads((out / "summary.json").read_text())
    assert summary["pass"] is True
    assert len(summary["levels"]) == 3


def test_masses_sw(tmp_path):
    out = tmp_path / "o"
    assert run_cli("--command", "masses", "--example", "sw:2,3",
                   "--out", str(out)) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["degree"] == pytest.approx(-1.0, abs=1e-8)
    assert abs(summary["flux_mass"]) <= 1e-8


def test_masses_flat_is_config_error(tmp_path):
    assert run_cli("--command", "masses", "--example", "flat",
                   "--out", str(tmp_path / "o")) == 1


def test_boundary_report_nonminimal_curve(tmp_path):
    out = tmp_path / "o"
    code = run_cli("--command", "boundary-report", "--example", "nonminimal",
                   "--domain", "curve", "--mesh", "8,32,1.0",
                   "--refinements", "1", "--out", str(out))
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["levels"][0]["legendrian"] >= 0.5


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "dump-mesh", "mesh": [2, 8, 1.0],
                               "output_dir": str(tmp_path / "a")}))
    code = run_cli("--config", str(cfg), "--out", str(tmp_path / "b"))
    assert code == 0
    assert (tmp_path / "b" / "mesh.json").exists()
    assert not (tmp_path / "a").exists()


def test_determinism_bitwise(tmp_path):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert run_cli("--command", "stationarity", "--example", "sw:1,2",
                       "--mesh", "8,32,1.0", "--refinements", "2",
                       "--seed", "7", "--out", str(out)) == 0
        outs.append((out / "report.csv").read_bytes()
                    + (out / "summary.json").read_bytes())
    assert outs[0] == outs[1]


def test_rigidity_command(tmp_path):
    out = tmp_path / "o"
    code = run_cli("--command", "rigidity", "--mesh", "12,48,1.0",
                   "--seed", "3", "--eps", "0.03", "--out", str(out))
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["pass"] is True
    header = (out / "report.csv").read_text().splitlines()[0]
    assert header == "seed,iter,E,grad_norm,lagrangian,boundary_violation"
