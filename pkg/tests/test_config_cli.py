"""Scenario configs and the command-line interface."""

import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import ultracascade as uc
from ultracascade import cli


def minimal_config() -> dict:
    return {
        "tree": {"p": 2, "depth": 2},
        "interaction": {"type": "power", "a": [1.0, 0.0], "b": 1.0},
        "dissipation": {"type": "power", "a": [1.0, 0.0], "b": 0.0},
        "initial": {"wavelets": [["", 0, 1.0, 0.0]]},
        "t_end": 1.0,
        "dt": 0.01,
    }


def test_parse_config_round_trip(scenario_dir):
    for name in ("single_wavelet.json", "nested_pair.json"):
        cfg = uc.load_config(scenario_dir / name)
        again = uc.parse_config(cfg.to_dict())
        assert again == cfg


def test_parse_config_defaults():
    cfg = uc.parse_config(minimal_config())
    assert cfg.basis == "gram-schmidt"
    assert cfg.solver == "recurrent"
    assert cfg.outputs == {}
    assert cfg.oracles == {}


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda c: c.update(extra=1), "unknown config keys"),
        (lambda c: c.pop("tree"), "missing config keys"),
        (lambda c: c.update(tree=[1, 2]), "'tree' must be an object"),
        (lambda c: c["interaction"].update(type="spline"), "power' or 'table"),
        (lambda c: c["interaction"].pop("a"), "needs 'a' and 'b'"),
        (lambda c: c["interaction"].update(c=3), "unknown keys"),
        (lambda c: c["interaction"].update(a=[1.0]), "real, imag"),
        (lambda c: c.update(dissipation={"type": "table", "entries": []}),
         "nonempty 'entries'"),
        (lambda c: c.update(dissipation={
            "type": "table", "entries": [["", 1.0]]}), "path, real, imag"),
        (lambda c: c.update(basis="haar"), "'basis' must be one of"),
        (lambda c: c.update(solver="euler"), "'solver' must be one of"),
        (lambda c: c.update(initial={}), "exactly one"),
        (lambda c: c.update(initial={"wavelets": [], "leaves": []}),
         "exactly one"),
        (lambda c: c.update(initial={"modes": []}), "exactly one"),
        (lambda c: c.update(initial={"wavelets": [["", 0.5, 1.0, 0.0]]}),
         "path, index, real, imag"),
        (lambda c: c.update(initial={"leaves": [["0.0", 1.0]]}),
         "path, real, imag"),
        (lambda c: c.update(t_end=0.0), "positive"),
        (lambda c: c.update(dt=-0.1), "positive"),
        (lambda c: c.update(outputs={"log": "x.txt"}), "'outputs' keys"),
        (lambda c: c.update(outputs={"trajectory": ""}), "nonempty file name"),
        (lambda c: c.update(oracles={"check_all": True}), "'oracles' keys"),
        (lambda c: c.update(oracles={"check_eigen": 1}), "true or false"),
    ],
)
def test_parse_config_rejections(mutate, message):
    raw = minimal_config()
    mutate(raw)
    with pytest.raises(uc.ConfigError, match=message):
        uc.parse_config(raw)


def test_parse_config_rejects_non_object():
    with pytest.raises(uc.ConfigError, match="JSON object"):
        uc.parse_config([1, 2, 3])


def test_load_config_rejects_invalid_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(uc.ConfigError, match="not valid JSON"):
        uc.load_config(bad)


def test_config_hash_stable_and_sensitive():
    a = uc.parse_config(minimal_config())
    b = uc.parse_config(minimal_config())
    assert uc.config_hash(a) == uc.config_hash(b)
    raw = minimal_config()
    raw["dt"] = 0.02
    c = uc.parse_config(raw)
    assert uc.config_hash(c) != uc.config_hash(a)


def test_build_kernel_from_specs():
    tree = uc.build_tree({"p": 2, "depth": 2})
    power = uc.build_kernel(
        tree,
        {"type": "power", "a": [2.0, 0.0], "b": 1.0,
         "overrides": [["0", 9.0, 1.0]]},
    )
    assert power.value(tree.root) == 2.0
    assert power.value(tree.vertex("0")) == 9.0 + 1.0j
    table = uc.build_kernel(
        tree,
        {"type": "table",
         "entries": [[lab, float(i), 0.0] for i, lab in enumerate(tree.labels)]},
    )
    for v in range(tree.n_vertices):
        assert table.value(v) == float(v)
    with pytest.raises(uc.ConfigError, match="misses"):
        uc.build_kernel(tree, {"type": "table", "entries": [["", 1.0, 0.0]]})


def test_build_scenario_wavelet_initial():
    cfg = uc.parse_config(minimal_config())
    scen = uc.build_scenario(cfg)
    assert scen.tree.n_leaves == 4
    dense = scen.v0.dense()
    slot = scen.basis.slot_of(scen.tree.root, 0)
    assert dense[slot] == 1.0
    assert np.abs(
        scen.f0.values - uc.synthesize(scen.v0).values
    ).max() == 0.0


def test_build_scenario_leaf_initial_mean_zero():
    raw = minimal_config()
    raw["initial"] = {"leaves": [
        ["0.0", 1.0, 0.0], ["0.1", -1.0, 0.0],
        ["1.0", 0.5, 0.0], ["1.1", -0.5, 0.0],
    ]}
    scen = uc.build_scenario(uc.parse_config(raw))
    back = uc.synthesize(scen.v0)
    assert np.abs(back.values - scen.f0.values).max() <= 1e-12


def test_build_scenario_rejects_nonzero_mean_leaves():
    raw = minimal_config()
    raw["initial"] = {"leaves": [["0.0", 1.0, 0.0]]}
    with pytest.raises(uc.ConfigError, match="mean"):
        uc.build_scenario(uc.parse_config(raw))


def test_build_scenario_rejects_unknown_paths():
    raw = minimal_config()
    raw["initial"] = {"wavelets": [["5.5", 0, 1.0, 0.0]]}
    with pytest.raises(uc.ConfigError):
        uc.build_scenario(uc.parse_config(raw))
    raw = minimal_config()
    raw["interaction"] = {
        "type": "power", "a": [1.0, 0.0], "b": 1.0,
        "overrides": [["9", 1.0, 0.0]],
    }
    with pytest.raises(uc.ConfigError, match="unknown vertex"):
        uc.build_scenario(uc.parse_config(raw))


def test_build_scenario_rejects_degenerate_tree():
    raw = minimal_config()
    raw["tree"] = {"children": [{"children": [
        {"measure": 1.0}, {"measure": 1.0}]}]}
    with pytest.raises(uc.ConfigError, match="single child"):
        uc.build_scenario(uc.parse_config(raw))


def test_csv_floats_round_trip_exactly():
    awkward = [1 / 3, 0.1, 1e-17, 2**-52, 1234567.891011121, 0.0]
    for x in awkward:
        assert float(cli._fmt(x)) == x


def read_csv_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_cli_run_single_scenario(tmp_path, scenario_dir):
    rc = cli.main([
        "run", str(scenario_dir / "single_wavelet.json"),
        "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    header, rows = read_csv_rows(tmp_path / "single_wavelet_trajectory.csv")
    # columns sorted by slot label, real before imaginary
    assert header == ["t", "0:0.re", "0:0.im", "1:0.re", "1:0.im",
                      ":0.re", ":0.im"]
    col = header.index("0:0.re")
    for row in rows[:: len(rows) // 7]:
        t, v = float(row[0]), float(row[col])
        assert v == pytest.approx(np.exp(-t), rel=1e-10)
    # every other coefficient stays zero
    for row in rows:
        for name in ("0:0.im", "1:0.re", "1:0.im", ":0.re", ":0.im"):
            assert float(row[header.index(name)]) == 0.0

    eh, erows = read_csv_rows(tmp_path / "single_wavelet_energy.csv")
    assert eh == ["t", "depth", "energy"]
    assert erows[0] == ["0", "0", "0"]
    assert erows[1][:2] == ["0", "1"] and float(erows[1][2]) == 1.0

    summary = json.loads((tmp_path / "single_wavelet_summary.json").read_text())
    assert summary["solver"] == "recurrent"
    assert summary["n_leaves"] == 4
    assert summary["n_slots"] == 3
    assert summary["oracle_checks"]["eigen"]["pass"] is True
    assert summary["oracle_checks"]["interaction"]["pass"] is True
    cfg = uc.load_config(scenario_dir / "single_wavelet.json")
    assert summary["config_hash"] == uc.config_hash(cfg)


def test_cli_run_solver_all_reports_cross_disagreement(tmp_path, scenario_dir):
    rc = cli.main([
        "run", str(scenario_dir / "nested_pair.json"),
        "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    summary = json.loads((tmp_path / "nested_pair_summary.json").read_text())
    cross = summary["cross_disagreement"]
    assert cross["max"] <= uc.CROSS_SOLVER_TOL
    assert set(summary["solver_metadata"]) == {"recurrent", "rk", "leaf"}
    assert summary["oracle_checks"]["cross_solver"]["pass"] is True


def test_cli_run_directory_parallel_matches_serial(tmp_path, scenario_dir):
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    assert cli.main(["run", str(scenario_dir), "--out-dir", str(serial)]) == 0
    assert cli.main([
        "run", str(scenario_dir), "--out-dir", str(parallel), "--jobs", "2",
    ]) == 0
    names = sorted(p.name for p in serial.iterdir())
    assert names == sorted(p.name for p in parallel.iterdir())
    assert len(names) == 6
    for name in names:
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()


def test_cli_run_empty_directory_is_config_error(tmp_path):
    assert cli.main(["run", str(tmp_path)]) == 2


def test_cli_run_missing_file_is_config_error(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == 2
    assert list(tmp_path.iterdir()) == []


def test_cli_run_writes_next_to_config_by_default(tmp_path, scenario_dir):
    target = tmp_path / "work"
    target.mkdir()
    src = scenario_dir / "single_wavelet.json"
    (target / src.name).write_bytes(src.read_bytes())
    assert cli.main(["run", str(target / src.name)]) == 0
    assert (target / "single_wavelet_trajectory.csv").exists()
    assert (target / "single_wavelet_energy.csv").exists()
    assert (target / "single_wavelet_summary.json").exists()


def test_cli_run_reports_failed_check_with_exit_1(
    tmp_path, scenario_dir, monkeypatch, capsys
):
    monkeypatch.setattr(cli, "EIGEN_TOL", -1.0)
    rc = cli.main([
        "run", str(scenario_dir / "single_wavelet.json"),
        "--out-dir", str(tmp_path),
    ])
    assert rc == 1
    out = capsys.readouterr().out
    assert out.startswith("check failed (eigen")
    summary = json.loads((tmp_path / "single_wavelet_summary.json").read_text())
    assert summary["oracle_checks"]["eigen"]["pass"] is False


def test_cli_abort_exit_code(tmp_path):
    raw = minimal_config()
    raw["dissipation"] = {"type": "power", "a": [-35.0, 0.0], "b": 0.0}
    path = tmp_path / "grow.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    rc = cli.main(["run", str(path), "--out-dir", str(tmp_path / "out")])
    assert rc == 3


def test_cli_directory_keeps_worst_exit_code(tmp_path, scenario_dir, capsys):
    work = tmp_path / "scenarios"
    work.mkdir()
    src = scenario_dir / "single_wavelet.json"
    (work / src.name).write_bytes(src.read_bytes())
    raw = minimal_config()
    raw["dissipation"] = {"type": "power", "a": [-35.0, 0.0], "b": 0.0}
    (work / "grow.json").write_text(json.dumps(raw), encoding="utf-8")
    rc = cli.main(["run", str(work), "--out-dir", str(tmp_path / "out")])
    assert rc == 3
    assert "abort: grow.json" in capsys.readouterr().err


def test_cli_validate_ok(scenario_dir, capsys):
    rc = cli.main(["validate", str(scenario_dir / "nested_pair.json")])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("ok: 3 wavelet slots")
    assert "4 leaves over 7 balls" in out
    assert "solver=all" in out
    assert "grid=1000 steps" in out


def test_cli_validate_reports_problem(tmp_path, capsys):
    raw = minimal_config()
    raw["initial"] = {"leaves": [["0.0", 1.0, 0.0]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    rc = cli.main(["validate", str(path)])
    assert rc == 2
    assert capsys.readouterr().out.startswith("invalid:")


def test_cli_oracle_passes_on_bundled_scenario(scenario_dir, capsys):
    rc = cli.main(["oracle", str(scenario_dir / "nested_pair.json")])
    assert rc == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("eigenvalue check:")
    assert lines[1].startswith("interaction check:")
    assert lines[2].startswith("solver check:")
    assert all(line.endswith("PASS") for line in lines)


def test_cli_oracle_failure_exit_code(scenario_dir, monkeypatch, capsys):
    monkeypatch.setattr(cli, "EIGEN_TOL", -1.0)
    rc = cli.main(["oracle", str(scenario_dir / "single_wavelet.json")])
    assert rc == 1
    assert "FAIL" in capsys.readouterr().out


def test_module_entry_point(scenario_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "ultracascade", "validate",
         str(scenario_dir / "single_wavelet.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("ok:")


def test_trajectory_csv_values_round_trip_bitwise(tmp_path):
    cfg = uc.parse_config(minimal_config())
    scen = uc.build_scenario(cfg)
    traj = uc.solve_recurrent(scen.system, scen.v0, cfg.t_end, cfg.dt)
    path = tmp_path / "traj.csv"
    cli.write_trajectory_csv(path, traj)
    header, rows = read_csv_rows(path)
    assert len(rows) == len(traj.grid)
    for k in (0, len(rows) // 2, len(rows) - 1):
        assert float(rows[k][0]) == traj.grid[k]
        for i, label in enumerate(traj.labels):
            re = float(rows[k][header.index(f"{label}.re")])
            im = float(rows[k][header.index(f"{label}.im")])
            assert complex(re, im) == traj.values[k, i]
