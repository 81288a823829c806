"""End-to-end CLI: design, simulate, dump-schedule, dump-mi, sweep."""

import json

import pytest

from ibldpc.cli import main


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture(scope="module")
def design_cfg(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfg = write_json(d / "design.json", {
        "K": 160, "rate": "1/4", "w": 3, "alignment": "column-row",
        "schedule": "flooding", "imax": 4, "design_ebn0": 2.0,
        "cn_kind": "minsum", "cn_aware": False})
    return d, cfg


def test_design_and_simulate_deterministic(design_cfg, capsys):
    d, cfg = design_cfg
    params = str(d / "params.txt")
    assert main(["design", "--config", cfg, "-o", params]) == 0
    simcfg = write_json(d / "sim.json", {
        "K": 160, "rate": "1/4", "decoder": "designed",
        "ebn0_grid": [2.0, 3.0], "max_frames": 400, "min_errors": 20,
        "seed": 1, "workers": 1})
    out1, out2 = str(d / "r1.csv"), str(d / "r2.csv")
    assert main(["simulate", "--config", simcfg, "--params", params,
                 "-o", out1]) == 0
    assert main(["simulate", "--config", simcfg, "--params", params,
                 "-o", out2]) == 0
    assert open(out1).read() == open(out2).read()
    header = open(out1).readline().strip().split(",")
    assert header[:3] == ["EbN0", "EsN0", "frames"]


def test_simulate_worker_invariant_csv(design_cfg):
    d, cfg = design_cfg
    params = str(d / "params.txt")
    simcfg = write_json(d / "sim2.json", {
        "K": 160, "rate": "1/4", "decoder": "designed",
        "ebn0_grid": [2.2], "max_frames": 400, "min_errors": 20, "seed": 3})
    outs = []
    for w, name in ((1, "w1.csv"), (2, "w2.csv")):
        out = str(d / name)
        assert main(["simulate", "--config", simcfg, "--params", params,
                     "--workers", str(w), "-o", out]) == 0
        outs.append(open(out).read())
    assert outs[0] == outs[1]


def test_dump_schedule(capsys):
    assert main(["dump-schedule", "--K", "8448", "--rate", "1/3",
                 "--kind", "row_layered"]) == 0
    out = capsys.readouterr().out
    assert "32 layers" in out


def test_dump_mi(design_cfg):
    d, cfg = design_cfg
    out = str(d / "mi.csv")
    assert main(["dump-mi", "--config", cfg, "-o", out]) == 0
    lines = open(out).read().splitlines()
    assert lines[0] == "step,iteration,region,I_bits"
    assert len(lines) > 5


def test_sweep_dry_run_and_empty(design_cfg, capsys, tmp_path):
    d, _ = design_cfg
    sweepcfg = write_json(d / "sweep.json", {
        "alignments": ["entry-entry", "column-row", "row-row",
                       "matrix2-matrix2", "matrix-matrix"],
        "w": [2, 3, 4], "K": 160, "rates": ["1/4"],
        "design_ebn0": 2.0, "ebn0_grid": [2.0]})
    assert main(["sweep", "--config", sweepcfg, "--dry-run"]) == 0
    assert "15 jobs" in capsys.readouterr().out
    empty = write_json(d / "empty.json", {"rates": [], "w": []})
    out = str(d / "empty.csv")
    assert main(["sweep", "--config", empty, "-o", out]) == 0
    lines = open(out).read().splitlines()
    assert len(lines) == 1 and lines[0].startswith("config,rate,")


def test_config_error_exit_code(tmp_path):
    assert main(["design", "--config", str(tmp_path / "missing.json"),
                 "-o", str(tmp_path / "x.txt")]) == 2


def test_sweep_job_failure_exit_code(design_cfg, tmp_path):
    d, _ = design_cfg
    bad = write_json(d / "bad.json", {
        "rates": ["1/4"], "w": [3], "K": 160,
        "alignments": ["nope-nope"], "design_ebn0": 2.0,
        "ebn0_grid": [2.0], "max_frames": 10, "min_errors": 1})
    assert main(["sweep", "--config", bad,
                 "-o", str(tmp_path / "bad.csv")]) == 3
