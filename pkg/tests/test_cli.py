import copy
import csv
import json
import time
from pathlib import Path

import pytest

from idp_lab.cli import COMPARISON_HEADER, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
DEFAULT = json.loads((CONFIGS / "default.json").read_text())


def small_config(tmp_path, **changes):
    raw = copy.deepcopy(DEFAULT)
    raw["budget"].update(replicates=400, draws=4000)
    raw.pop("output")
    for key, value in changes.items():
        raw[key] = value
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return path


def run(tmp_path, command, config, seed="7", out="out"):
    argv = [command, "--config", str(config), "--out", str(tmp_path / out)]
    if seed is not None:
        argv += ["--seed", seed]
    return main(argv)


def read_csv(path):
    lines = [line for line in Path(path).read_text().splitlines() if not line.startswith("#")]
    return list(csv.reader(lines))


def test_simulate_writes_trajectories_and_metadata(tmp_path):
    cfg = small_config(tmp_path)
    assert run(tmp_path, "simulate", cfg) == 0
    rows = read_csv(tmp_path / "out" / "bernoulli_trajectories.csv")
    assert rows[0] == [f"X_{i}" for i in range(16)]
    assert len(rows) == 401
    meta = json.loads((tmp_path / "out" / "ii1_metadata.json").read_text())
    assert meta["seed"] == 7 and meta["compensation_mode"] == "Nonnegative"
    assert "calibration" in meta and "version" in meta


def test_ii1_trajectory_rows_are_constant(tmp_path):
    cfg = small_config(tmp_path)
    assert run(tmp_path, "simulate", cfg) == 0
    for row in read_csv(tmp_path / "out" / "ii1_trajectories.csv")[1:]:
        assert len(set(row)) == 1


def test_csv_preamble_and_line_endings(tmp_path):
    cfg = small_config(tmp_path)
    assert run(tmp_path, "simulate", cfg) == 0
    raw = (tmp_path / "out" / "walk_trajectories.csv").read_bytes()
    assert b"\r\n" not in raw
    preamble = [line for line in raw.decode().splitlines() if line.startswith("#")]
    keys = {line[2:].split(":", 1)[0] for line in preamble}
    assert {"tool", "version", "calibration", "seed"} <= keys


@pytest.mark.parametrize("command", ["simulate", "spectra", "verify"])
def test_reruns_are_byte_identical(tmp_path, command):
    cfg = small_config(tmp_path)
    assert run(tmp_path, command, cfg, out="a") == 0
    assert run(tmp_path, command, cfg, out="b") == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_different_seeds_differ(tmp_path):
    cfg = small_config(tmp_path)
    run(tmp_path, "simulate", cfg, seed="1", out="a")
    run(tmp_path, "simulate", cfg, seed="2", out="b")
    name = "walk_trajectories.csv"
    assert (tmp_path / "a" / name).read_bytes() != (tmp_path / "b" / name).read_bytes()


def test_spectra_outputs(tmp_path):
    cfg = small_config(tmp_path)
    assert run(tmp_path, "spectra", cfg) == 0
    out = tmp_path / "out"
    rows = read_csv(out / "ii1_comparison.csv")
    assert tuple(rows[0]) == COMPARISON_HEADER
    body = [dict(zip(rows[0], r)) for r in rows[1:]]
    assert all(r["atom_at_zero"] == "1" for r in body if float(r["lambda"]) > 0)
    zero = [r for r in body if float(r["lambda"]) == 0]
    assert zero and all(float(r["empirical_real"]) == 0 and float(r["predicted_real"]) == 0 for r in zero)
    emp = read_csv(out / "walk_lambda1_empirical.csv")
    assert emp[0] == ["lag", "real", "imag", "se_real", "se_imag"]
    assert [int(r[0]) for r in emp[1:]] == list(range(-10, 11))
    assert (out / "walk_plot.txt").read_text().startswith("# plot specification")


def test_verify_passes_and_corrupted_compensator_fails(tmp_path):
    cfg = small_config(tmp_path)
    assert run(tmp_path, "verify", cfg) == 0
    report = json.loads((tmp_path / "out" / "bernoulli_verify.json").read_text())
    assert report["pass"]
    bad = small_config(tmp_path, test_hooks={"corrupt_compensator": 1.0})
    assert run(tmp_path, "verify", bad, out="bad") == 4
    report = json.loads((tmp_path / "bad" / "bernoulli_verify.json").read_text())
    failed = [c["name"] for c in report["sections"]["process"] if not c["pass"]]
    assert "mean_value" in failed


def test_missing_seed_is_a_usage_error(tmp_path):
    cfg = small_config(tmp_path)
    with pytest.raises(SystemExit) as info:
        run(tmp_path, "simulate", cfg, seed=None)
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run(tmp_path, "simulate", cfg, seed="-1")
    assert info.value.code == 2


def test_config_errors(tmp_path, capsys):
    assert run(tmp_path, "simulate", small_config(tmp_path, specs=[])) == 2
    bad = small_config(tmp_path, window={"n": 0, "threshold": -1.0})
    assert run(tmp_path, "simulate", bad) == 2
    err = capsys.readouterr().err
    assert "/window/n" in err and "/window/threshold" in err
    assert run(tmp_path, "simulate", tmp_path / "missing.json") == 2
    blocked = tmp_path / "blocked"
    blocked.write_text("a file, not a directory")
    assert main(["simulate", "--config", str(small_config(tmp_path)), "--seed", "1", "--out", str(blocked)]) == 2


def test_small_jump_refusal_exit_code(tmp_path, capsys):
    specs = [{"name": "stable", "spec": {"alpha_stable": {"alpha": 1.5, "pulse": [1.0, 0.5]}}}]
    cfg = small_config(tmp_path, specs=specs, calibration={"small_jump_tol": 0.1})
    assert run(tmp_path, "simulate", cfg) == 3
    assert "use threshold <=" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_classify_writes_report(tmp_path):
    raw = copy.deepcopy(DEFAULT)
    raw["specs"] = [s for s in raw["specs"] if s["name"] == "ii1"]
    raw["window"] = {"n": 41, "threshold": 0.5}
    raw["budget"] = {"replicates": 1000, "K": 20}
    raw.pop("output")
    path = tmp_path / "classify.json"
    path.write_text(json.dumps(raw))
    assert run(tmp_path, "classify", path) == 0
    doc = json.loads((tmp_path / "out" / "ii1_classification.json").read_text())
    assert doc["inferred"] == doc["declared"] == "nonergodic"
    assert "match            : yes" in (tmp_path / "out" / "ii1_classification.txt").read_text()


@pytest.mark.parametrize("name", ["bernoulli", "walk", "tower", "ii1"])
def test_simulation_performance(tmp_path, name):
    raw = copy.deepcopy(DEFAULT)
    raw["specs"] = [s for s in raw["specs"] if s["name"] == name]
    raw["window"] = {"n": 64, "threshold": 0.5}
    raw["budget"]["replicates"] = 1000
    raw.pop("output")
    path = tmp_path / "perf.json"
    path.write_text(json.dumps(raw))
    start = time.perf_counter()
    assert run(tmp_path, "simulate", path) == 0
    assert time.perf_counter() - start < 60
