"""CLI and record persistence: schema, determinism, exit codes."""

import csv
import json

import pytest
from numpy.testing import assert_allclose

from chaosgrad.cli import main, read_config_file
from chaosgrad.experiments import (CSV_COLUMNS, ExperimentRecord, read_records,
                                   run_single, suite_converge_a, write_records)
from chaosgrad.orbit import RunConfig


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_csv_round_trip_preserves_floats(tmp_path, rng):
    records = [ExperimentRecord(
        experiment="single", system="solenoid21", gamma1=rng.uniform(),
        gamma2=rng.uniform(), N=20, A=200, W=10, seed=int(rng.integers(1e6)),
        param="gamma1", SC=rng.standard_normal() * 10.0 ** float(rng.integers(-8, 8)),
        UC=rng.standard_normal(), deriv=rng.standard_normal(),
        rho_phi=rng.standard_normal(), fd_deriv=None, fd_se=None,
        wall_ms=rng.uniform()) for _ in range(20)]
    path = tmp_path / "round.csv"
    write_records(path, records)
    back = read_records(path)
    assert back == records


def test_csv_header_is_the_documented_schema(tmp_path):
    path = tmp_path / "empty.csv"
    write_records(path, [])
    assert _rows(path) == [CSV_COLUMNS]


def test_run_single_deterministic_given_seed():
    cfg = RunConfig(system="solenoid3", gamma=[0.1, 0.1], segments=8,
                    steps_per_segment=10, window=2, seed=77)
    a = run_single(cfg)
    b = run_single(cfg)
    for ra, rb in zip(a, b):
        da, db = ra.__dict__.copy(), rb.__dict__.copy()
        # wall-clock time is the one legitimately non-reproducible field
        da.pop("wall_ms"), db.pop("wall_ms")
        assert da == db


def test_cli_single_run_writes_csv_and_sidecar(tmp_path):
    out = tmp_path / "sl.csv"
    code = main(["--system", "stable-linear", "--gamma", "0.4", "--segments", "40",
                 "--window", "2", "--output", str(out)])
    assert code == 0
    records = read_records(out)
    assert len(records) == 1
    assert_allclose(records[0].deriv, 2.0, atol=1e-10)
    sidecar = json.loads((tmp_path / "sl.json").read_text())
    assert sidecar["schema_version"] == 1
    assert sidecar["config"]["system"] == "stable-linear"


def test_cli_repeats_and_two_parameter_rows(tmp_path):
    out = tmp_path / "s3.csv"
    code = main(["--system", "solenoid3", "--segments", "8", "--window", "2",
                 "--steps-per-segment", "10", "--repeats", "2",
                 "--output", str(out)])
    assert code == 0
    records = read_records(out)
    assert len(records) == 4  # 2 repeats x 2 parameters
    assert {r.param for r in records} == {"gamma1", "gamma2"}
    assert {r.seed for r in records} == {0, 1}


def test_cli_usage_error_exit_code_one(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["--system", "not-a-system"])
    assert info.value.code == 1


def test_cli_invalid_config_value_exit_code_one(tmp_path):
    out = tmp_path / "x.csv"
    code = main(["--segments", "1", "--output", str(out)])
    assert code == 1


def test_cli_numerical_abort_exit_code_two(tmp_path):
    out = tmp_path / "boom.csv"
    code = main(["--system", "tent", "--gamma", "0.1", "--segments", "4",
                 "--steps-per-segment", "1200", "--buffer-segments", "1",
                 "--window", "0", "--output", str(out)])
    assert code == 2


def test_cli_fd_check_attaches_oracle_columns(tmp_path):
    out = tmp_path / "fd.csv"
    code = main(["--system", "stable-linear", "--gamma", "0.2", "--segments", "40",
                 "--window", "2", "--fd-check", "--fd-segments", "50",
                 "--output", str(out)])
    assert code == 0
    rec = read_records(out)[0]
    assert_allclose(rec.fd_deriv, 2.0, atol=1e-8)
    assert rec.fd_se is not None
    assert_allclose(rec.deriv, rec.fd_deriv, atol=1e-8)


def test_cli_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("""
# defaults for a small deterministic run
system = stable-linear
gamma = 0.4
segments = 40
window = 2
seed = 5
""")
    parsed = read_config_file(cfg)
    assert parsed["system"] == "stable-linear"
    assert parsed["gamma"] == [0.4]
    out = tmp_path / "cfg.csv"
    code = main(["--config", str(cfg), "--seed", "9", "--output", str(out)])
    assert code == 0
    rec = read_records(out)[0]
    assert rec.seed == 9
    assert rec.system == "stable-linear"


def test_cli_dump_states_flag(tmp_path):
    out = tmp_path / "run.csv"
    dump = tmp_path / "states.csv"
    code = main(["--system", "tent", "--gamma", "0.1", "--segments", "5",
                 "--steps-per-segment", "8", "--window", "2",
                 "--buffer-segments", "1", "--output", str(out),
                 "--dump-states", str(dump)])
    assert code == 0
    rows = _rows(dump)
    assert rows[0] == ["step", "x1"]
    assert len(rows) == 1 + 2 + 5 * 8 + 1 + 2  # header + buffers + A*N + 1


def test_cli_sweep_suite_honors_system_flag(tmp_path):
    out = tmp_path / "tent.csv"
    code = main(["--suite", "sweep-gamma", "--system", "tent", "--gamma", "0.1",
                 "--frequency", "1", "--frequency", "8", "--segments", "50",
                 "--output", str(out)])
    assert code == 0
    records = read_records(out)
    assert {r.experiment for r in records} == {"sweep-gamma[T=1]", "sweep-gamma[T=8]"}
    assert all(r.system == "tent" for r in records)
    assert len(records) == 2


def test_suite_row_counting():
    records = suite_converge_a(seed=1, repeats=2, grid=(50, 100))
    assert len(records) == 4
    assert {r.A for r in records} == {50, 100}
    assert all(r.param == "gamma" for r in records)
    assert all(r.experiment == "converge-A" for r in records)


def test_cli_logistic_demo_smoke(tmp_path):
    out = tmp_path / "logi.csv"
    code = main(["--suite", "logistic-demo", "--repeats", "3", "--output", str(out)])
    assert code == 0
    sidecar = json.loads((tmp_path / "logi.json").read_text())
    diag = sidecar["diagnostics"]
    assert "non_convergent" in diag
    assert len(diag["median_max_shadow_norm"]) == len(diag["segments_grid"])
