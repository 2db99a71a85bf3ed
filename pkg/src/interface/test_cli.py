import sys
import os
import json
import math

import numpy as np
import numpy.testing as npt
import pytest

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from src.lattice.sequences import ComplexSequence
from src.lattice.resonance import build_table
from src.interface.cli import build_parser, run
from src.interface.io import (
    SequenceFileError,
    file_digest,
    parse_sequence,
    read_csv,
    read_trajectory,
    write_sequence,
)
from src.interface.manifest import load_manifest
from src.interface.batch_run import batch_run


def write_text(path, text):
    path.write_text(text)
    return str(path)


def random_alpha(K, norm, seed=0):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=2 * K + 1) + 1j * rng.normal(size=2 * K + 1)
    return ComplexSequence.from_dense(norm * values / np.linalg.norm(values))


def test_parse_sequence_examples(tmp_path):
    seq = parse_sequence(write_text(tmp_path / "a.json", '{"offset":0,"values":[[1,0]]}'))
    assert seq[0] == 1.0 and seq.radius() == 0

    seq = parse_sequence(write_text(tmp_path / "b.json", '{"offset":-1,"values":[[0,0],[0.5,0],[0,0]]}'))
    assert seq.support() == (0, 0)
    assert seq[0] == 0.5 and seq[-1] == 0 and seq[1] == 0


@pytest.mark.parametrize("text, code", [
    ('{"offset":0,"values":[[NaN,0]]}', "non_finite"),
    ('{"offset":0,"values":[[1,Infinity]]}', "non_finite"),
    ('{"offset":0,"values":[[1,0]', "malformed_json"),
    ('{"offset":0,"values":[[1,0,2]]}', "malformed_json"),
    ('{"values":[[1,0]]}', "malformed_json"),
])
def test_parse_sequence_errors(tmp_path, text, code):
    with pytest.raises(SequenceFileError) as err:
        parse_sequence(write_text(tmp_path / "bad.json", text))
    assert err.value.code == code


def test_parse_sequence_support_overflow(tmp_path):
    path = write_text(tmp_path / "wide.json", '{"offset":-3,"values":[[1,0],[0,0],[0,0],[0,0]]}')
    assert parse_sequence(path, K=3).radius() == 3
    with pytest.raises(SequenceFileError) as err:
        parse_sequence(path, K=2)
    assert err.value.code == "support_overflow"


def test_sequence_file_keeps_full_precision(tmp_path):
    seq = random_alpha(3, 0.5, seed=1)
    path = str(tmp_path / "alpha.json")
    write_sequence(path, seq)
    npt.assert_array_equal(parse_sequence(path).values, seq.values)


def test_usage_errors():
    assert run([]) == 2
    assert run(["no-such-command"]) == 2
    assert run(["explicit", "--alpha-re", "0.5", "--bogus-flag"]) == 2


def test_explicit_row_has_modulus_of_data(tmp_path):
    out = str(tmp_path / "explicit.csv")
    assert run(["--quiet", "explicit", "--alpha-re", "0.5", "--alpha-im", "0", "--t", "10",
                "--mmax", "64", "--quad-tol", "1e-9", "--out", out]) == 0
    rows = read_csv(out)
    assert list(rows[0].keys()) == ["t", "re", "im", "phase", "tail_bound"]
    B = complex(float(rows[0]["re"]), float(rows[0]["im"]))
    assert abs(B) == pytest.approx(0.5, abs=1e-14)
    manifest = load_manifest(out + ".manifest.json")
    assert manifest.subcommand == "explicit"
    assert manifest.output_digests[out] == file_digest(out)


def test_explicit_needs_time(tmp_path):
    assert run(["--quiet", "explicit", "--alpha-re", "0.5", "--out", str(tmp_path / "x.csv")]) == 2


def test_simulate_rejects_zero_start_for_A(tmp_path, capsys):
    alpha = str(tmp_path / "alpha.json")
    write_sequence(alpha, ComplexSequence.delta(0, 0.5))
    out = str(tmp_path / "traj.csv")
    status = run(["--quiet", "simulate", "--alpha", alpha, "--K", "2", "--system", "A",
                  "--t0", "0", "--t1", "1", "--out", out])
    assert status == 2
    assert "t0 must be positive" in capsys.readouterr().err
    assert load_manifest(out + ".manifest.json").exit_status == 2


def test_resonance_table_output(tmp_path):
    alpha_seq = random_alpha(2, 0.5, seed=2)
    alpha = str(tmp_path / "alpha.json")
    write_sequence(alpha, alpha_seq)
    out = str(tmp_path / "table.json")
    assert run(["--quiet", "resonance-table", "--K", "2", "--alpha", alpha, "--out", out]) == 0
    with open(out) as f:
        data = json.load(f)
    table = build_table(2, parse_sequence(alpha))
    assert data["K"] == 2
    assert sorted(data["entries"], key=int) == [str(k) for k in range(-2, 3)]
    for k in range(-2, 3):
        assert [tuple(e[:5]) for e in data["entries"][str(k)]] == [tuple(e)[:5] for e in table.entries(k)]


def test_threads_help_names_parallel_subcommands():
    help_text = " ".join(build_parser().format_help().split())
    assert "norms; other subcommands run serially" in help_text


def test_simulate_is_reproducible(tmp_path):
    alpha = str(tmp_path / "alpha.json")
    write_sequence(alpha, random_alpha(2, 0.5, seed=3))
    outs = []
    for name, threads in (("a", "1"), ("b", "3")):
        out = str(tmp_path / f"{name}.csv")
        assert run(["--quiet", "--threads", threads, "simulate", "--alpha", alpha, "--K", "2", "--t0", "1", "--t1", "10",
                    "--samples", "11", "--out", out, "--diagnostics", str(tmp_path / f"{name}_diag.csv")]) == 0
        outs.append(out)
    assert file_digest(outs[0]) == file_digest(outs[1])
    assert load_manifest(outs[0] + ".manifest.json").run_id != load_manifest(outs[1] + ".manifest.json").run_id

    rows = read_csv(outs[0])
    assert list(rows[0].keys()) == ["t", "k", "re", "im"]
    assert len(rows) == 11 * 5
    traj = read_trajectory(outs[0], parse_sequence(alpha))
    assert len(traj) == 11 and traj.K == 2
    diag = read_csv(str(tmp_path / "a_diag.csv"))
    masses = np.array([float(r["mass"]) for r in diag])
    npt.assert_allclose(masses, 0.25, rtol=1e-8)

    assert run(["--quiet", "replay", outs[0] + ".manifest.json"]) == 0


def test_field_and_norms_from_trajectory(tmp_path):
    alpha = str(tmp_path / "alpha.json")
    write_sequence(alpha, random_alpha(1, 0.1, seed=4))
    traj = str(tmp_path / "traj.csv")
    assert run(["--quiet", "simulate", "--alpha", alpha, "--K", "1", "--t0", "1", "--t1", "30",
                "--samples", "2901", "--out", traj]) == 0

    field_out = str(tmp_path / "field.csv")
    residual_out = str(tmp_path / "residual.csv")
    assert run(["--quiet", "field", "--alpha", alpha, "--traj", traj, "--xgrid", "8",
                "--out", field_out, "--residual", residual_out]) == 0
    rows = read_csv(field_out)
    assert list(rows[0].keys()) == ["t", "x", "re", "im"]
    assert len(rows) == 2901 * 8
    assert list(read_csv(residual_out)[0].keys()) == ["t", "res_l2"]

    norms_out = str(tmp_path / "norms.csv")
    assert run(["--quiet", "norms", "--alpha", alpha, "--traj", traj, "--out", norms_out]) == 0
    rows = read_csv(norms_out)
    assert list(rows[0].keys()) == ["nu", "k", "norm"]
    with open(norms_out + ".summary.json") as f:
        summary = json.load(f)
    assert summary["nus"][0] == 2 and summary["nus"][-1] == 6
    assert summary["xsp"] > 0 and "total" in summary["slopes"]


def test_fixed_point_command(tmp_path):
    alpha = str(tmp_path / "alpha.json")
    write_sequence(alpha, random_alpha(1, 0.1, seed=5))
    out = str(tmp_path / "solution.csv")
    assert run(["--quiet", "fixed-point", "--alpha", alpha, "--K", "1", "--tmax", "30",
                "--tol", "1e-10", "--out", out]) == 0
    with open(out + ".report.json") as f:
        report = json.load(f)
    assert report["converged"] and report["residual"] < 1e-8
    assert all(r < 1 for r in report["ratios"])
    assert math.isfinite(report["tail_bound"])


def test_divisor_stats_command(tmp_path):
    out = str(tmp_path / "divisors.csv")
    assert run(["--quiet", "divisor-stats", "--mmax", "100", "--out", out]) == 0
    rows = read_csv(out)
    assert [int(r["M_max"]) for r in rows] == [4, 8, 16, 32, 64, 100]
    assert all(int(r["max_count"]) >= 2 for r in rows)


def test_batch_runs_named_experiments(tmp_path):
    experiments = write_text(tmp_path / "experiments.yaml", """
experiments:
  tiny_table:
    description: "K = 1 table"
    alpha:
      constant: {K: 1, re: 0.5}
    steps:
      - ["resonance-table", "--K", "1", "--alpha", "{alpha}", "--out", "{run_dir}/table.json"]
  skipped:
    description: "inactive"
    is_active: false
    steps:
      - ["divisor-stats"]
  broken:
    description: "bad flag"
    steps:
      - ["divisor-stats", "--no-such-flag"]
""")
    registry = str(tmp_path / "registry.json")
    out_dir = str(tmp_path / "runs")
    assert batch_run(experiments, only="tiny_table", output_dir=out_dir, quiet=True, registry_file=registry)
    assert os.path.exists(os.path.join(out_dir, "tiny_table", "table.json"))
    assert os.path.exists(os.path.join(out_dir, "tiny_table", "step0.manifest.json"))
    assert not batch_run(experiments, output_dir=out_dir, quiet=True, registry_file=registry)
    with open(registry) as f:
        status = {e["name"]: e["last_status"] for e in json.load(f)["experiments"]}
    assert status == {"tiny_table": "ok", "broken": "failed"}
    with pytest.raises(ValueError):
        batch_run(experiments, only="skipped", output_dir=out_dir, quiet=True, registry_file=registry)
