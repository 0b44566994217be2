import json
import subprocess
import sys

import pytest

from qcorr.cli import main

SMALL = {
    "grid": {"n_p": 10, "n_theta": 8, "n_train": 60, "n_test": 40},
    "ann": {"epochs": 10},
    "sdp": {"dims": [[2, 2], [2, 3]], "n_states": [12, 6], "budget_sweep": [50, 500]},
    "bench": {"repeats": 30, "n_states": 5},
}
TIMING_KEYS = {"wall_time_ms", "median_seconds", "resolution_flags", "ordering_holds", "timer_resolution"}


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def config_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "small.json"
    path.write_text(json.dumps(SMALL))
    return str(path)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, config_file):
    out = tmp_path_factory.mktemp("run")
    for cmd in ("gen-data", "train-eval"):
        assert main([cmd, "--config", config_file, "--out", str(out)]) == 0
    return out


def test_gen_data_outputs(workdir):
    rows = [json.loads(line) for line in (workdir / "train.jsonl").read_text().splitlines()]
    assert len(rows) == 60
    assert {"p", "theta", "f1", "f2", "label", "source", "seed"} <= set(rows[0])
    assert rows[0]["label"] in ("I", "II", "III", "IV")
    assert len((workdir / "test.jsonl").read_text().splitlines()) == 40


def test_gen_data_is_byte_identical(tmp_path, config_file, workdir, capsys):
    for name in ("a", "b"):
        assert run(["gen-data", "--config", config_file, "--out", str(tmp_path / name)], capsys)[0] == 0
    for f in ("train.jsonl", "test.jsonl"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
        assert (tmp_path / "a" / f).read_bytes() == (workdir / f).read_bytes()
    assert run(["gen-data", "--config", config_file, "--seed", "1", "--out", str(tmp_path / "c")], capsys)[0] == 0
    assert (tmp_path / "c" / "test.jsonl").read_bytes() != (tmp_path / "a" / "test.jsonl").read_bytes()


def test_noise_none_labels_match_theory(tmp_path, config_file, capsys):
    assert run(["gen-data", "--config", config_file, "--noise", "none", "--out", str(tmp_path)], capsys)[0] == 0
    for line in (tmp_path / "test.jsonl").read_text().splitlines():
        row = json.loads(line)
        assert row["source"] == "exact"
        assert row["label"] == row["theory"]


def test_train_eval_report(workdir, config_file, tmp_path, capsys):
    report = json.loads((workdir / "report.json").read_text())
    assert report["seed"] == 0 and len(report["config_hash"]) == 64
    for kind in ("ann", "svm", "dt"):
        entry = report["models"][kind]
        conf = entry["four_class"]["confusion"]
        assert sum(map(sum, conf)) == 40
        assert set(entry["binary"]) == {"entangled", "steerable", "nonlocal"}
        assert (workdir / "models" / f"{kind}.json").exists()
        csv = (workdir / f"phase_{kind}.csv").read_text().splitlines()
        assert csv[0] == "p,theta,true,pred,correct" and len(csv) == 41
    # rerun into a copy of the datasets: identical report and model files
    for f in ("train.jsonl", "test.jsonl"):
        (tmp_path / f).write_bytes((workdir / f).read_bytes())
    assert run(["train-eval", "--config", config_file, "--out", str(tmp_path)], capsys)[0] == 0
    assert (tmp_path / "report.json").read_bytes() == (workdir / "report.json").read_bytes()
    for kind in ("ann", "svm", "dt"):
        assert (tmp_path / "models" / f"{kind}.json").read_bytes() == (workdir / "models" / f"{kind}.json").read_bytes()


def test_phase_export(workdir, config_file, capsys):
    before = (workdir / "phase_svm.csv").read_bytes()
    code, out, _ = run(["phase-export", "--config", config_file, "--model", "svm", "--out", str(workdir)], capsys)
    assert code == 0 and "phase_svm.csv" in out
    assert (workdir / "phase_svm.csv").read_bytes() == before


def test_mismatch_study(tmp_path, config_file, capsys):
    code, out, _ = run(["mismatch-study", "--config", config_file, "--model", "dt", "--out", str(tmp_path)], capsys)
    assert code == 0
    report = json.loads((tmp_path / "mismatch.json").read_text())
    entry = report["models"]["dt"]
    assert {"matched", "mismatched"} == set(entry["class_III_recall"])
    assert report["arms"]["mismatched"]["train_source"] == "exact"
    assert entry["accuracy_delta"] == pytest.approx(entry["mismatched_accuracy"] - entry["matched_accuracy"])


def test_bench(workdir, config_file, capsys):
    code, _, err = run(["bench", "--config", config_file, "--out", str(workdir)], capsys)
    report = json.loads((workdir / "bench.json").read_text())
    assert report["repeats"] >= 30
    assert set(report["median_seconds"]) == {"tomography_labeling", "ann_inference", "svm_inference", "dt_inference"}
    # the command fails exactly when the asserted ordering does not hold
    assert (code == 0) == report["ordering_holds"]
    if code:
        assert json.loads(err)["error"] == "OrderingError"


def test_sdp_run(tmp_path, config_file, capsys):
    outs = []
    for name in ("a", "b"):
        assert run(["sdp-run", "--config", config_file, "--out", str(tmp_path / name)], capsys)[0] == 0
        rows = [json.loads(line) for line in (tmp_path / name / "sdp_results.jsonl").read_text().splitlines()]
        outs.append(([{k: v for k, v in r.items() if k not in TIMING_KEYS} for r in rows], (tmp_path / name / "sdp_summary.json").read_bytes()))
    assert outs[0] == outs[1]
    summary = json.loads(outs[0][1])
    assert [r["dims"] for r in summary["runs"]] == [[2, 2], [2, 3]]
    assert all(r["ppt_agreement"] >= 0.99 for r in summary["runs"])


@pytest.mark.parametrize(
    "argv,kind",
    [
        (["train-eval", "--out", "{tmp}/empty"], "FileNotFoundError"),
        (["gen-data", "--config", "{tmp}/missing.json"], "FileNotFoundError"),
        (["gen-data", "--config", "{tmp}/unknown.json", "--out", "{tmp}"], "ConfigError"),
        (["gen-data", "--config", "{tmp}/overlap.json", "--out", "{tmp}"], "OverlapError"),
        (["sdp-run", "--config", "{tmp}/guard.json", "--out", "{tmp}"], "ConfigError"),
    ],
)
def test_errors_are_json(tmp_path, capsys, argv, kind):
    (tmp_path / "unknown.json").write_text(json.dumps({"seeds": 3}))
    (tmp_path / "overlap.json").write_text(json.dumps({"grid": {"delta_theta": 0.0}}))
    (tmp_path / "guard.json").write_text(json.dumps({"sdp": {"dims": [[5, 5]], "n_states": [1]}}))
    code, _, err = run([a.replace("{tmp}", str(tmp_path)) for a in argv], capsys)
    assert code == 1
    obj = json.loads(err.strip().splitlines()[-1])
    assert obj["error"] == kind and obj["message"]


def test_schema_mismatch(tmp_path, capsys):
    for f in ("train", "test"):
        (tmp_path / f"{f}.jsonl").write_text(json.dumps({"schema": "qcorr-dataset/0", "label": "I"}) + "\n")
    code, _, err = run(["train-eval", "--out", str(tmp_path)], capsys)
    assert code == 1 and json.loads(err)["error"] == "SchemaError"


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["train-eval", "--model", "knn"])
    assert exc.value.code == 2
    assert json.loads(capsys.readouterr().err)["error"] == "UsageError"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "qcorr", "bench", "--out", str(tmp_path)], capture_output=True, text=True
    )
    assert proc.returncode == 1
    assert json.loads(proc.stderr)["error"] == "FileNotFoundError"
    proc = subprocess.run([sys.executable, "-m", "qcorr", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("gen-data", "train-eval", "mismatch-study", "bench", "sdp-run", "phase-export"):
        assert cmd in proc.stdout
