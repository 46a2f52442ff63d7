import json
import subprocess
import sys
from pathlib import Path

import pytest

import dcl
from dcl.cli import main


def run_cli(*args) -> tuple[int, str]:
    import contextlib
    import io

    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(out):
        code = main(list(args))
    return code, out.getvalue()


def test_validate_builtin_ok():
    code, out = run_cli("validate", "--model", "builtin:dectiger")
    assert code == 0
    assert "ok" in out


def test_validate_bad_model_exit1(tmp_path):
    src = dcl.serialize_model(dcl.builtin("beverage"))
    bad = src.replace("T: coffee serve-coffee,", "# removed T: coffee serve-coffee,", 1)
    # simpler: scale one transition line
    bad = src.replace("T: coffee serve-coffee -> coffee 1\n", "T: coffee serve-coffee -> coffee 0.9\n")
    path = tmp_path / "bad.dpm"
    path.write_text(bad)
    code, out = run_cli("validate", "--model", str(path))
    assert code == 1
    assert "sums to" in out


def test_validate_missing_file_exit2():
    code, out = run_cli("validate", "--model", "no/such/file.dpm")
    assert code == 2


def test_parse_error_exit2(tmp_path):
    path = tmp_path / "broken.dpm"
    path.write_text("agents: 1\nwhatzit: 9\n")
    code, out = run_cli("validate", "--model", str(path))
    assert code == 2
    assert f"{path}:2:1:" in out


def test_bias_headline(capfdbinary):
    code, out = run_cli(
        "bias", "--model", "builtin:dectiger", "--policy", "builtin:dectiger-listen-open", "--horizon", "3"
    )
    assert code == 0
    assert out.startswith("max_abs_bias=")
    assert float(out.split("=")[1]) > 1.0


def test_gradient_json_vector_length(tmp_path):
    out_path = tmp_path / "grad.json"
    code, _ = run_cli(
        "gradient",
        "--model", "builtin:beverage",
        "--policy", "builtin:uniform",
        "--kind", "H",
        "--format", "json",
        "--out", str(out_path),
    )
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert len(payload["rows"]) == 2  # 1 history x 2 actions


def test_variance_orderings_printed():
    code, out = run_cli(
        "variance",
        "--model", "builtin:meetgrid3",
        "--policy", "builtin:uniform",
        "--horizon", "3",
        "--return-kind", "continuation",
    )
    assert code == 0
    vals = {}
    for line in out.strip().splitlines():
        key, _, val = line.partition("=")
        vals[key] = float(val)
    assert vals["var_S"] >= vals["var_H"] - 1e-10
    assert vals["var_HS"] >= vals["var_H"] - 1e-10
    assert vals["max_abs_bias"] <= 1e-10


def test_resource_cap_exit3():
    code, out = run_cli(
        "values", "--model", "builtin:meetgrid3", "--policy", "builtin:uniform",
        "--horizon", "8", "--cap", "10000",
    )
    assert code == 3
    assert "cap" in out and "10000" in out


def test_sample_outputs_identical_bytes(tmp_path):
    args = [
        "sample",
        "--model", "builtin:dectiger",
        "--policy", "builtin:dectiger-listen-open",
        "--kind", "H",
        "--n", "200",
        "--seed", "7",
        "--format", "csv",
    ]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(*args, "--out", str(a))[0] == 0
    assert run_cli(*args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "# rng:" in text and "# workers: 1" in text


def test_sample_n1_empty_variance():
    code, out = run_cli(
        "sample",
        "--model", "builtin:beverage",
        "--policy", "builtin:uniform",
        "--kind", "S",
        "--n", "1",
        "--seed", "1",
    )
    assert code == 0
    assert "variance=\n" in out or out.rstrip().endswith("variance=")


def test_csv_and_json_encode_same_rows(tmp_path):
    common = [
        "values",
        "--model", "builtin:beverage",
        "--policy", "builtin:uniform",
    ]
    cpath, jpath = tmp_path / "v.csv", tmp_path / "v.json"
    assert run_cli(*common, "--format", "csv", "--out", str(cpath))[0] == 0
    assert run_cli(*common, "--format", "json", "--out", str(jpath))[0] == 0
    payload = json.loads(jpath.read_text())
    lines = [l for l in cpath.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    assert header == payload["columns"]
    assert len(lines) - 1 == len(payload["rows"])
    first_csv = lines[1].split(",")
    first_json = payload["rows"][0]
    assert first_csv[0] == first_json[0]
    assert float(first_csv[-1]) == pytest.approx(first_json[-1], abs=0)


def test_train_curve_and_policy_roundtrip(tmp_path):
    curve = tmp_path / "curve.csv"
    policy_file = tmp_path / "final.pol"
    code, out = run_cli(
        "train",
        "--model", "builtin:beverage",
        "--critic", "history",
        "--episodes", "400",
        "--eval-interval", "100",
        "--eval-episodes", "200",
        "--seed", "3",
        "--out", str(curve),
        "--policy-out", str(policy_file),
    )
    assert code == 0
    lines = [l for l in curve.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "episode,mean_return,std_return,seconds"
    episodes = [int(l.split(",")[0]) for l in lines[1:]]
    assert episodes == sorted(set(episodes))
    final_mean = float(lines[-1].split(",")[1])

    code2, out2 = run_cli(
        "evaluate",
        "--model", "builtin:beverage",
        "--policy", str(policy_file),
        "--exact",
    )
    assert code2 == 0
    j = float(out2.split()[0].split("=")[1])
    se = 1.0 / (200**0.5)
    assert abs(final_mean - j) <= 4 * se


def test_train_config_file(tmp_path):
    cfg = tmp_path / "train.cfg"
    cfg.write_text("critic: state\nepisodes: 200\neval_interval: 100\neval_episodes: 50\nseed: 9\n")
    code, out = run_cli("train", "--model", "builtin:beverage", "--config", str(cfg))
    assert code == 0
    assert out.startswith("final_mean_return=")


def test_enumeration_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("DCL_CACHE_DIR", str(tmp_path / "cache"))
    args = ["bias", "--model", "builtin:dectiger", "--policy", "builtin:dectiger-listen-open"]
    code1, out1 = run_cli(*args)
    cache_files = list((tmp_path / "cache").glob("*.pkl"))
    assert code1 == 0 and len(cache_files) == 1
    code2, out2 = run_cli(*args)
    assert code2 == 0 and out1 == out2


def test_console_script_entrypoint():
    proc = subprocess.run(
        [sys.executable, "-m", "dcl.cli", "validate", "--model", "builtin:beverage"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "ok" in proc.stdout
