import json
import subprocess
import sys

import pytest

from summarycs.cli import main
from summarycs.io import load_codebook, save_signal
from summarycs.signal import generate


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_codebook_complete(capsys):
    code, out, _ = run(capsys, "gen-codebook", "--n", "4", "--d", "2", "--kind", "complete")
    assert code == 0
    assert json.loads(out) == {"n": 4, "d": 2, "subsets": [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]]}


def test_random_needs_m(capsys):
    code, _, err = run(capsys, "gen-codebook", "--n", "4", "--d", "2")
    assert code == 2 and "--m" in err


@pytest.mark.parametrize("alg", ["ssii", "bp"])
def test_encode_decode_pipeline(tmp_path, capsys, alg):
    cb_path, sig_path, y_path = tmp_path / "cb.json", tmp_path / "x.json", tmp_path / "y.csv"
    run(capsys, "gen-codebook", "--n", "8", "--d", "3", "--kind", "complete", "--out", str(cb_path))
    sig = generate(8, 4, seed=1)
    save_signal(sig, sig_path)
    assert run(capsys, "encode", "--signal", str(sig_path), "--codebook", str(cb_path), "--out", str(y_path))[0] == 0
    code, out, err = run(capsys, "decode", "--alg", alg, "--measurements", str(y_path), "--codebook", str(cb_path))
    assert code == 0
    assert err.startswith("status=success iterations=")
    got = json.loads(out)
    assert [e["label"] for e in got["entries"]] == [format(b, "08b") for b in sig.labels.tolist()]


def test_mm_pipeline(tmp_path, capsys):
    cb_path, sig_path, y_path = tmp_path / "cb.json", tmp_path / "x.json", tmp_path / "y.csv"
    run(capsys, "gen-codebook", "--n", "20", "--d", "3", "--m", "12", "--seed", "4", "--out", str(cb_path))
    sig = generate(20, 5, seed=2)
    save_signal(sig, sig_path)
    run(capsys, "encode", "--signal", str(sig_path), "--codebook", str(cb_path), "--stacked", "--out", str(y_path))
    assert y_path.read_text().splitlines()[0] == "subset,pattern,value,part"
    code, out, err = run(capsys, "decode", "--alg", "mm", "--measurements", str(y_path), "--codebook", str(cb_path))
    assert code == 0 and "status=success" in err
    assert len(json.loads(out)["entries"]) == 5


def test_bp_refuses_large_n(tmp_path, capsys):
    cb_path, sig_path, y_path = tmp_path / "cb.json", tmp_path / "x.json", tmp_path / "y.csv"
    run(capsys, "gen-codebook", "--n", "13", "--d", "2", "--m", "3", "--seed", "1", "--out", str(cb_path))
    save_signal(generate(13, 2, seed=1), sig_path)
    run(capsys, "encode", "--signal", str(sig_path), "--codebook", str(cb_path), "--out", str(y_path))
    code, _, err = run(capsys, "decode", "--alg", "bp", "--measurements", str(y_path), "--codebook", str(cb_path))
    assert code == 2 and "n=13" in err


def test_experiment_requires_seed(capsys):
    code, _, err = run(capsys, "experiment", "oversampling", "--n", "10", "--k", "4")
    assert code == 2 and "--seed" in err


def test_experiment_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.csv"
        code, _, _ = run(capsys, "experiment", "oversampling", "--seed", "3", "--n", "10", "--k", "4",
                         "--trials", "5", "--out", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].startswith(b"n,N,k,d,m,M,successes,trials,rate,oversampling,seconds\n")


def test_experiment_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 2, "n": [12], "k": [1, 3], "M": [96], "trials": 4}))
    code, out, _ = run(capsys, "experiment", "success-prob", "--config", str(cfg))
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 3 and lines[1].startswith("12,4096,1,")


def test_bounds_report_and_grid(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "32", "--d", "4", "--m", "10", "--k", "3")
    rep = json.loads(out)
    assert code == 0 and 0 <= rep["mm_success"] <= 1 and "ssii_failure_raw" in rep
    code, out, _ = run(capsys, "bounds", "grid", "--n", "20,30", "--d", "2-3", "--m", "5", "--k", "1,2")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 1 + 2 * 2 * 2 and lines[0].startswith("n,d,m,k,")


def test_ingest(tmp_path, capsys):
    f = tmp_path / "obs.csv"
    f.write_text("subset,pattern,value\n1;2,00,0\n1;2,01,0\n1;2,10,7\n1;2,11,0\n")
    code, out, _ = run(capsys, "ingest", str(f), "--n", "3", "--decode")
    got = json.loads(out)
    assert code == 0 and got["M"] == 4 and got["missing_rows"] == 0 and "status" in got
    f.write_text("subset,pattern,value\n1;2,00,0\n")
    code, _, err = run(capsys, "ingest", str(f), "--n", "3")
    assert code == 2 and "absent" in err
    code, out, _ = run(capsys, "ingest", str(f), "--n", "3", "--allow-partial")
    assert json.loads(out)["missing_rows"] == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "summarycs", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "experiment" in res.stdout
