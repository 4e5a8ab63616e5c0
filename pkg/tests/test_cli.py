import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from stochop.cli import RunConfig, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def spectrum_values(text):
    rows = list(csv.reader(text.splitlines()))
    assert rows[0] == ["index", "value"]
    return [float(r[1]) for r in rows[1:]]


def test_sample_hermite_inf(capsys):
    code, out, _ = run(["sample", "hermite", "--n", "4", "--beta", "inf"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["beta"] == "inf"
    assert d["diag"] == [0.0] * 4
    np.testing.assert_allclose(d["offdiag"], np.sqrt([3 / 2, 2 / 2, 1 / 2]))


def test_sample_laguerre_single_entry(capsys):
    code, out, _ = run(["sample", "laguerre-l", "--n", "1", "--beta", "inf", "--a", "2"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["main"] == [pytest.approx(math.sqrt(3))]
    assert d["adjacent"] == []


def test_sample_bad_parameter(capsys):
    code, _, err = run(["sample", "laguerre-l", "--n", "3", "--a", "-2"], capsys)
    assert code == 2
    assert "a > -1" in err


def test_sample_respects_seed(capsys, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["sample", "jacobi", "--n", "5", "--seed", "4", "--out", str(a)]) == 0
    assert main(["sample", "jacobi", "--n", "5", "--seed", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_spectrum_hermite_soft(capsys):
    code, out, _ = run(["spectrum", "hermite-soft", "--n", "10000", "--beta", "inf"], capsys)
    assert code == 0
    assert spectrum_values(out)[0] == pytest.approx(2.3381074105, abs=2e-2)


def test_spectrum_laguerre_hard(capsys):
    code, out, _ = run(["spectrum", "laguerre-hard", "--n", "2000", "--beta", "inf", "--a", "0"], capsys)
    assert code == 0
    assert spectrum_values(out)[0] == pytest.approx(2.4048255577, abs=1e-2)


def test_spectrum_from_model_file(capsys, tmp_path):
    f = tmp_path / "m.json"
    assert main(["sample", "laguerre-l", "--n", "30", "--a", "1", "--seed", "2", "--out", str(f)]) == 0
    code, out, _ = run(["spectrum", "none", "--model-file", str(f), "--k", "3"], capsys)
    assert code == 0
    d = json.loads(f.read_text())
    B = np.diag(d["main"]) + np.diag(d["adjacent"], 1)
    np.testing.assert_allclose(spectrum_values(out), np.sort(np.linalg.svd(B, compute_uv=False))[:3], rtol=1e-10)


def test_spectrum_errors(capsys):
    assert run(["spectrum", "hermite-soft", "--n", "5", "--k", "6"], capsys)[0] == 2
    assert run(["spectrum", "jacobi-hard", "--model", "hermite", "--n", "5"], capsys)[0] == 2
    assert run(["spectrum", "hermite-soft", "--n", "5", "--bogus"], capsys)[0] == 2


def test_mc_airy_rr_counts_and_determinism(capsys, tmp_path):
    args = ["mc", "airy-rr", "--beta", "2", "--samples", "100", "--l", "30", "--right", "20", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    capsys.readouterr()
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len(files) == 3
    raw = [f for f in files if f.endswith(".csv") and not f.endswith(".hist.csv")][0]
    assert raw.endswith("_3.csv")
    assert len((tmp_path / "a" / raw).read_text().splitlines()) == 101
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_mc_soft_edge(capsys, tmp_path):
    code, out, _ = run(["mc", "soft-edge", "--model", "hermite", "--n", "2000", "--beta", "2", "--samples", "100",
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "100 samples" in out
    sidecar = json.loads(next(tmp_path.glob("*.json")).read_text())
    assert sidecar["n_total"] == 100
    assert sidecar["experiment"]["n"] == 2000


def test_mc_usage_errors(capsys):
    assert run(["mc", "soft-edge", "--samples", "3"], capsys)[0] == 2
    assert run(["mc", "bessel-rr", "--k", "2"], capsys)[0] == 2


def test_diagnose(capsys, tmp_path):
    out_csv = tmp_path / "prof.csv"
    code, out, _ = run(["diagnose", "jacobi-hard", "--n", "400", "--seed", "1", "--out", str(out_csv)], capsys)
    assert code == 0
    assert "roughness ratio" in out
    header = out_csv.read_text().splitlines()[0].split(",")
    assert header[0] == "index" and "log_abs_ratio" in header
    code, out, _ = run(["diagnose", "hermite-soft", "--n", "300", "--beta", "inf"], capsys)
    assert code == 0
    assert "note:" in out
    assert run(["diagnose", "hermite-soft", "--n", "30", "--k", "1", "--l", "1"], capsys)[0] == 2
    assert run(["diagnose", "hermite-soft", "--n", "30", "--k", "40"], capsys)[0] == 2


def test_config_file_and_save(capsys, tmp_path):
    saved = tmp_path / "run.json"
    out1 = tmp_path / "o1.json"
    assert main(["sample", "hermite", "--n", "6", "--beta", "4", "--seed", "8", "--out", str(out1),
                 "--save-config", str(saved)]) == 0
    cfg = RunConfig.from_json(saved.read_text())
    assert cfg.seed == 8 and cfg.params["n"] == 6
    assert RunConfig.from_json(cfg.to_json()) == cfg
    # replaying the saved config rewrites the same model to the same file
    first = out1.read_text()
    out1.unlink()
    assert main(["sample", "hermite", "--config", str(saved)]) == 0
    assert out1.read_text() == first
    plain = tmp_path / "plain.json"
    plain.write_text(json.dumps({"n": 3, "beta": "inf"}))
    code, out, _ = run(["sample", "hermite", "--config", str(plain)], capsys)
    assert code == 0 and json.loads(out)["n"] == 3


def test_run_config_digest_is_order_independent():
    a = RunConfig("mc", {"x": 1, "y": 2}, seed=3)
    b = RunConfig("mc", {"y": 2, "x": 1}, seed=3)
    assert a.digest() == b.digest()
    assert a.digest() != RunConfig("mc", {"x": 1, "y": 3}, seed=3).digest()


@pytest.mark.parametrize("sub", ["sample", "spectrum", "mc", "verify", "diagnose"])
def test_help(sub, capsys):
    code, out, _ = run([sub, "--help"], capsys)
    assert code == 0
    assert "usage" in out


def test_verify_identities_exit_code(capsys):
    code, out, _ = run(["verify", "identities"], capsys)
    assert code == 0
    assert "[PASS] criterion 3" in out and "[PASS] criterion 4" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stochop", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("stochop ")
