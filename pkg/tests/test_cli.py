import json
import subprocess
import sys

import numpy as np
import pytest

from robust_cur.cli import main
from robust_cur.fileio import frames_to_matrix, load_matrix, matrix_to_frames, save_matrix
from robust_cur.synth import SynthConfig, gen_lowrank, gen_problem, gen_video


@pytest.fixture
def problem(tmp_path):
    gt = gen_problem(SynthConfig(200, 200, 5, alpha=0.01, seed=7))
    save_matrix(gt.D, tmp_path / "in.bin")
    save_matrix(gt.L, tmp_path / "L.bin")
    return tmp_path


def _report(path):
    return json.loads(path.read_text())


def test_rcur_writes_estimate_and_report(problem):
    out = problem / "out"
    code = main(["rcur", "--rank", "5", "--rows", "auto:5", "--cols", "auto:5", "--seed", "7",
                 "--truth", str(problem / "L.bin"), "--out", str(out), str(problem / "in.bin")])
    assert code == 0
    rep = _report(out / "report.json")
    assert rep["diagnostics"]["rel_spectral_error"] <= 1e-5
    assert rep["config"]["rows"] == "auto:5:log_n" and rep["config"]["seed"] == 7
    assert rep["rpca"]["columns"]["residual_trace"]
    assert {"mu1", "mu2", "alpha", "kappa", "beta", "beta_prime"} <= set(rep["diagnostics"])
    assert load_matrix(out / "L_hat.bin").shape == (200, 200)


def test_rcur_without_truth_reports_null(problem):
    out = problem / "o2"
    assert main(["rcur", "--rank", "5", "--out", str(out), "--format", "csv", str(problem / "in.bin")]) == 0
    assert _report(out / "report.json")["diagnostics"]["rel_spectral_error"] is None
    assert (out / "L_hat.csv").exists()


def test_rerun_from_echo_is_bit_exact(problem):
    a, b = problem / "a", problem / "b"
    args = ["rcur", "--rank", "5", "--seed", "3", "--rows", "60", "--cols", "60", str(problem / "in.bin")]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert (a / "L_hat.bin").read_bytes() == (b / "L_hat.bin").read_bytes()
    ra, rb = _report(a / "report.json"), _report(b / "report.json")
    assert ra["rpca"] == rb["rpca"] and ra["sampling"] == rb["sampling"]


def test_unknown_flag_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["rcur", "--bogus"])
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_bad_sample_spec_exit_1(problem):
    with pytest.raises(SystemExit) as exc:
        main(["rcur", "--rank", "2", "--rows", "auto:x", str(problem / "in.bin")])
    assert exc.value.code == 1


def test_truncated_input_exit_1(problem, capsys):
    raw = (problem / "in.bin").read_bytes()
    (problem / "t.bin").write_bytes(raw[:-8])
    assert main(["rpca", "--rank", "2", "--out", str(problem / "x"), str(problem / "t.bin")]) == 1
    assert "missing 8 bytes" in capsys.readouterr().err


def test_missing_rank_exit_1(problem):
    assert main(["rpca", "--out", str(problem / "x"), str(problem / "in.bin")]) == 1


def test_nonconvergence_exit_2(problem):
    out = problem / "nc"
    code = main(["rpca", "--rank", "5", "--max-iters", "2", "--out", str(out), str(problem / "in.bin")])
    assert code == 2
    rep = _report(out / "report.json")
    assert rep["exit_code"] == 2 and not rep["rpca"]["converged"]


def test_rank_deficient_core_exit_2(tmp_path):
    L = np.zeros((40, 30))
    L[0] = 1.0
    L[:, 0] += 1.0
    save_matrix(L, tmp_path / "d.bin")
    # rank-2 target on a matrix whose sampled core is almost surely rank 1
    assert main(["rcur", "--rank", "2", "--rows", "3", "--cols", "3", "--seed", "1",
                 "--out", str(tmp_path / "o"), str(tmp_path / "d.bin")]) == 2


def test_rpca_and_diagnose(problem):
    out = problem / "r"
    assert main(["rpca", "--rank", "5", "--truth", str(problem / "L.bin"), "--out", str(out),
                 str(problem / "in.bin")]) == 0
    rep = _report(out / "report.json")
    assert rep["rpca"]["converged"] and rep["diagnostics"]["rel_spectral_error"] <= 1e-6
    assert main(["diagnose", "--rank", "5", "--estimate", str(out / "L_hat.bin"), "--report",
                 str(problem / "diag.json"), str(problem / "L.bin")]) == 0
    d = _report(problem / "diag.json")["diagnostics"]
    assert d["rank_numeric"] == 5 and d["rel_spectral_error"] <= 1e-6


def test_css_command(tmp_path):
    save_matrix(gen_lowrank(20, 30, 3, seed=1), tmp_path / "x.bin")
    assert main(["css", "--rank", "3", "--k", "4", "--out", str(tmp_path / "o"), str(tmp_path / "x.bin")]) == 0
    sel = json.loads((tmp_path / "o" / "css.json").read_text())
    assert len(sel["cols"]) == 4 and sel["beta"] <= 3


def test_css_bad_k_exit_2(tmp_path):
    save_matrix(gen_lowrank(20, 30, 3, seed=1), tmp_path / "x.bin")
    assert main(["css", "--rank", "3", "--k", "2", "--out", str(tmp_path / "o"), str(tmp_path / "x.bin")]) == 2


def test_synth_and_frames(tmp_path):
    out = tmp_path / "s"
    assert main(["synth", "--size", "30x20", "--rank", "2", "--alpha", "0.1", "--seed", "4",
                 "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 4 and manifest["m"] == 30
    D = load_matrix(out / "D.bin")
    np.testing.assert_array_equal(D, load_matrix(out / "L.bin") + load_matrix(out / "S.bin"))
    # matrix -> frames -> matrix
    save_matrix(np.arange(24.0).reshape(12, 2), tmp_path / "m.bin")
    assert main(["frames", "--height", "3", "--width", "4", "--out", str(tmp_path / "f"),
                 str(tmp_path / "m.bin")]) == 0
    assert main(["frames", "--out", str(tmp_path / "g"), str(tmp_path / "f" / "frames")]) == 0
    np.testing.assert_array_equal(load_matrix(tmp_path / "g" / "frames.bin"), np.arange(24.0).reshape(12, 2))
    assert main(["frames", "--out", str(tmp_path / "h"), str(tmp_path / "m.bin")]) == 1


def test_hybrid_on_frames_emits_two_canonical_frames(tmp_path):
    gt = gen_video(100, 64, 80, r=2, alpha=0.05, seed=3)
    matrix_to_frames(gt.D, 64, 80, tmp_path / "video")
    out = tmp_path / "o"
    assert main(["hybrid", "--rank", "2", "--seed", "1", "--out", str(out), str(tmp_path / "video")]) == 0
    frames = sorted((out / "canonical").glob("*.pgm"))
    assert len(frames) == 2
    rep = _report(out / "report.json")
    assert len(rep["selection"]["cols"]) == 2 and rep["config"]["tol"] == 1e-2
    C, _, _ = frames_to_matrix(out / "canonical")
    assert C.shape == (64 * 80, 2)


def test_bench_command(tmp_path, capsys):
    assert main(["bench", "--size", "150x150", "--rank", "3", "--trials", "1", "--table", "csv",
                 "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.startswith("size,r,alpha")
    assert _report(tmp_path / "report.json")["bench"]["trials"] == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "robust_cur", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
    proc = subprocess.run([sys.executable, "-m", "robust_cur", "nope"], capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr
