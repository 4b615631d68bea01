import math

import numpy as np
import pytest

from conftest import orthonormal_rows
from robust_cur.diagnostics import (DiagnosticsReport, RankError, beta_factor, condition_number, diagnose,
                                    foreground_mask, incoherence, numeric_rank, predicted_success,
                                    relative_error, sparsity_level, support_f1, verify_bounds)
from robust_cur.sampling import sample_size, sample_uniform
from robust_cur.synth import gen_lowrank, gen_sparse


def test_incoherence_flat_and_spike():
    assert incoherence(np.ones((8, 6)), 1) == pytest.approx((1.0, 1.0))
    E = np.zeros((8, 6))
    E[0, 0] = 1.0
    assert incoherence(E, 1) == pytest.approx((8.0, 6.0))


def test_incoherence_matches_independent_svd_oracle():
    L = gen_lowrank(90, 70, 4, 3.0, seed=5)
    # oracle: eigenvectors of L L^T and L^T L
    _, Wf = np.linalg.eigh(L @ L.T)
    _, Vf = np.linalg.eigh(L.T @ L)
    W, V = Wf[:, -4:], Vf[:, -4:]
    mu1 = 90 / 4 * np.max(np.sum(W ** 2, axis=1))
    mu2 = 70 / 4 * np.max(np.sum(V ** 2, axis=1))
    np.testing.assert_allclose(incoherence(L, 4), (mu1, mu2), rtol=1e-9)


def test_incoherence_range_and_rank_error():
    mu1, mu2 = incoherence(gen_lowrank(40, 30, 3, seed=1), 3)
    assert 1 - 1e-12 <= mu1 <= 40 / 3 and 1 - 1e-12 <= mu2 <= 30 / 3
    with pytest.raises(RankError):
        incoherence(np.ones((5, 5)), 2)


def test_sparsity_examples():
    assert sparsity_level(np.zeros((3, 4))) == (0.0, 0.0)
    assert sparsity_level(np.ones((3, 4))) == (1.0, 1.0)
    S = np.zeros((4, 8))
    for i in range(4):
        S[i, 2 * i] = S[i, 2 * i + 1] = 1.0
    assert sparsity_level(S) == (0.25, 0.25)
    assert sparsity_level(np.array([[1e-13, 1.0]]), tol=1e-12) == (0.5, 1.0)


def test_beta_full_and_deficient():
    V = orthonormal_rows(np.random.default_rng(0), 3, 20).T
    assert beta_factor(V, None) == pytest.approx(1.0)
    assert beta_factor(V, np.arange(20)) == pytest.approx(1.0)
    assert math.isinf(beta_factor(V, [4, 4, 4, 4]))
    assert math.isinf(beta_factor(V, [1, 2]))


def test_beta_scale_invariant():
    L = gen_lowrank(50, 40, 3, 2.0, seed=2)
    J = [0, 5, 9, 13, 22, 31]
    b1 = diagnose(L, 3, col_indices=J).beta
    b2 = diagnose(-7.5 * L, 3, col_indices=J).beta
    assert b1 == pytest.approx(b2, rel=1e-10)


def test_relative_error_examples():
    L = gen_lowrank(10, 8, 2, seed=1)
    assert relative_error(L, L) == 0.0
    assert relative_error(L, np.zeros_like(L)) == pytest.approx(1.0)
    assert relative_error(L, 2 * L) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        relative_error(np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        relative_error(L, L[:, :3])


def test_verify_bounds_full_selection():
    L = gen_lowrank(60, 50, 4, 4.0, seed=3)
    checks = verify_bounds(L, L, None, 4)
    assert [c.name for c in checks] == ["mu1_inheritance", "mu2_beta_bound", "kappa_beta_bound",
                                        "column_norm_bound", "pinv_ratio_bound"]
    assert all(c.holds for c in checks)


@pytest.mark.parametrize("seed", range(10))
def test_verify_bounds_uniform_selection(seed):
    L = gen_lowrank(200, 300, 5, 3.0, seed=seed)
    size = sample_size(300, 5, max(incoherence(L, 5)), 1.06, "log_rn")
    J = np.sort(sample_uniform(300, size, "without_replacement", seed + 500))
    assert all(c.holds for c in verify_bounds(L, L[:, J], J, 5))


def test_verify_bounds_adversarial_selection():
    rng = np.random.default_rng(0)
    W = np.linalg.qr(rng.standard_normal((40, 2)))[0]
    V = np.linalg.qr(rng.standard_normal((30, 2)))[0]
    V[1] = V[0] + 1e-5 * rng.standard_normal(2)  # near duplicate
    V = np.linalg.qr(V)[0]
    L = W @ np.diag([2.0, 1.0]) @ V.T
    checks = verify_bounds(L, L[:, [0, 1]], [0, 1], 2)
    assert all(c.holds for c in checks)
    assert diagnose(L, 2, col_indices=[0, 1]).beta > 100


def test_verify_bounds_rank_mismatch():
    L = gen_lowrank(20, 20, 3, seed=1)
    with pytest.raises(RankError):
        verify_bounds(L, L[:, :2], [0, 1], 3)


def test_sparse_spectral_norm_bound():
    S = gen_sparse(150, 150, 0.04, seed=6)
    S = S + S.T  # symmetric, at most 2*alpha*n per row and column
    assert np.linalg.norm(S, 2) <= max(sparsity_level(S)) * 150 * np.abs(S).max()


def test_diagnose_report_and_dict():
    L = gen_lowrank(30, 20, 2, 2.0, seed=4)
    S = gen_sparse(30, 20, 0.1, seed=4)
    rep = diagnose(L, 2, S=S, L_hat=L, col_indices=[0, 1, 2], row_indices=[0, 0])
    assert isinstance(rep, DiagnosticsReport)
    assert rep.kappa == pytest.approx(2.0) and rep.rank_numeric == 2
    assert rep.rel_spectral_error == 0.0 and 0 <= rep.alpha <= 1
    d = rep.to_dict()
    assert d["beta_prime"] == "inf"
    assert set(d) >= {"mu1", "mu2", "alpha_row", "alpha_col", "alpha", "kappa", "rank_numeric",
                      "rel_spectral_error", "beta", "beta_prime"}


def test_condition_and_rank():
    assert condition_number(np.diag([4.0, 2.0, 0.0])) == pytest.approx(2.0)
    assert math.isinf(condition_number(np.diag([4.0, 0.0]), 2))
    assert numeric_rank(np.zeros((3, 3))) == 0


def test_predicted_success():
    p = predicted_success(1000, 5, 10.0, 0.5)
    expo = 10 * (0.5 + 0.5 * math.log(0.5))
    assert p == pytest.approx(1 - 5 / 1000 ** expo)
    assert predicted_success(10, 5, 0.01, 0.5) == 0.0


def test_foreground_and_f1():
    D = np.zeros((4, 3))
    D[1, 2] = 10.0
    D[0, 0] = 1.0
    mask = foreground_mask(D, np.zeros_like(D), 0.25)
    assert mask.sum() == 1 and mask[1, 2]
    assert not foreground_mask(D, D).any()
    truth = np.zeros((4, 3), dtype=bool)
    truth[1, 2] = truth[0, 0] = True
    assert support_f1(mask, truth) == pytest.approx(2 / 3)
    assert support_f1(truth, truth) == 1.0
    assert support_f1(np.zeros(3, bool), np.zeros(3, bool)) == 1.0
