import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from flashquant import (
    FlashChannelModel,
    Gaussian,
    GaussianTailsUniformCenter,
    InputDistribution,
    NumericalError,
    SearchConfig,
    TransitionMatrix,
    WordLineVoltages,
    build_transition_matrix,
    constant_ratio_thresholds,
    default_retention_params,
    gaussian_model,
    hard_thresholds,
    mutual_information,
    optimize_mmi,
    retention_model,
)
from oracles import gaussian_mi, grid_search_mmi_1d, mi_bits_oracle

# binary symmetric channel with crossover 0.1: 1 - H_b(0.1)
BSC_01_MI = 0.53100440641071884


@pytest.fixture(scope="module")
def surrogate_t6():
    return retention_model(default_retention_params(), 6.0)


def test_transition_matrix_shape_4x7(surrogate_t6):
    wl = WordLineVoltages([2.0, 2.3, 2.8, 3.0, 3.4, 3.7])
    T = build_transition_matrix(surrogate_t6, wl)
    assert T.probs.shape == (4, 7)
    np.testing.assert_allclose(T.probs.sum(axis=1), 1.0, atol=1e-12)


def test_transition_matrix_no_thresholds(surrogate_t6):
    T = build_transition_matrix(surrogate_t6, [])
    assert T.probs.shape == (4, 1)
    np.testing.assert_array_equal(T.probs, np.ones((4, 1)))


def test_transition_matrix_separated_levels_is_identity():
    m = gaussian_model([-10.0, 10.0], [1.0, 1.0])
    T = build_transition_matrix(m, [0.0])
    np.testing.assert_allclose(T.probs, np.eye(2), atol=1e-12)


def test_transition_matrix_rejects_unsorted(surrogate_t6):
    with pytest.raises(ValueError):
        build_transition_matrix(surrogate_t6, [2.0, 2.0, 3.0])


@settings(max_examples=1000, deadline=None)
@given(
    means=st.lists(st.floats(-3.0, 3.0), min_size=2, max_size=5, unique=True),
    sigmas_seed=st.integers(0, 2**31),
    thr_seed=st.integers(0, 2**31),
)
def test_rows_stochastic_property(means, sigmas_seed, thr_seed):
    means = sorted(means)
    assume(min(np.diff(means)) >= 1e-3)
    rng = np.random.default_rng(sigmas_seed)
    sigmas = rng.uniform(0.05, 1.5, len(means))
    model = gaussian_model(means, sigmas)
    rng2 = np.random.default_rng(thr_seed)
    thr = np.sort(rng2.uniform(-5.0, 5.0, rng2.integers(1, 8)))
    assume(np.min(np.diff(thr), initial=np.inf) > 0)
    T = build_transition_matrix(model, thr)
    assert np.all(np.abs(T.probs.sum(axis=1) - 1.0) <= 1e-12)
    assert np.all(T.probs >= 0.0)


def test_mi_noiseless_4ary():
    assert mutual_information(np.eye(4)) == pytest.approx(2.0, abs=1e-15)


def test_mi_useless_channel():
    T = np.tile([0.2, 0.3, 0.5], (4, 1))
    assert mutual_information(T) == pytest.approx(0.0, abs=1e-15)


def test_mi_bsc_closed_form_and_oracle():
    T = [[0.9, 0.1], [0.1, 0.9]]
    got = mutual_information(T)
    assert got == pytest.approx(BSC_01_MI, abs=1e-12)
    assert got == pytest.approx(mi_bits_oracle(T), abs=1e-13)


def test_mi_zero_log_zero_convention():
    T = [[1.0, 0.0], [0.0, 1.0]]
    assert mutual_information(T) == pytest.approx(1.0, abs=1e-15)


def test_mi_dimension_mismatch():
    with pytest.raises(ValueError):
        mutual_information(np.eye(3), InputDistribution([0.5, 0.5]))


def test_mi_nonuniform_input_matches_oracle():
    T = [[0.7, 0.2, 0.1], [0.1, 0.6, 0.3]]
    px = [0.3, 0.7]
    assert mutual_information(T, px) == pytest.approx(mi_bits_oracle(T, np.array(px)), abs=1e-13)


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_mi_partition_refinement_property(seed):
    rng = np.random.default_rng(seed)
    model = gaussian_model([0.0, 1.0, 2.0, 3.0], rng.uniform(0.2, 0.6, 4))
    thr = np.sort(rng.uniform(-1.0, 4.0, 3))
    if np.min(np.diff(thr)) <= 1e-9:
        return
    extra = rng.uniform(-1.0, 4.0)
    refined = np.sort(np.append(thr, extra))
    if np.min(np.diff(refined)) <= 1e-9:
        return
    mi_coarse = mutual_information(build_transition_matrix(model, thr))
    mi_fine = mutual_information(build_transition_matrix(model, refined))
    assert mi_fine >= mi_coarse - 1e-12
    assert 0.0 <= mi_coarse <= 2.0 + 1e-12


def test_mmi_two_equal_gaussians_midpoint():
    res = optimize_mmi(gaussian_model([0.0, 1.0], [0.3, 0.3]), 1)
    assert res.voltages.thresholds[0] == pytest.approx(0.5, abs=1e-4)
    assert res.converged


def test_mmi_matches_1d_grid_oracle():
    means, sigmas = [0.0, 1.0], [0.25, 0.45]
    res = optimize_mmi(gaussian_model(means, sigmas), 1)
    q_grid, mi_grid = grid_search_mmi_1d(means, sigmas, -2.0, 3.0, step=0.001)
    assert abs(res.voltages.thresholds[0] - q_grid) <= 0.01
    assert abs(res.mi_bits - mi_grid) <= 1e-4


def test_mmi_reported_mi_is_consistent(surrogate_t6):
    res = optimize_mmi(surrogate_t6, 6)
    rebuilt = mutual_information(build_transition_matrix(surrogate_t6, res.voltages))
    assert res.mi_bits == pytest.approx(rebuilt, abs=1e-12)
    assert np.all(np.diff(res.voltages.as_array()) > 0)


def test_mmi_deterministic_given_seed(surrogate_t6):
    a = optimize_mmi(surrogate_t6, 6, SearchConfig(seed=9))
    b = optimize_mmi(surrogate_t6, 6, SearchConfig(seed=9))
    assert a.voltages.thresholds == b.voltages.thresholds
    assert a.mi_bits == b.mi_bits


def test_mmi_dominates_constant_ratio_and_hard(surrogate_t6):
    res6 = optimize_mmi(surrogate_t6, 6)
    for r in (2.0, 3.0, 7.0, 15.0):
        wl = constant_ratio_thresholds(surrogate_t6, r, 6)
        mi_r = mutual_information(build_transition_matrix(surrogate_t6, wl))
        assert res6.mi_bits >= mi_r - 1e-9
    res3 = optimize_mmi(surrogate_t6, 3)
    mi_hard = mutual_information(build_transition_matrix(surrogate_t6, hard_thresholds(surrogate_t6)))
    assert res3.mi_bits >= mi_hard - 1e-9


def test_mmi_local_optimality_under_perturbation(surrogate_t6):
    cfg = SearchConfig(coord_tol=1e-7)
    res = optimize_mmi(surrogate_t6, 3, cfg)
    q = res.voltages.as_array()
    base = res.mi_bits
    for j in range(3):
        for sign in (-1.0, 1.0):
            trial = q.copy()
            trial[j] += sign * cfg.coord_tol
            mi = mutual_information(build_transition_matrix(surrogate_t6, trial))
            assert mi <= base + 1e-9


def test_mmi_bad_bracket():
    model = gaussian_model([0.0, 1.0], [0.3, 0.3])
    with pytest.raises(NumericalError):
        optimize_mmi(model, 1, SearchConfig(bracket=(2.0, 2.0)))
    with pytest.raises(ValueError):
        optimize_mmi(model, 0)


def test_constant_ratio_r1_is_crossings(surrogate_t6):
    wl = constant_ratio_thresholds(surrogate_t6, 1.0, 3)
    hard = hard_thresholds(surrogate_t6)
    np.testing.assert_allclose(wl.as_array(), hard.as_array(), atol=1e-9)
    means = surrogate_t6.level_means
    for i, q in enumerate(wl.thresholds):
        assert means[i] < q < means[i + 1]


@pytest.mark.parametrize("mu1,mu2,sigma,r", [
    (0.0, 1.0, 0.3, 2.0),
    (0.0, 1.0, 0.3, 15.0),
    (1.0, 2.6, 0.2, 7.0),
])
def test_constant_ratio_equal_sigma_closed_form(mu1, mu2, sigma, r):
    model = gaussian_model([mu1, mu2], [sigma, sigma])
    wl = constant_ratio_thresholds(model, r, 2)
    expect_minus = (mu1 + mu2) / 2 + sigma**2 * math.log(r) / (mu2 - mu1)
    expect_plus = (mu1 + mu2) / 2 - sigma**2 * math.log(r) / (mu2 - mu1)
    assert wl.thresholds[0] == pytest.approx(min(expect_minus, expect_plus), abs=1e-6)
    assert wl.thresholds[1] == pytest.approx(max(expect_minus, expect_plus), abs=1e-6)


def test_constant_ratio_residuals(surrogate_t6):
    from flashquant.quantize import _log_pdf

    for r in (2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 15.0):
        wl = constant_ratio_thresholds(surrogate_t6, r, 6)
        q = wl.as_array()
        for pair in range(3):
            lo, hi = q[2 * pair], q[2 * pair + 1]
            di, dj = surrogate_t6.levels[pair], surrogate_t6.levels[pair + 1]
            assert abs(_log_pdf(di, lo) - _log_pdf(dj, lo) - math.log(r)) <= 1e-6
            assert abs(_log_pdf(di, hi) - _log_pdf(dj, hi) + math.log(r)) <= 1e-6


def test_constant_ratio_validation(surrogate_t6):
    with pytest.raises(ValueError):
        constant_ratio_thresholds(surrogate_t6, 0.5, 6)
    with pytest.raises(ValueError):
        constant_ratio_thresholds(surrogate_t6, 2.0, 4)
    with pytest.raises(ValueError):
        constant_ratio_thresholds(surrogate_t6, 1.0, 6)  # degenerate pair request


def test_constant_ratio_no_solution():
    # nearly coincident levels: pdf ratio never reaches 15 between the means
    model = gaussian_model([0.0, 0.05], [1.0, 1.0])
    with pytest.raises(NumericalError):
        constant_ratio_thresholds(model, 15.0, 2)


def test_hard_thresholds_symmetric_crossing():
    model = gaussian_model([0.0, 1.0], [0.3, 0.3])
    assert hard_thresholds(model).thresholds[0] == pytest.approx(0.5, abs=1e-9)


def test_hard_thresholds_minimize_symbol_error_two_levels():
    model = gaussian_model([0.0, 1.0], [0.35, 0.35])
    q_hard = hard_thresholds(model).thresholds[0]
    grid = np.arange(-0.5, 1.5, 0.0005)
    # raw symbol error rate for threshold q, equal priors
    from scipy.stats import norm

    err = 0.5 * (1 - norm.cdf(grid, 0.0, 0.35)) + 0.5 * norm.cdf(grid, 1.0, 0.35)
    q_best = grid[int(np.argmin(err))]
    assert abs(q_hard - q_best) <= 1e-3


def test_gtuc_model_constant_ratio_and_mmi():
    model = FlashChannelModel([
        Gaussian(0.0, 0.30),
        GaussianTailsUniformCenter(1.0, 1.4, 0.12),
        GaussianTailsUniformCenter(2.0, 2.4, 0.12),
        Gaussian(3.2, 0.12),
    ])
    res = optimize_mmi(model, 6)
    assert np.all(np.diff(res.voltages.as_array()) > 0)
    wl = constant_ratio_thresholds(model, 4.0, 6)
    mi_r = mutual_information(build_transition_matrix(model, wl))
    assert res.mi_bits >= mi_r - 1e-9


def test_domain_type_validation():
    with pytest.raises(ValueError):
        WordLineVoltages([])
    with pytest.raises(ValueError):
        WordLineVoltages([1.0, 1.0])
    with pytest.raises(ValueError):
        WordLineVoltages([1.0, float("inf")])
    with pytest.raises(ValueError):
        TransitionMatrix([[0.5, 0.4], [0.5, 0.5]])  # row sum != 1
    with pytest.raises(ValueError):
        InputDistribution([0.5, 0.6])
    with pytest.raises(ValueError):
        InputDistribution([-0.1, 1.1])


def test_collapsed_thresholds_are_reseparated():
    from flashquant.quantize import _reseparate

    q = np.array([1.0, 1.0 + 1e-12, 1.0 + 2e-12, 2.0])
    assert _reseparate(q)
    assert np.all(np.diff(q) > 0)
    assert q[1] - q[0] == pytest.approx(1e-6)
    clean = np.array([1.0, 2.0, 3.0])
    assert not _reseparate(clean)


def test_nonconvergence_reported_not_silent(surrogate_t6):
    res = optimize_mmi(surrogate_t6, 6, SearchConfig(max_sweeps=1, multistarts=1))
    assert res.converged is False
    assert res.sweeps == 1
    assert np.all(np.diff(res.voltages.as_array()) > 0)  # output still well-formed


def test_matrix_txt_roundtrip(tmp_path, surrogate_t6):
    from flashquant.quantize import load_matrix_txt, save_matrix_txt

    T = build_transition_matrix(surrogate_t6, hard_thresholds(surrogate_t6))
    path = tmp_path / "t.txt"
    save_matrix_txt(T, path)
    T2 = load_matrix_txt(path)
    np.testing.assert_array_equal(T.probs, T2.probs)  # 17 digits reproduce doubles
