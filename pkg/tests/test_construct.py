import numpy as np
import pytest
from scipy import sparse

from flashquant.errors import ConstructionError
from flashquant.ldpc import (
    DegreeDistribution,
    construct_peg_ace,
    default_ace_depth,
    load_preset,
    save_alist,
    tanner_girth,
)
from flashquant.ldpc.construct import assign_column_degrees
from flashquant.ldpc.gf2 import rank as gf2_rank
from oracles import enumerate_min_ace

REG36 = DegreeDistribution({3: 1.0}, {6: 1.0}, 0.5)


def test_small_regular_infeasible_by_counting_bound():
    # 16 degree-3 columns need 48 distinct check pairs; 8 checks only have 28.
    with pytest.raises(ConstructionError, match="check pairs"):
        construct_peg_ace(REG36, 16, 8, seed=0)


def test_small_regular_girth6():
    code = construct_peg_ace(REG36, 32, 16, seed=0)
    assert code.H.shape == (16, 32)
    assert np.all(code.column_degrees() == 3)
    assert code.meta["girth"] >= 6
    assert gf2_rank(code.H.toarray()) == 16


def test_column_degrees_realize_distribution_within_rounding():
    dd = load_preset("code2_quantization_adjusted")
    n = 2048
    degs = assign_column_degrees(dd, n)
    assert degs.size == n
    for d, f in dd.variable_node_fractions.items():
        count = int((degs == d).sum())
        assert abs(count - f * n) < 1.0


@pytest.mark.parametrize("preset", ["code1_awgn_maxdeg19", "code2_quantization_adjusted",
                                    "code3_awgn_maxdeg24"])
def test_presets_construct_at_desk_scale(preset):
    code = construct_peg_ace(load_preset(preset), 2048, 1848, seed=1)
    assert code.meta["girth"] >= 6
    assert code.n == 2048 and code.k == 1848
    assert gf2_rank(code.H.toarray()) == 200
    assert code.column_degrees().min() >= 2
    gram = (code.H.astype(np.int64) @ code.H.T.astype(np.int64)).toarray()
    np.fill_diagonal(gram, 0)
    assert gram.max() <= 1  # no two checks share two variables: no 4-cycles


def test_determinism_and_seed_variation(tmp_path):
    dd = DegreeDistribution({2: 0.75, 3: 0.25}, {5: 0.5, 4: 0.5}, 0.5)
    a = construct_peg_ace(dd, 128, 64, seed=5)
    b = construct_peg_ace(dd, 128, 64, seed=5)
    c = construct_peg_ace(dd, 128, 64, seed=6)
    pa, pb = tmp_path / "a.alist", tmp_path / "b.alist"
    save_alist(a, pa)
    save_alist(b, pb)
    assert pa.read_text() == pb.read_text()
    assert (a.H != c.H).nnz > 0


def test_ace_screen_enforces_floor_and_control_violates():
    dd = DegreeDistribution({2: 0.75, 3: 0.25}, {5: 0.5, 4: 0.5}, 0.5)
    screened = construct_peg_ace(dd, 64, 32, ace_depth=3, ace_eta=2, seed=5)
    exact = enumerate_min_ace(screened.H, 6)
    assert exact >= 2
    assert screened.meta["min_detected_ace"] >= 2
    # same settings without the screen leave a low-ACE short cycle behind
    control = construct_peg_ace(dd, 64, 32, ace_depth=2, ace_eta=0, seed=5)
    assert enumerate_min_ace(control.H, 6) < 2


def test_ace_walk_screen_never_overestimates():
    dd = DegreeDistribution({2: 0.5, 3: 0.5}, {5: 1.0}, 0.5)
    code = construct_peg_ace(dd, 48, 24, ace_depth=4, ace_eta=1, seed=2)
    exact = enumerate_min_ace(code.H, 8)
    assert exact >= 1
    assert code.meta["min_detected_ace"] <= exact + 1e-12


def test_all_even_degrees_rejected():
    dd = DegreeDistribution({2: 0.5, 4: 0.5}, {6: 1.0}, 0.5)
    with pytest.raises(ConstructionError, match="even"):
        construct_peg_ace(dd, 64, 32, seed=0)


def test_default_ace_depth_scaling():
    assert default_ace_depth(9118) == 10
    assert default_ace_depth(2048) == 2
    assert default_ace_depth(16) == 2


def test_full_scale_parameters_accepted():
    # the n=9118, k=8225 operating scale must pass every feasibility gate
    dd = load_preset("code2_quantization_adjusted")
    n, k = 9118, 8225
    degs = assign_column_degrees(dd, n)
    assert degs.size == n
    m = n - k
    demand = int(sum(d * (d - 1) // 2 for d in degs))
    assert demand <= m * (m - 1) // 2
    assert default_ace_depth(n) == 10


def test_construction_failure_reports_column():
    # ten degree-24 nodes on 200 checks pass the pair precheck, but the ninth
    # node provably starves (8 fresh checks + at most 8 single-share checks < 24)
    dd = DegreeDistribution(
        {2: 0.085, 3: 0.81, 6: 0.10, 24: 0.005}, {33: 0.088, 34: 0.912}, 0.9021)
    with pytest.raises(ConstructionError, match="column"):
        construct_peg_ace(dd, 2048, 1848, seed=0, max_attempts=2)


def test_parameter_validation():
    with pytest.raises(ValueError):
        construct_peg_ace(REG36, 32, 32, seed=0)
    with pytest.raises(ValueError):
        construct_peg_ace(REG36, 32, 16, ace_depth=1, seed=0)
    with pytest.raises(ConstructionError, match="exceeds"):
        construct_peg_ace(DegreeDistribution({24: 1.0}, {48: 1.0}, 0.5), 12, 6, seed=0)


def test_girth_helper_detects_4cycles():
    h = sparse.csr_matrix(np.array([
        [1, 1, 0, 0],
        [1, 1, 1, 0],
        [0, 0, 1, 1],
    ], dtype=np.uint8))
    assert tanner_girth(h) == 4
    tree = sparse.csr_matrix(np.array([
        [1, 1, 0, 0],
        [0, 1, 1, 0],
        [0, 0, 1, 1],
    ], dtype=np.uint8))
    assert tanner_girth(tree) == 0  # forest
