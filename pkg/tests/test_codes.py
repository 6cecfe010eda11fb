import numpy as np
import pytest
from scipy import sparse

from flashquant.errors import ConstructionError
from flashquant.ldpc import DegreeDistribution, LdpcCode, construct_peg_ace, load_alist, save_alist
from oracles import all_codewords

HAMMING_H = np.array([
    [1, 1, 0, 1, 1, 0, 0],
    [1, 0, 1, 1, 0, 1, 0],
    [0, 1, 1, 1, 0, 0, 1],
], dtype=np.uint8)

# systematic generator [I | P] with H = [P^T | I]
HAMMING_G = np.array([
    [1, 0, 0, 0, 1, 1, 0],
    [0, 1, 0, 0, 1, 0, 1],
    [0, 0, 1, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1],
], dtype=np.uint8)


@pytest.fixture(scope="module")
def hamming():
    return LdpcCode(HAMMING_H)


def test_all_zero_message(hamming):
    np.testing.assert_array_equal(hamming.encode(np.zeros(4, dtype=np.uint8)), np.zeros(7))


def test_encoder_matches_textbook_generator(hamming):
    mine = {tuple(c) for c in all_codewords(hamming.encode, 4)}
    textbook = set()
    for msg in range(16):
        bits = np.array([(msg >> i) & 1 for i in range(4)], dtype=np.uint8)
        textbook.add(tuple((bits @ HAMMING_G) % 2))
    assert mine == textbook
    assert len(mine) == 16


def test_codeword_linearity(hamming):
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.integers(0, 2, 4, dtype=np.uint8)
        b = rng.integers(0, 2, 4, dtype=np.uint8)
        cw = hamming.encode(a ^ b)
        np.testing.assert_array_equal(cw, hamming.encode(a) ^ hamming.encode(b))


def test_systematic_message_positions(hamming):
    rng = np.random.default_rng(1)
    msg = rng.integers(0, 2, 4, dtype=np.uint8)
    cw = hamming.encode(msg)
    np.testing.assert_array_equal(cw[hamming.message_cols], msg)
    assert not hamming.syndrome(cw).any()
    assert sorted(set(hamming.message_cols) | set(hamming.parity_cols)) == list(range(7))


def test_encode_validation(hamming):
    with pytest.raises(ValueError):
        hamming.encode(np.zeros(5, dtype=np.uint8))
    with pytest.raises(ValueError):
        hamming.encode(np.array([0, 1, 2, 0]))


def test_rank_deficient_rejected_on_encode():
    h = np.array([
        [1, 1, 0, 0, 1],
        [0, 0, 1, 1, 0],
        [1, 1, 1, 1, 1],  # sum of the first two
    ], dtype=np.uint8)
    code = LdpcCode(h)
    with pytest.raises(ConstructionError, match="rank"):
        code.encode(np.zeros(2, dtype=np.uint8))


def test_matrix_validation():
    with pytest.raises(ValueError):
        LdpcCode(np.array([[2, 1], [1, 0], [0, 1]]))  # shape m >= n
    dup = sparse.coo_matrix(
        (np.array([1, 1, 1], dtype=np.uint8), (np.array([0, 0, 0]), np.array([0, 0, 1]))),
        shape=(1, 3))
    with pytest.raises(ValueError, match="repeated"):
        LdpcCode(dup)


def test_alist_exact_format(tmp_path):
    h = np.array([
        [1, 1, 0],
        [0, 1, 1],
    ], dtype=np.uint8)
    path = tmp_path / "tiny.alist"
    save_alist(sparse.csr_matrix(h), path)
    assert path.read_text() == (
        "3 2\n"
        "2 2\n"
        "1 2 1\n"
        "2 2\n"
        "1 0\n"
        "1 2\n"
        "2 0\n"
        "1 2\n"
        "2 3\n"
    )


def test_alist_roundtrip(tmp_path):
    dd = DegreeDistribution({2: 0.75, 3: 0.25}, {5: 0.5, 4: 0.5}, 0.5)
    code = construct_peg_ace(dd, 128, 64, seed=3)
    path = tmp_path / "code.alist"
    save_alist(code, path)
    back = load_alist(path)
    assert (back.H != code.H).nnz == 0
    assert back.n == code.n and back.k == code.k
    # a second save is byte-identical
    path2 = tmp_path / "code2.alist"
    save_alist(back, path2)
    assert path.read_text() == path2.read_text()


def test_alist_rejects_corrupt(tmp_path):
    p = tmp_path / "bad.alist"
    p.write_text("3 2\n2 2\n1 2 1\n2 2\n1 0\n")
    with pytest.raises(ValueError):
        load_alist(p)
    p.write_text("3 2\n2 2\n1 2 9\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n")
    with pytest.raises(ValueError):
        load_alist(p)
