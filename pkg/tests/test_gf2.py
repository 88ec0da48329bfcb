import numpy as np
import pytest

from conftest import SEEDS, cycle_graph, dense_rank
from hgpdecode.gf2 import Gf2Matrix, RowSpan, gf2_rank


def test_rank_identity_and_zero():
    assert gf2_rank(Gf2Matrix.from_dense(np.eye(3, dtype=np.uint8))) == 3
    assert gf2_rank(Gf2Matrix.from_dense(np.zeros((4, 5), dtype=np.uint8))) == 0
    assert gf2_rank(np.zeros((0, 3), dtype=np.uint8)) == 0


@pytest.mark.parametrize("L", [3, 4, 5, 8, 13])
def test_cycle_code_has_one_redundancy(L):
    assert gf2_rank(cycle_graph(L).parity_check()) == L - 1


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("shape", [(5, 9), (30, 17), (70, 130)])
def test_rank_matches_dense_elimination(seed, shape):
    rng = np.random.default_rng(seed)
    dense = (rng.random(shape) < 0.3).astype(np.uint8)
    # duplicate a row sum so the matrix is rank deficient more often
    dense[-1] ^= dense[0] ^ dense[1]
    assert gf2_rank(Gf2Matrix.from_dense(dense)) == dense_rank(dense)


@pytest.mark.parametrize("seed", SEEDS)
def test_rowspan_membership(seed):
    rng = np.random.default_rng(seed)
    dense = (rng.random((12, 80)) < 0.2).astype(np.uint8)
    span = RowSpan(Gf2Matrix.from_dense(dense))
    combo = (rng.random(12) < 0.5).astype(np.uint8)
    member = (combo @ dense) % 2
    assert span.contains(member)
    for _ in range(20):
        v = (rng.random(80) < 0.1).astype(np.uint8)
        expected = dense_rank(dense) == dense_rank(np.vstack([dense, v]))
        assert span.contains(v) == expected


def test_matrix_validation():
    with pytest.raises(ValueError):
        Gf2Matrix(1, 3, ((2, 1),))
    with pytest.raises(ValueError):
        Gf2Matrix(1, 3, ((0, 3),))
    with pytest.raises(ValueError):
        Gf2Matrix(1, 3, ((1, 1),))


def test_dense_roundtrip_and_transpose():
    rng = np.random.default_rng(7)
    dense = (rng.random((6, 11)) < 0.4).astype(np.uint8)
    m = Gf2Matrix.from_dense(dense)
    assert np.array_equal(m.to_dense(), dense)
    assert np.array_equal(m.transpose().to_dense(), dense.T)
    v = (rng.random(11) < 0.5).astype(np.uint8)
    assert np.array_equal(m.mul_vec(v), (dense @ v) % 2)
