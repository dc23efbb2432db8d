from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kundtkit import jet as J
from kundtkit.classify import _pairings, _random_type_ii, metric_from_frame
from kundtkit.errors import ShapeError, VarianceError
from kundtkit.frame import constant_frame
from kundtkit.tensor import (
    NEG_INFINITY,
    TensorValue,
    block_contraction,
    boost_decompose,
    boost_order,
    determinant,
    frame_components,
    from_frame_components,
    full_contraction,
    matrix_inverse,
)

STD = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]  # rows k, l, m1, m2 in (u, v, x1, x2)


def std_frame(mode=J.RATIONAL):
    return constant_frame((0, 0, 0, 0), STD, mode)


def invertible(seed: int):
    rng = np.random.default_rng(seed)
    while True:
        M = rng.integers(-3, 4, size=(4, 4))
        if round(np.linalg.det(M)) != 0:
            return M


@given(st.integers(0, 10**6))
def test_exact_inverse(seed):
    M = np.array(invertible(seed).tolist(), dtype=object)
    Mq = np.vectorize(J.to_rational, otypes=[object])(M)
    inv = matrix_inverse(Mq)
    assert np.array_equal(np.dot(Mq, inv), np.vectorize(J.to_rational, otypes=[object])(np.eye(4, dtype=int)))
    assert determinant(Mq) == round(np.linalg.det(invertible(seed)))


def test_boost_order_of_basic_tensors():
    fr = std_frame()
    kflat = np.zeros(4, dtype=object)  # k_a = g_ab k^b with g = 2 du dv + ...: k^b = d_v so k_a = du
    kflat[:] = [J.to_rational(1), 0, 0, 0]
    kk = TensorValue(np.multiply.outer(kflat, kflat)[..., None], "dd", 4)
    # du(e_A): du(k) = 0, du(l) = 1, so du du has only the (l, l) component: weight -2
    assert boost_order(kk, fr) == -2
    g = TensorValue(metric_from_frame(fr)[..., None], "dd", 4)
    assert boost_order(g, fr) == 0
    zero = TensorValue(J.zeros((4, 4, 1), J.RATIONAL), "dd", 4)
    assert boost_order(zero, fr) == NEG_INFINITY


@given(st.integers(0, 10**6), st.sampled_from([2, 4]))
def test_frame_components_round_trip_and_blocks_sum(seed, rank):
    rng = np.random.default_rng(seed)
    fr = constant_frame((0, 0, 0, 0), invertible(seed).tolist(), J.RATIONAL)
    comp = _random_type_ii(rng, rank, 4, J.RATIONAL)
    T = TensorValue(from_frame_components(comp, fr)[..., None], "d" * rank, 4)
    assert np.array_equal(frame_components(T, fr), comp)
    dec = boost_decompose(T, fr)
    assert np.array_equal(dec.reassemble(), T.values)
    assert dec.order() <= 0


@given(st.integers(0, 10**6), st.sampled_from([2, 4]))
def test_weight_zero_block_carries_the_trace(seed, rank):
    rng = np.random.default_rng(seed)
    fr = constant_frame((0, 0, 0, 0), invertible(seed).tolist(), J.RATIONAL)
    ginv = TensorValue(matrix_inverse(metric_from_frame(fr))[..., None], "uu", 4)
    T = TensorValue(from_frame_components(_random_type_ii(rng, rank, 4, J.RATIONAL), fr)[..., None], "d" * rank, 4)
    for pairs in _pairings(rank):
        assert full_contraction(T, pairs, ginv) == block_contraction(T, fr, pairs, ginv)


def test_shape_and_variance_errors():
    with pytest.raises(ShapeError):
        TensorValue(np.zeros((4, 3, 1)), "dd", 4)
    with pytest.raises(VarianceError):
        TensorValue(np.zeros((4, 4, 1)), "dx", 4)
    g = TensorValue(np.eye(4)[..., None], "dd", 4)
    with pytest.raises(ShapeError):
        full_contraction(g, [(0, 0)], g)
    with pytest.raises(VarianceError):
        boost_order(TensorValue(np.eye(4)[..., None], "ud", 4), std_frame(J.FLOAT))
