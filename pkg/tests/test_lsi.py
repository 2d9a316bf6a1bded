"""Similarity matrix, completion step, fixpoint iteration, %PS."""

import numpy as np
import pytest

from lsikit.lsi import (
    CompletionTrace,
    complete,
    completion_step,
    perfect_pair_percentage,
    word_similarity,
)
from lsikit.matrix import SparseMatrix, frobenius_norm

from conftest import POLYSEMY, SYNONYMY


from oracle_utils import chain_oracle as _chain_oracle
from oracle_utils import cosine_rows_oracle as _cosine_rows_oracle


# ---------------------------------------------------------------------------
# word_similarity


def test_similarity_money_bank_pair():
    s = word_similarity(SparseMatrix.from_dense(POLYSEMY))
    # money = [1,0,1,0,0,0] vs bank = all ones: 2 / sqrt(2 * 6)
    assert s.matrix[0, 3] == pytest.approx(2.0 / np.sqrt(12.0), rel=1e-12)
    assert s.matrix[3, 0] == s.matrix[0, 3]


def test_similarity_identical_rows_is_one():
    a = np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 3.0]])
    s = word_similarity(a)
    assert s.matrix[0, 1] == pytest.approx(1.0, abs=1e-15)


def test_similarity_disjoint_rows_unstored():
    a = np.array([[1.0, 0.0], [0.0, 2.0]])
    s = word_similarity(a)
    assert s.nnz == 0


def test_similarity_matches_oracle():
    rng = np.random.default_rng(0)
    a = np.where(rng.random((6, 5)) > 0.4, rng.random((6, 5)), 0.0)
    s = word_similarity(a).matrix.toarray()
    np.testing.assert_allclose(s, _cosine_rows_oracle(a), atol=1e-12)


def test_similarity_zero_row_flagged_not_fatal():
    a = np.array([[1.0, 1.0], [0.0, 0.0], [1.0, 0.0]])
    with pytest.warns(UserWarning, match="zero rows"):
        s = word_similarity(a)
    assert s.zero_rows == (1,)
    assert np.all(s.matrix.toarray()[1] == 0)


def test_similarity_rejects_negative_input():
    with pytest.raises(ValueError, match="nonnegative"):
        word_similarity(np.array([[1.0, -1.0]]))


# ---------------------------------------------------------------------------
# completion_step


def test_step_no_similarity_is_identity():
    a = np.array([[1.0, 0.0], [0.0, 2.0]])  # disjoint rows, S = 0
    s = word_similarity(a)
    np.testing.assert_array_equal(completion_step(a, s), a)


def test_step_polysemy_single_iteration_published_entries():
    s = word_similarity(POLYSEMY)
    one = completion_step(POLYSEMY, s)
    assert one[0, 1] == pytest.approx(0.58, abs=0.005)  # money, Doc2
    assert one[1, 0] == pytest.approx(0.71, abs=0.005)  # bed, Doc1


def test_step_parallel_rows_merge_supports():
    # rows 0 and 1 are scalar multiples with exactly representable unit
    # vectors (3-4-5 shape), so their cosine is exactly 1; row 2 disjoint
    a = np.array([[3.0, 0.0, 4.0], [6.0, 0.0, 8.0], [0.0, 5.0, 0.0]])
    s = word_similarity(a)
    assert s.matrix[0, 1] == 1.0
    out = completion_step(a, s)
    np.testing.assert_array_equal(out[0], np.maximum(a[0], a[1]))
    np.testing.assert_array_equal(out[1], np.maximum(a[0], a[1]))


def test_step_dominates_input_and_uses_snapshot():
    rng = np.random.default_rng(1)
    a = np.where(rng.random((5, 4)) > 0.5, rng.random((5, 4)), 0.0)
    a[:, 0] += 0.5  # no zero rows
    s = word_similarity(a)
    out = completion_step(a, s)
    assert np.all(out >= a)
    np.testing.assert_allclose(out, _chain_oracle(a, 1), rtol=1e-12, atol=1e-12)


def test_step_shape_mismatch_rejected():
    s = word_similarity(np.eye(3))
    with pytest.raises(ValueError, match="rows"):
        completion_step(np.eye(4), s)


# ---------------------------------------------------------------------------
# complete


def test_complete_synonymy_matches_chain_oracle():
    completed, trace = complete(SparseMatrix.from_dense(SYNONYMY))
    assert trace.converged
    oracle = _chain_oracle(SYNONYMY, trace.conviter)
    np.testing.assert_allclose(completed, oracle, rtol=1e-10)
    # spot values at full precision, derived from the chain oracle
    assert completed[0, 1] == pytest.approx(4.29325, abs=1e-4)   # mark, Doc2
    assert completed[2, 0] == pytest.approx(5.36656, abs=1e-4)   # samuel, Doc1
    assert completed[5, 3] == pytest.approx(17.88854, abs=1e-4)  # colour, Doc4


def test_complete_polysemy_bank_row_exact_ones():
    completed, trace = complete(SparseMatrix.from_dense(POLYSEMY))
    assert trace.converged
    assert trace.conviter == 2
    np.testing.assert_array_equal(completed[3], np.ones(6))
    oracle = _chain_oracle(POLYSEMY, trace.conviter)
    np.testing.assert_allclose(completed, oracle, rtol=1e-10)


def test_complete_orthogonal_rows_fixpoint_is_input():
    a = np.diag([1.0, 2.0, 3.0])
    completed, trace = complete(a)
    np.testing.assert_array_equal(completed, a)
    assert trace.conviter == 1
    assert trace.converged


def test_complete_trace_shape_and_monotone_norms():
    completed, trace = complete(SYNONYMY, maxiter=50, stable_window=3)
    assert trace.converged
    assert trace.conviter <= 50
    assert trace.norms[0] == pytest.approx(frobenius_norm(SYNONYMY), rel=1e-15)
    assert np.all(np.diff(trace.norms) >= 0)
    # final norm corresponds to the returned matrix
    assert trace.norms[-1] == pytest.approx(frobenius_norm(completed), rel=1e-15)


def test_complete_fixpoint_idempotent_bitwise():
    completed, _ = complete(SYNONYMY)
    again = completion_step(completed, word_similarity(SYNONYMY))
    np.testing.assert_array_equal(again, completed)


def test_complete_maxiter_exhaustion_reports_not_converged():
    _, trace = complete(POLYSEMY, maxiter=2, stable_window=3)
    assert not trace.converged
    assert trace.conviter <= 2


def test_complete_norm_collision_does_not_stop_early():
    # one huge entry makes the Frobenius norm blind to a real update:
    # norm-based stopping would declare convergence after one step,
    # entrywise comparison must keep going to the true fixpoint.
    a = np.array([[1e9, 0.0], [1e9, 2.0]])
    completed, trace = complete(a)
    assert trace.norms[1] == trace.norms[0]          # the collision
    assert not np.array_equal(completed, a)          # but the matrix moved
    assert completed[0, 1] > 0
    again = completion_step(completed, word_similarity(a))
    np.testing.assert_array_equal(again, completed)  # true fixpoint reached
    assert trace.converged


def test_complete_chain_acquires_weight_after_two_iterations():
    # three words where 1 and 3 share nothing, both overlap word 2
    a = np.array(
        [
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 5.0],
        ]
    )
    s = word_similarity(a)
    s12 = s.matrix[0, 1]
    s23 = s.matrix[1, 2]
    assert s.matrix[0, 2] == 0.0
    step1 = completion_step(a, s)
    assert step1[0, 2] == 0.0                      # nothing reaches word 1 yet
    step2 = completion_step(step1, s)
    assert step2[0, 2] == pytest.approx(s12 * s23 * 5.0, rel=1e-12)


def test_complete_validates_arguments():
    with pytest.raises(ValueError, match="maxiter"):
        complete(np.eye(2), maxiter=0)
    with pytest.raises(ValueError, match="stable_window"):
        complete(np.eye(2), stable_window=0)
    with pytest.raises(ValueError, match="nonnegative"):
        complete(np.array([[-1.0]]))


def test_trace_rejects_decreasing_norms():
    with pytest.raises(ValueError, match="non-decreasing"):
        CompletionTrace((2.0, 1.0), 1, True, 0.0)


# ---------------------------------------------------------------------------
# perfect_pair_percentage


def test_ps_orthogonal_rows_zero():
    assert perfect_pair_percentage(word_similarity(np.eye(4))) == 0.0


def test_ps_one_perfect_pair_of_three():
    a = np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 3.0, 0.0]])
    ps = perfect_pair_percentage(word_similarity(a))
    assert ps == pytest.approx(100.0 / 3.0, rel=1e-12)


def test_ps_single_row_is_zero():
    assert perfect_pair_percentage(word_similarity(np.array([[1.0, 2.0]]))) == 0.0
