"""Partition maps: coordinate-sum parts, cell realization, first-nonzero reduction."""

import numpy as np
import pytest

from sparsehalf.core import Halfspace, SparseVector, eval_halfspace, iter_sparse_vectors
from sparsehalf.realizations import (
    C2Part,
    C3Part,
    C3Residual,
    hypothesis_matrix,
    iter_part_c2,
    part_of_c2,
    part_of_c3,
    realize_c2,
    strip_first_nonzero,
)


def sv(n, *pairs):
    return SparseVector.from_pairs(n, pairs)


class TestPartOfC2:
    def test_examples(self):
        assert part_of_c2(sv(6, (1, 1), (2, -1))).r == 0
        assert part_of_c2(sv(6, (3, 1))).r == 1
        assert part_of_c2(sv(6, (1, -1), (4, -1))).r == -2
        assert part_of_c2(SparseVector(6, ())).r == 0

    def test_rejects_three_sparse(self):
        with pytest.raises(ValueError):
            part_of_c2(sv(6, (1, 1), (2, 1), (3, 1)))

    def test_partition_covers_exactly_once(self):
        n = 16
        seen = 0
        for x in iter_sparse_vectors(n, 2):
            part = part_of_c2(x)
            assert -2 <= part.r <= 2
            seen += 1
        # each part enumerates its own instances; together they tile C_{n,2}
        union = []
        for r in (-2, -1, 0, 1, 2):
            union.extend(x.entries for x in iter_part_c2(C2Part(r), n))
        assert len(union) == len(set(union)) == seen
        for r in (-2, -1, 0, 1, 2):
            for x in iter_part_c2(C2Part(r), n):
                assert part_of_c2(x).r == r


class TestRealizeC2:
    def test_difference_pair(self):
        cell = realize_c2(sv(8, (2, 1), (5, -1)))
        assert (cell.row, cell.col) == (2, 5)
        cell = realize_c2(sv(8, (2, -1), (5, 1)))
        assert (cell.row, cell.col) == (5, 2)

    def test_sum_pair_canonical(self):
        cell = realize_c2(sv(8, (1, 1), (3, 1)))
        assert (cell.row, cell.col) == (1, 3)
        assert cell.part == C2Part(2)

    def test_singleton_diagonal(self):
        cell = realize_c2(sv(8, (4, -1)))
        assert (cell.row, cell.col) == (4, 4)
        assert cell.part == C2Part(-1)

    def test_zero_vector(self):
        cell = realize_c2(SparseVector(8, ()))
        assert (cell.row, cell.col) == (1, 1)
        assert cell.part == C2Part(0)

    def test_injective_within_each_part(self):
        n = 12
        for r in (-2, -1, 0, 1, 2):
            cells = [(realize_c2(x).row, realize_c2(x).col) for x in iter_part_c2(C2Part(r), n)]
            assert len(cells) == len(set(cells))


class TestHypothesisMatrix:
    def test_soundness_random_halfspaces(self):
        rng = np.random.default_rng(0)
        n = 12
        for _ in range(25):
            h = Halfspace(rng.standard_normal(n), float(rng.standard_normal()))
            for r in (-2, -1, 0, 1, 2):
                W = hypothesis_matrix(h, C2Part(r), n)
                for x in iter_part_c2(C2Part(r), n):
                    cell = realize_c2(x)
                    assert W[cell.row - 1, cell.col - 1] == eval_halfspace(h, x)

    def test_diagonal_part_filler(self):
        h = Halfspace(np.arange(1.0, 5.0), 0.0)
        W = hypothesis_matrix(h, C2Part(1), 4)
        assert np.array_equal(np.diag(W), [1, 1, 1, 1])
        off = W[~np.eye(4, dtype=bool)]
        assert (off == 1).all()

    def test_difference_part_is_row_threshold_in_sorted_order(self):
        # with rows and columns ordered by descending weight, every row of the
        # realized matrix is -1s then +1s over its constrained cells
        rng = np.random.default_rng(1)
        n = 10
        for trial in range(20):
            w = rng.standard_normal(n)
            b = float(rng.standard_normal() * 0.3)
            h = Halfspace(w, b)
            order = np.lexsort((np.arange(n), -w))
            W = hypothesis_matrix(h, C2Part(0), n)[np.ix_(order, order)]
            constrained = ~np.eye(n, dtype=bool)
            constrained[0, 0] = False  # original (1,1) moved; recompute below
            Wp = hypothesis_matrix(h, C2Part(0), n)
            mask = ~np.eye(n, dtype=bool)
            mask[0, 0] = True  # the zero vector constrains original (1,1)
            maskp = mask[np.ix_(order, order)]
            for i in range(n):
                vals = W[i][maskp[i]]
                assert all(vals[j] <= vals[j + 1] for j in range(len(vals) - 1))

    def test_sum_parts_are_row_threshold_in_weight_order(self):
        # +2 instances read sign(w_i + w_j + b): ascending weights give -1s
        # then +1s; -2 instances read sign(-w_i - w_j + b), so descending
        rng = np.random.default_rng(2)
        n = 10
        for r in (2, -2):
            for trial in range(10):
                w = rng.standard_normal(n)
                h = Halfspace(w, float(rng.standard_normal() * 0.3))
                key = w if r == 2 else -w
                order = np.lexsort((np.arange(n), key))
                Wp = hypothesis_matrix(h, C2Part(r), n)
                mask = np.triu(np.ones((n, n), dtype=bool), 1)
                W = Wp[np.ix_(order, order)]
                maskp = mask[np.ix_(order, order)]
                for i in range(n):
                    vals = W[i][maskp[i]]
                    assert all(vals[j] <= vals[j + 1] for j in range(len(vals) - 1))


class TestStripFirstNonzero:
    def test_examples(self):
        i, b, rest = strip_first_nonzero(sv(6, (2, 1), (3, -1), (6, -1)))
        assert (i, b) == (2, 1)
        assert list(rest.to_dense()) == [0, 0, -1, 0, 0, -1]
        i, b, rest = strip_first_nonzero(sv(8, (7, 1)))
        assert (i, b) == (7, 1) and rest.nnz == 0
        i, b, rest = strip_first_nonzero(sv(4, (1, -1), (2, 1), (3, 1)))
        assert (i, b) == (1, -1)
        assert rest == sv(4, (2, 1), (3, 1))

    def test_rejects_zero_vector(self):
        with pytest.raises(ValueError):
            strip_first_nonzero(SparseVector(4, ()))


class TestPartOfC3:
    def test_examples(self):
        assert part_of_c3(sv(6, (2, 1), (3, -1), (6, -1))) == C3Part(2, 1)
        assert part_of_c3(sv(6, (6, 1))) == C3Residual()
        assert part_of_c3(SparseVector(6, ())) == C3Residual()

    def test_rejects_four_sparse(self):
        with pytest.raises(ValueError):
            part_of_c3(SparseVector(6, ((1, 1), (2, 1), (3, 1), (4, 1))))

    def test_partition_covers_exactly_once(self):
        n = 9
        for x in iter_sparse_vectors(n, 3):
            part = part_of_c3(x)
            if isinstance(part, C3Part):
                assert part.i <= n - 2
                assert x.entries[0] == (part.i, part.b)
            else:
                assert x.nnz == 0 or x.entries[0][0] > n - 2
                assert x.nnz <= 2  # residual instances are already 2-sparse

    def test_restriction_is_shifted_bias_problem(self):
        # on a first-nonzero part, h agrees with the stripped instance under
        # the bias shifted by w_i * b
        rng = np.random.default_rng(3)
        n = 10
        for _ in range(10):
            w = rng.standard_normal(n)
            b0 = float(rng.standard_normal())
            h = Halfspace(w, b0)
            for x in iter_sparse_vectors(n, 3):
                part = part_of_c3(x)
                if not isinstance(part, C3Part):
                    continue
                i, bval, rest = strip_first_nonzero(x)
                shifted = Halfspace(w, b0 + w[i - 1] * bval)
                assert eval_halfspace(h, x) == eval_halfspace(shifted, rest)
