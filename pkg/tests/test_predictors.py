"""Predictor nodes and their line-based text serialization."""

import numpy as np
import pytest

from sparsehalf.core import BinaryAssignment, Example, Sample, sample_exact_sparse
from sparsehalf.errors import FormatError
from sparsehalf.learners import LearnerConfig, learn_h2, learn_h3, table_majority_learn
from sparsehalf.predictors import (
    BinaryHalfspacePredictor,
    CompositePredictor,
    MajorityTable,
    MatrixPredictor,
    parse_predictor,
    serialize_predictor,
)


def round_trip(node):
    text = serialize_predictor(node)
    back = parse_predictor(text)
    assert serialize_predictor(back) == text
    return back


class TestNodes:
    def test_binary_round_trip(self):
        node = BinaryHalfspacePredictor(BinaryAssignment((1, -1, 1)))
        back = round_trip(node)
        assert back.psi == node.psi

    def test_binary_prediction(self):
        from sparsehalf.core import SparseVector

        node = BinaryHalfspacePredictor(BinaryAssignment((1, 1, 1, 1, 1, 1)))
        inst = SparseVector.from_pairs(6, [(2, 1), (3, -1), (6, -1)])
        assert node.predict(inst) == -1

    def test_table_round_trip_with_zero_instance(self):
        from sparsehalf.core import SparseVector

        table = MajorityTable(4, 2, {(): 1, ((1, 1), (3, -1)): -1})
        back = round_trip(table)
        assert back.predict(SparseVector(4, ())) == 1
        assert back.predict(SparseVector.from_pairs(4, [(1, 1), (3, -1)])) == -1
        assert back.predict(SparseVector.from_pairs(4, [(2, 1)])) == 1

    def test_matrix_round_trip_exact_floats(self):
        rng = np.random.default_rng(0)
        node = MatrixPredictor(3, 4, rng.standard_normal((3, 4)), realization=0)
        back = round_trip(node)
        assert np.array_equal(back.scores, node.scores)
        assert back.realization == 0

    def test_matrix_part_mismatch_raises(self):
        from sparsehalf.core import SparseVector

        node = MatrixPredictor(3, 3, np.zeros((3, 3)), realization=0)
        with pytest.raises(ValueError):
            node.predict(SparseVector.from_pairs(3, [(1, 1), (2, 1)]))  # r=2 instance

    def test_trained_composites_round_trip(self):
        rng = np.random.default_rng(1)
        xs2 = [x for x in sample_exact_sparse(6, 2, 60, 2)]
        s2 = Sample(2, 6, tuple(Example(x, int(rng.integers(0, 2)) * 2 - 1) for x in xs2))
        xs3 = sample_exact_sparse(6, 3, 60, 3)
        s3 = Sample(3, 6, tuple(Example(x, int(rng.integers(0, 2)) * 2 - 1) for x in xs3))
        for node, sample in ((learn_h2(s2, LearnerConfig(seed=4)), s2), (learn_h3(s3, LearnerConfig(seed=4)), s3)):
            back = round_trip(node)
            assert all(back.predict(ex.x) == node.predict(ex.x) for ex in sample.items)

    def test_table_learner_round_trip(self):
        rng = np.random.default_rng(5)
        xs = sample_exact_sparse(5, 3, 30, 6)
        s = Sample(3, 5, tuple(Example(x, int(rng.integers(0, 2)) * 2 - 1) for x in xs))
        node = table_majority_learn(s)
        back = round_trip(node)
        assert all(back.predict(ex.x) == node.predict(ex.x) for ex in s.items)


class TestMalformed:
    @pytest.mark.parametrize(
        "text",
        [
            "",  # empty
            "binary 3\n+1 -1\n",  # wrong weight count
            "table 4 2 1\n1:+1 2\n",  # row missing arrow
            "matrix r=0 2 2\n0 0\n0\n",  # short row
            "composite c9 4 0\n",  # unknown router
            "composite c2 4 1\nnope r=0\nbinary 1\n+1\n",  # bad part line
            "binary 2\n+1 -1\nextra\n",  # trailing content
            "wat 1\n",  # unknown tag
        ],
    )
    def test_rejected(self, text):
        with pytest.raises(FormatError):
            parse_predictor(text)
