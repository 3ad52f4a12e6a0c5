import itertools

import numpy as np
from django.test import SimpleTestCase

from depth_hfr.exceptions import (
    AlignmentError,
    ContractError,
    DegenerateScoresError,
    InvalidInputError,
    ShapeError,
    UndefinedScoreError,
)
from matching.scores import NORMALIZATIONS, cosine_matrix, cosine_score, fuse, normalize_scores
from matching.types import Modality, ScoreMatrix


def matrix(values, modality="2D", normalized=False, probe_ids=None, gallery_ids=None):
    values = np.asarray(values, dtype=np.float64)
    return ScoreMatrix(
        values,
        probe_ids if probe_ids is not None else range(values.shape[0]),
        gallery_ids if gallery_ids is not None else range(values.shape[1]),
        modality,
        normalized,
    )


class CosineTests(SimpleTestCase):
    def test_known_angles(self):
        self.assertAlmostEqual(cosine_score([1, 2, 3], [2, 4, 6]), 1.0)
        self.assertAlmostEqual(cosine_score([1, 0], [-3, 0]), -1.0)
        self.assertAlmostEqual(cosine_score([1, 0], [0, 5]), 0.0)
        self.assertAlmostEqual(cosine_score([1, 1], [1, 0]), 1 / np.sqrt(2))

    def test_zero_vector(self):
        with self.assertRaises(UndefinedScoreError):
            cosine_score([0, 0], [1, 0])

    def test_length_mismatch(self):
        with self.assertRaises(ShapeError):
            cosine_score([1, 0], [1, 0, 0])

    def test_matrix_matches_pairwise_scores(self):
        rng = np.random.default_rng(0)
        probe, gallery = rng.normal(size=(5, 4)), rng.normal(size=(3, 4))
        scores = cosine_matrix(probe, gallery, range(5), range(3), "2.5D")
        self.assertEqual(scores.modality, Modality.DEPTH)
        for i in range(5):
            for j in range(3):
                self.assertAlmostEqual(scores.values[i, j], cosine_score(probe[i], gallery[j]), places=12)

    def test_worker_count_does_not_change_scores(self):
        rng = np.random.default_rng(1)
        probe, gallery = rng.normal(size=(7, 6)), rng.normal(size=(4, 6))
        serial = cosine_matrix(probe, gallery, range(7), range(4), "2D")
        parallel = cosine_matrix(probe, gallery, range(7), range(4), "2D", workers=4, rows_per_task=2)
        np.testing.assert_array_equal(serial.values, parallel.values)

    def test_zero_row_in_matrix(self):
        with self.assertRaises(UndefinedScoreError):
            cosine_matrix(np.array([[0.0, 0.0]]), np.eye(2), [0], [0, 1], "2D")


class ScoreMatrixTests(SimpleTestCase):
    def test_shape_must_match_ids(self):
        with self.assertRaises(ShapeError):
            ScoreMatrix(np.zeros((2, 2)), [0], [0, 1], "2D")

    def test_scores_must_be_finite(self):
        with self.assertRaises(InvalidInputError):
            matrix([[np.nan, 0.0]])

    def test_normalized_range(self):
        with self.assertRaises(InvalidInputError):
            matrix([[1.5, 0.0]], normalized=True)


class NormalizeTests(SimpleTestCase):
    def test_minmax(self):
        normalized = normalize_scores(matrix([[1.0, 2.0], [3.0, 5.0]]))
        np.testing.assert_allclose(normalized.values, [[0.0, 0.25], [0.5, 1.0]])
        self.assertTrue(normalized.normalized)

    def test_zscore_spans_unit_interval(self):
        normalized = normalize_scores(matrix([[1.0, 2.0, 4.0], [0.0, 9.0, 3.0]]), "zscore")
        self.assertEqual(normalized.values.min(), 0.0)
        self.assertEqual(normalized.values.max(), 1.0)

    def test_zscore_removes_row_offsets(self):
        base = np.array([[0.1, 0.5, 0.9]])
        shifted = matrix(np.vstack([base, base + 10.0]))
        normalized = normalize_scores(shifted, "zscore")
        np.testing.assert_allclose(normalized.values[0], normalized.values[1])

    def test_row_argmax_is_preserved(self):
        rng = np.random.default_rng(23)
        for _ in range(150):
            shape = tuple(int(n) for n in rng.integers(2, 9, size=2))
            values = rng.integers(-20, 21, size=shape).astype(np.float64)
            if (values.max(axis=1) == values.min(axis=1)).all():
                continue
            for method in NORMALIZATIONS:
                normalized = normalize_scores(matrix(values), method)
                np.testing.assert_array_equal(
                    np.argmax(normalized.values, axis=1), np.argmax(values, axis=1)
                )

    def test_constant_matrix(self):
        with self.assertRaises(DegenerateScoresError):
            normalize_scores(matrix([[0.3, 0.3], [0.3, 0.3]]))

    def test_normalizing_twice(self):
        with self.assertRaises(ContractError):
            normalize_scores(normalize_scores(matrix([[0.0, 1.0]])))

    def test_unknown_method(self):
        with self.assertRaises(InvalidInputError):
            normalize_scores(matrix([[0.0, 1.0]]), "tanh")


class FuseTests(SimpleTestCase):
    def test_sum_rule(self):
        color = matrix([[0.0, 1.0]], "2D", normalized=True)
        depth = matrix([[0.5, 0.25]], "2.5D", normalized=True)
        fused = fuse([color, depth])
        np.testing.assert_allclose(fused.values, [[0.5, 1.25]])
        self.assertEqual(fused.modality, Modality.FUSION)
        self.assertFalse(fused.normalized)

    def test_matches_elementwise_sum(self):
        rng = np.random.default_rng(29)
        for _ in range(150):
            rows, columns = (int(n) for n in rng.integers(1, 7, size=2))
            channels = [
                matrix(rng.random((rows, columns)), modality, normalized=True)
                for modality in ("2D", "2.5D", "2D/2.5D")[: int(rng.integers(1, 4))]
            ]
            expected = [[0.0] * columns for _ in range(rows)]
            for channel in channels:
                for i in range(rows):
                    for j in range(columns):
                        expected[i][j] += channel.values[i, j]
            np.testing.assert_array_equal(fuse(channels).values, expected)

    def test_order_and_grouping_do_not_matter(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            shape = tuple(int(n) for n in rng.integers(1, 7, size=2))
            # multiples of 1/64 add without rounding
            a, b, c = (rng.integers(0, 65, size=shape) / 64.0 for _ in range(3))
            channels = [
                matrix(a, "2D", normalized=True),
                matrix(b, "2.5D", normalized=True),
                matrix(c, "2D/2.5D", normalized=True),
            ]
            fused = fuse(channels).values
            for order in itertools.permutations(channels):
                np.testing.assert_array_equal(fuse(list(order)).values, fused)
            np.testing.assert_array_equal(fused, (a + b) + c)
            np.testing.assert_array_equal(fused, a + (b + c))

    def test_needs_normalized_inputs(self):
        with self.assertRaises(ContractError):
            fuse([matrix([[0.0, 1.0]], normalized=True), matrix([[0.0, 1.0]], "2.5D")])

    def test_ids_must_agree(self):
        with self.assertRaises(AlignmentError):
            fuse(
                [
                    matrix([[0.0, 1.0]], normalized=True, gallery_ids=[1, 2]),
                    matrix([[0.0, 1.0]], "2.5D", normalized=True, gallery_ids=[2, 1]),
                ]
            )

    def test_nothing_to_fuse(self):
        with self.assertRaises(ContractError):
            fuse([])
