import numpy as np
from django.test import SimpleTestCase

from depth_hfr.exceptions import InvalidInputError, UnfillableError
from range_pipeline.holes import face_region_from_landmarks, fill_holes
from range_pipeline.tests.factories import face_landmarks
from range_pipeline.types import RangeImage


def raster_sweep_fill(values, mask, region):
    """Neighbour means recomputed pixel by pixel, reading the previous sweep only.

    None when the region has no observation or a hole can never be reached.
    """
    if not (mask & region).any():
        return None
    values, mask = values.copy(), mask.copy()
    height, width = values.shape
    while (region & ~mask).any():
        new_values, new_mask = values.copy(), mask.copy()
        for row in range(height):
            for col in range(width):
                if not region[row, col] or mask[row, col]:
                    continue
                neighbours = [
                    values[r, c]
                    for r in range(max(row - 1, 0), min(row + 2, height))
                    for c in range(max(col - 1, 0), min(col + 2, width))
                    if (r, c) != (row, col) and mask[r, c]
                ]
                if neighbours:
                    new_values[row, col] = sum(neighbours) / len(neighbours)
                    new_mask[row, col] = True
        if (new_mask == mask).all():
            return None
        values, mask = new_values, new_mask
    return values, mask


class FillHolesTests(SimpleTestCase):
    def test_fully_observed_image_unchanged(self):
        img = RangeImage(np.random.default_rng(0).uniform(size=(6, 6)), np.ones((6, 6), bool))
        self.assertTrue(fill_holes(img, np.ones((6, 6), bool)).equals(img))

    def test_constant_neighbourhood(self):
        mask = np.ones((3, 3), bool)
        mask[1, 1] = False
        img = RangeImage(np.where(mask, 0.5, 0.0), mask)
        filled = fill_holes(img, np.ones((3, 3), bool))
        self.assertEqual(filled.values[1, 1], 0.5)
        self.assertTrue(filled.mask.all())

    def test_diagonal_neighbour_counts(self):
        mask = np.zeros((3, 3), bool)
        mask[0, 0] = True
        img = RangeImage(np.where(mask, 0.8, 0.0), mask)
        region = np.zeros((3, 3), bool)
        region[0, 0] = region[1, 1] = True
        filled = fill_holes(img, region)
        self.assertTrue(filled.mask[1, 1])
        self.assertEqual(filled.values[1, 1], 0.8)

    def test_matches_raster_sweep(self):
        rng = np.random.default_rng(11)
        for _ in range(150):
            shape = tuple(int(n) for n in rng.integers(2, 13, size=2))
            mask = rng.uniform(size=shape) >= rng.uniform(0.1, 0.9)
            region = rng.uniform(size=shape) < rng.uniform(0.3, 1.0)
            img = RangeImage(np.where(mask, rng.uniform(size=shape), 0.0), mask)

            expected = raster_sweep_fill(img.values, img.mask, region)
            if expected is None:
                with self.assertRaises(UnfillableError):
                    fill_holes(img, region)
                continue
            filled = fill_holes(img, region)
            np.testing.assert_array_equal(filled.mask, expected[1])
            np.testing.assert_allclose(filled.values, expected[0], rtol=0, atol=1e-12)

    def test_observed_pixels_untouched_and_idempotent(self):
        rng = np.random.default_rng(5)
        mask = rng.uniform(size=(12, 12)) >= 0.3
        img = RangeImage(np.where(mask, rng.uniform(size=(12, 12)), 0.0), mask)
        region = np.zeros((12, 12), bool)
        region[2:10, 2:10] = True

        once = fill_holes(img, region)
        np.testing.assert_array_equal(once.values[mask], img.values[mask])
        self.assertFalse(once.mask[~region & ~mask].any())
        self.assertTrue(fill_holes(once, region).equals(once))

    def test_region_without_observation(self):
        img = RangeImage(np.zeros((4, 4)), np.zeros((4, 4), bool))
        with self.assertRaises(UnfillableError):
            fill_holes(img, np.ones((4, 4), bool))

    def test_region_shape_mismatch(self):
        img = RangeImage(np.zeros((4, 4)), np.ones((4, 4), bool))
        with self.assertRaises(InvalidInputError):
            fill_holes(img, np.ones((3, 3), bool))


class FaceRegionTests(SimpleTestCase):
    def test_region_covers_eyes_not_corners(self):
        region = face_region_from_landmarks(face_landmarks(), (128, 128))
        self.assertTrue(region[48, 38])
        self.assertTrue(region[48, 88])
        self.assertTrue(region[70, 63])
        self.assertFalse(region[0, 0])
        self.assertFalse(region[127, 127])
