import tempfile
from pathlib import Path

import numpy as np
import torch
from django.test import SimpleTestCase

from depth_hfr.exceptions import ShapeError
from unimodal_cnn.features import extract_features, read_features, to_grayscale, write_features
from unimodal_cnn.networks import FEATURE_DIM, build_ccp_network


class ExtractFeaturesTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        torch.manual_seed(0)
        cls.net = build_ccp_network(1, 4, width_scale=0.125)

    def test_dimension_and_determinism(self):
        images = torch.randn(3, 1, 128, 128)
        first = extract_features(self.net, images, batch_size=2)
        self.assertEqual(tuple(first.shape), (3, FEATURE_DIM))
        self.assertTrue(torch.equal(first, extract_features(self.net, images, batch_size=2)))

    def test_order_preserved(self):
        images = torch.randn(4, 1, 128, 128)
        whole = extract_features(self.net, images)
        reversed_ = extract_features(self.net, images.flip(0))
        self.assertTrue(torch.allclose(whole.flip(0), reversed_, atol=1e-6))

    def test_duplicate_image_is_self_similar(self):
        image = torch.randn(1, 1, 128, 128)
        pair = extract_features(self.net, torch.cat([image, image]))
        cosine = torch.nn.functional.cosine_similarity(pair[:1], pair[1:])
        self.assertAlmostEqual(float(cosine), 1.0, places=5)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeError):
            extract_features(self.net, torch.randn(1, 3, 128, 128))


class GrayscaleTests(SimpleTestCase):
    def test_luma_weights(self):
        colors = np.array([[[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0]]]])
        gray = to_grayscale(colors)
        self.assertEqual(gray.shape, (1, 1, 3, 1))
        np.testing.assert_allclose(gray[0, 0, :, 0], [0.299, 0.587, 1.0])

    def test_needs_three_channels(self):
        with self.assertRaises(ShapeError):
            to_grayscale(np.zeros((2, 2, 1)))


class FeatureFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / "features.bin"

    def test_layout_is_little_endian_row_major(self):
        values = np.arange(6, dtype=np.float64).reshape(2, 3) / 4
        write_features(self.path, values, ["0:0", "1:0"], "color", "abc", {"split": "test"})
        self.assertEqual(self.path.read_bytes(), values.astype("<f4").tobytes())

        loaded = read_features(self.path)
        np.testing.assert_array_equal(loaded.values, values.astype(np.float32))
        self.assertEqual(loaded.ids, ["0:0", "1:0"])
        self.assertEqual((loaded.modality, loaded.config_hash, loaded.dim), ("color", "abc", 3))
        self.assertEqual(loaded.meta, {"split": "test"})

    def test_id_count_must_match_rows(self):
        with self.assertRaises(ShapeError):
            write_features(self.path, np.zeros((2, 3)), ["only-one"], "color", "abc")
