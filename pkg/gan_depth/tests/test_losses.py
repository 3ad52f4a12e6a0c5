import math

import torch
from django.test import SimpleTestCase

from depth_hfr.exceptions import ShapeError
from gan_depth.losses import GanLossReport, loss_adversarial, loss_l1


class AdversarialLossTests(SimpleTestCase):
    def test_zero_logits(self):
        loss_d, loss_g = loss_adversarial(torch.zeros(1, 1, 4, 4), torch.zeros(1, 1, 4, 4))
        self.assertAlmostEqual(float(loss_d), 2 * math.log(2), places=6)
        self.assertAlmostEqual(float(loss_g), math.log(2), places=6)

    def test_perfect_discriminator(self):
        loss_d, _ = loss_adversarial(torch.full((1, 1, 4, 4), 50.0), torch.full((1, 1, 4, 4), -50.0))
        self.assertLess(float(loss_d), 1e-12)

    def test_matches_elementwise_formula(self):
        torch.manual_seed(1)
        d_real, d_fake = torch.randn(2, 1, 5, 5, dtype=torch.float64), torch.randn(2, 1, 5, 5, dtype=torch.float64)
        loss_d, loss_g = loss_adversarial(d_real, d_fake)
        sigmoid = lambda x: 1 / (1 + torch.exp(-x))
        expected_d = -torch.log(sigmoid(d_real)).mean() - torch.log(1 - sigmoid(d_fake)).mean()
        expected_g = -torch.log(sigmoid(d_fake)).mean()
        self.assertAlmostEqual(float(loss_d), float(expected_d), places=10)
        self.assertAlmostEqual(float(loss_g), float(expected_g), places=10)
        self.assertGreaterEqual(float(loss_d), 0.0)
        self.assertGreaterEqual(float(loss_g), 0.0)

    def test_extreme_logits_stay_finite(self):
        loss_d, loss_g = loss_adversarial(torch.full((1, 4), -1e4), torch.full((1, 4), 1e4))
        self.assertTrue(math.isfinite(float(loss_d)))
        self.assertTrue(math.isfinite(float(loss_g)))


class L1LossTests(SimpleTestCase):
    def test_identical_images(self):
        image = torch.rand(1, 1, 8, 8)
        self.assertEqual(float(loss_l1(image, image.clone())), 0.0)

    def test_constant_images(self):
        self.assertEqual(float(loss_l1(torch.full((4, 4), 0.25), torch.full((4, 4), 0.75))), 0.5)

    def test_elementwise_mean(self):
        a, b = torch.rand(3, 6, 6, dtype=torch.float64), torch.rand(3, 6, 6, dtype=torch.float64)
        expected = sum(abs(x - y) for x, y in zip(a.flatten().tolist(), b.flatten().tolist())) / a.numel()
        self.assertAlmostEqual(float(loss_l1(a, b)), expected, places=12)

    def test_metric_properties(self):
        torch.manual_seed(2)
        for _ in range(10):
            a, b, c = (torch.rand(1, 4, 4, dtype=torch.float64) for _ in range(3))
            self.assertEqual(float(loss_l1(a, b)), float(loss_l1(b, a)))
            self.assertLessEqual(float(loss_l1(a, c)), float(loss_l1(a, b)) + float(loss_l1(b, c)) + 1e-12)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeError):
            loss_l1(torch.zeros(1, 4, 4), torch.zeros(1, 4, 5))


class GanLossReportTests(SimpleTestCase):
    def test_total_weights_l1(self):
        report = GanLossReport(loss_D=1.0, loss_G_adv=0.5, loss_G_L1=0.01, eta=500.0)
        self.assertAlmostEqual(report.loss_G_total, 5.5)
        self.assertTrue(report.is_finite())
        self.assertFalse(GanLossReport(float("nan"), 0.0, 0.0, 1.0).is_finite())
