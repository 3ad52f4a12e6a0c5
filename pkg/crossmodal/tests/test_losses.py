import torch
import torch.nn.functional as F
from django.test import SimpleTestCase

from crossmodal.losses import correlation_loss, joint_loss
from crossmodal.tests.factories import toy_model
from depth_hfr.exceptions import InvalidInputError, ShapeError
from depth_hfr.testing import analytic_gradients, central_differences, relative_error


class CorrelationLossTests(SimpleTestCase):
    def test_equal_features(self):
        features = torch.randn(4, 5)
        self.assertEqual(float(correlation_loss(features, features.clone())), 0.0)

    def test_three_four_five(self):
        self.assertEqual(float(correlation_loss(torch.tensor([[3.0, 4.0]]), torch.zeros(1, 2))), 25.0)

    def test_elementwise_oracle_symmetry_and_scaling(self):
        torch.manual_seed(0)
        a, b = torch.randn(3, 4, dtype=torch.float64), torch.randn(3, 4, dtype=torch.float64)
        expected = sum((x - y) ** 2 for x, y in zip(a.flatten().tolist(), b.flatten().tolist()))
        self.assertAlmostEqual(float(correlation_loss(a, b)), expected, places=10)
        self.assertAlmostEqual(float(correlation_loss(b, a)), expected, places=10)
        self.assertAlmostEqual(float(correlation_loss(3 * a, 3 * b)), 9 * expected, places=8)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeError):
            correlation_loss(torch.zeros(2, 3), torch.zeros(3, 3))


class JointLossTests(SimpleTestCase):
    def setUp(self):
        self.model = toy_model(num_classes=2, feature_dim=3, dtype=torch.float64)
        generator = torch.Generator().manual_seed(4)
        self.x = torch.randn(2, 3, dtype=torch.float64, generator=generator)
        self.y = torch.randn(2, 3, dtype=torch.float64, generator=generator)
        self.labels = torch.tensor([0, 1])

    def test_zero_weight_is_plain_softmax(self):
        report = joint_loss(self.x, self.y, self.labels, self.model, weight=0.0)
        shared = (self.x @ self.model.map_x.T + self.y @ self.model.map_y.T) / 2
        expected = F.cross_entropy(self.model.classifier(shared), self.labels, reduction="sum")
        self.assertEqual(float(report.total), float(report.softmax))
        self.assertAlmostEqual(float(report.total), float(expected), places=12)

    def test_identical_maps_and_features(self):
        with torch.no_grad():
            self.model.map_y.copy_(self.model.map_x)
        report = joint_loss(self.x, self.x.clone(), self.labels, self.model)
        self.assertEqual(float(report.correlation), 0.0)
        self.assertTrue(torch.allclose(self.model.shared(self.model.map_color(self.x), self.model.map_depth(self.x)), self.model.map_color(self.x)))

    def test_total_weights_correlation(self):
        report = joint_loss(self.x, self.y, self.labels, self.model, weight=0.6)
        self.assertAlmostEqual(float(report.total), float(report.softmax) + 0.6 * float(report.correlation), places=12)
        self.assertEqual(set(report.as_dict()), {"softmax", "correlation", "total"})

    def test_gradient_matches_finite_differences(self):
        parameters = list(self.model.head_parameters())

        def loss():
            return joint_loss(self.x, self.y, self.labels, self.model, weight=0.6).total

        self.assertLess(relative_error(analytic_gradients(loss, parameters), central_differences(loss, parameters)), 1e-4)

    def test_invalid_inputs(self):
        with self.assertRaises(InvalidInputError):
            joint_loss(self.x, self.y, torch.tensor([0, 2]), self.model)
        with self.assertRaises(InvalidInputError):
            joint_loss(self.x, self.y, self.labels, self.model, weight=-1.0)
        with self.assertRaises(ShapeError):
            joint_loss(self.x, self.y, torch.tensor([0]), self.model)
