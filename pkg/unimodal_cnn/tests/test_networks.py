import torch
from django.test import SimpleTestCase

from depth_hfr.exceptions import InvalidInputError
from depth_hfr.testing import analytic_gradients, central_differences, relative_error
from unimodal_cnn.networks import FEATURE_DIM, CcpNetwork, build_ccp_network, parameter_count, scaled_widths


def closed_form_count(in_channels, widths, side, feature_dim, num_classes):
    count, prev = 0, in_channels
    for width in widths:
        count += (prev * 9 + 1) * width + (width * 9 + 1) * width
        prev = width
    count += (prev * side * side + 1) * feature_dim
    return count + (feature_dim + 1) * num_classes


class BuildCcpNetworkTests(SimpleTestCase):
    def test_colour_network_outputs(self):
        torch.manual_seed(0)
        net = build_ccp_network(3, 5, width_scale=0.25)
        image = torch.randn(1, 3, 128, 128)
        self.assertEqual(tuple(net.features(image).shape), (1, FEATURE_DIM))
        self.assertEqual(tuple(net(image).shape), (1, 5))

    def test_width_scale_keeps_feature_width(self):
        for scale in (0.25, 0.125):
            net = build_ccp_network(1, 2, width_scale=scale)
            self.assertEqual(net.feature[1].out_features, FEATURE_DIM)
            self.assertEqual(tuple(net.features(torch.zeros(1, 1, 128, 128)).shape), (1, FEATURE_DIM))

    def test_parameter_count(self):
        for in_channels, scale, classes in [(3, 0.25, 10), (1, 0.125, 4)]:
            net = build_ccp_network(in_channels, classes, width_scale=scale)
            expected = closed_form_count(in_channels, scaled_widths(scale), 8, FEATURE_DIM, classes)
            self.assertEqual(parameter_count(net), expected)

    def test_invalid_arguments(self):
        with self.assertRaises(InvalidInputError):
            build_ccp_network(2, 5)
        with self.assertRaises(InvalidInputError):
            build_ccp_network(3, 1, width_scale=0.125)
        with self.assertRaises(InvalidInputError):
            scaled_widths(0)


class HeadTests(SimpleTestCase):
    def setUp(self):
        torch.manual_seed(1)
        self.net = CcpNetwork(1, 3, widths=(4, 4), feature_dim=16, input_size=16).eval()
        self.images = torch.randn(5, 1, 16, 16)

    def test_features_ignore_classifier(self):
        before = self.net.features(self.images)
        self.net.replace_head(7, torch.Generator().manual_seed(3))
        self.assertTrue(torch.equal(before, self.net.features(self.images)))
        self.assertEqual(self.net.num_classes, 7)
        self.assertEqual(self.net.config["num_classes"], 7)

    def test_softmax_rows_sum_to_one(self):
        probabilities = torch.softmax(self.net(self.images), dim=1)
        self.assertTrue(torch.allclose(probabilities.sum(dim=1), torch.ones(5), atol=1e-6))

    def test_seeded_head_is_reproducible(self):
        self.net.replace_head(4, torch.Generator().manual_seed(9))
        first = self.net.classifier.weight.clone()
        self.net.replace_head(4, torch.Generator().manual_seed(9))
        self.assertTrue(torch.equal(first, self.net.classifier.weight))


class GradientCheckTests(SimpleTestCase):
    def test_cross_entropy_gradient(self):
        torch.manual_seed(2)
        net = CcpNetwork(1, 3, widths=(2,), feature_dim=6, input_size=4, activation="tanh").double()
        images = torch.randn(4, 1, 4, 4, dtype=torch.float64)
        labels = torch.tensor([0, 1, 2, 1])
        parameters = list(net.parameters())
        self.assertLess(parameter_count(net), 10_000)

        def loss():
            return torch.nn.functional.cross_entropy(net(images), labels)

        self.assertLess(relative_error(analytic_gradients(loss, parameters), central_differences(loss, parameters)), 1e-4)
