import json
import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from depth_hfr.exceptions import ConfigError
from harness.config import default_config, load_config, save_config, validate_config


class DefaultConfigTests(SimpleTestCase):
    def test_defaults(self):
        config = default_config()
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.data["split"], [0.7, 0.1, 0.2])
        self.assertEqual(config.gan["eta"], 500.0)
        self.assertEqual(config.gan["generator_widths"], [64, 128, 256, 512, 512, 512])
        self.assertEqual(config.unimodal["decay_factor"], 5.0)
        self.assertEqual(config.crossmodal["correlation_weight"], 0.6)
        self.assertEqual(config.evaluation["protocol"], "huang")

    def test_sections_are_copies(self):
        config = default_config()
        config.gan["eta"] = 1.0
        self.assertEqual(config.gan["eta"], 500.0)

    def test_hash_is_stable_and_sensitive(self):
        self.assertEqual(default_config().hash, validate_config({}).hash)
        self.assertEqual(len(default_config().hash), 64)
        self.assertNotEqual(default_config().hash, default_config().override(seed=1).hash)

    @override_settings(DEPTH_HFR_RUNS_DIR=Path("/tmp/depth-hfr-runs"))
    def test_out_dir_defaults_to_hash_prefix(self):
        config = default_config()
        self.assertEqual(config.out_dir, settings.DEPTH_HFR_RUNS_DIR / config.hash[:12])
        self.assertEqual(config.override(out_dir="/tmp/x").out_dir, Path("/tmp/x"))


class OverrideTests(SimpleTestCase):
    def test_dotted_keys(self):
        config = default_config().override(**{"gan.epochs": 3, "crossmodal.correlation_weight": 0.0})
        self.assertEqual(config.gan["epochs"], 3)
        self.assertEqual(config.crossmodal["correlation_weight"], 0.0)

    def test_none_keeps_value(self):
        self.assertEqual(default_config().override(seed=None), default_config())

    def test_override_is_validated(self):
        with self.assertRaises(ConfigError) as raised:
            default_config().override(**{"gan.eta": -1})
        self.assertTrue(any(error.startswith("gan.eta:") for error in raised.exception.errors))


class ValidationTests(SimpleTestCase):
    def assertInvalid(self, payload, location):
        with self.assertRaises(ConfigError) as raised:
            validate_config(payload)
        self.assertEqual(raised.exception.exit_code, 2)
        self.assertTrue(
            any(error.startswith(f"{location}:") for error in raised.exception.errors),
            raised.exception.errors,
        )

    def test_unknown_keys(self):
        self.assertInvalid({"gan": {"etta": 1}}, "gan.etta")
        self.assertInvalid({"training": {}}, "training")

    def test_split_must_sum_to_one(self):
        self.assertInvalid({"data": {"split": [0.5, 0.1, 0.1]}}, "data.split")

    def test_ranges(self):
        self.assertInvalid({"data": {"num_ids": 1}}, "data.num_ids")
        self.assertInvalid({"gan": {"beta1_start": 1.0}}, "gan.beta1_start")
        self.assertInvalid({"unimodal": {"decay_factor": 1.0}}, "unimodal.decay_factor")
        self.assertInvalid({"crossmodal": {"correlation_weight": -0.1}}, "crossmodal.correlation_weight")
        self.assertInvalid({"evaluation": {"normalization": "tanh"}}, "evaluation.normalization")

    def test_cross_field_rules(self):
        self.assertInvalid(
            {"gan": {"discriminator_widths": [8], "discriminator_strided": 2}}, "gan.discriminator_strided"
        )
        self.assertInvalid({"unimodal": {"epochs": 5}}, "unimodal.momentum_switch_epoch")

    def test_protocol_name_or_json_path(self):
        self.assertInvalid({"evaluation": {"protocol": "frgc"}}, "evaluation.protocol")
        self.assertEqual(validate_config({"evaluation": {"protocol": "p.json"}}).evaluation["protocol"], "p.json")

    def test_wrong_types_are_not_coerced(self):
        self.assertInvalid({"gan": {"eta": "500"}}, "gan.eta")
        self.assertInvalid({"gan": {"eta": True}}, "gan.eta")
        self.assertInvalid({"crossmodal": {"freeze_streams": "yes"}}, "crossmodal.freeze_streams")
        self.assertInvalid({"evaluation": {"dump_scores": 1}}, "evaluation.dump_scores")
        self.assertInvalid({"gan": {"epochs": 2.0}}, "gan.epochs")
        self.assertInvalid({"seed": "7"}, "seed")
        self.assertInvalid({"data": {"split": ["0.7", 0.1, 0.2]}}, "data.split.0")
        self.assertInvalid({"gan": {"generator_widths": [8, True]}}, "gan.generator_widths.1")
        self.assertInvalid({"evaluation": {"protocol": 3}}, "evaluation.protocol")

    def test_integers_are_valid_floats(self):
        eta = validate_config({"gan": {"eta": 500}}).gan["eta"]
        self.assertEqual(eta, 500.0)
        self.assertIsInstance(eta, float)

    def test_not_a_mapping(self):
        with self.assertRaises(ConfigError):
            validate_config([1, 2])


class FileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def test_yaml_and_json_round_trip(self):
        config = default_config().override(seed=5, **{"data.num_ids": 8})
        for name in ("config.yaml", "config.json"):
            self.assertEqual(load_config(save_config(config, self.root / name)), config)

    def test_json_is_sorted(self):
        path = save_config(default_config(), self.root / "config.json")
        self.assertEqual(list(json.loads(path.read_text())), sorted(default_config().values))

    def test_empty_yaml_is_all_defaults(self):
        path = self.root / "empty.yaml"
        path.write_text("")
        self.assertEqual(load_config(path), default_config())

    def test_desk_config(self):
        config = load_config(Path(settings.BASE_DIR) / "configs" / "desk.yaml")
        self.assertEqual(config.data["num_ids"], 10)
        self.assertEqual(config.gan["eta"], 500.0)

    def test_missing_and_broken_files(self):
        with self.assertRaises(ConfigError):
            load_config(self.root / "absent.yaml")
        broken = self.root / "broken.yaml"
        broken.write_text("gan: [unclosed")
        with self.assertRaises(ConfigError):
            load_config(broken)
