import csv
import tempfile
from pathlib import Path

import torch
from django.test import SimpleTestCase
from torch.utils.data import TensorDataset

from depth_hfr.checkpoints import load_checkpoint, save_checkpoint
from depth_hfr.exceptions import InvalidInputError, TrainingDivergedError
from depth_hfr.testing import analytic_gradients, central_differences, relative_error
from gan_depth.losses import loss_discriminator, loss_generator_adversarial, loss_l1
from gan_depth.networks import DiscriminatorNet, GeneratorNet
from gan_depth.training import GanSchedule, GanTrainer, generator_objective, load_generator
from range_pipeline.datasets import seeded_loader


def toy_nets():
    """Float64 tanh nets on 4x4 inputs, a few hundred parameters each."""
    torch.manual_seed(0)
    gen = GeneratorNet(
        widths=(2, 2), input_size=4, encoder_activation="tanh", decoder_activation="tanh"
    ).double()
    disc = DiscriminatorNet(widths=(2,), num_strided=1, activation="tanh").double()
    return gen, disc


def toy_pair(batch=1):
    generator = torch.Generator().manual_seed(1)
    color = torch.randn(batch, 3, 4, 4, dtype=torch.float64, generator=generator)
    depth = torch.rand(batch, 1, 4, 4, dtype=torch.float64, generator=generator)
    return color, depth


class GradientCheckTests(SimpleTestCase):
    def setUp(self):
        self.gen, self.disc = toy_nets()
        self.color, self.depth = toy_pair()

    def check(self, loss, parameters):
        parameters = list(parameters)
        analytic = analytic_gradients(loss, parameters)
        numeric = central_differences(loss, parameters)
        self.assertLess(relative_error(analytic, numeric), 1e-4)

    def test_generator_total(self):
        def loss():
            return generator_objective(self.gen, self.disc, self.color, self.depth, eta=5.0, stochastic=False)[0]

        self.check(loss, self.gen.parameters())

    def test_generator_l1(self):
        self.check(lambda: loss_l1(self.gen(self.color, stochastic=False), self.depth), self.gen.parameters())

    def test_generator_adversarial(self):
        def loss():
            return loss_generator_adversarial(self.disc(self.gen(self.color, stochastic=False), self.color))

        self.check(loss, self.gen.parameters())

    def test_discriminator(self):
        fake = self.gen(self.color, stochastic=False).detach()

        def loss():
            return loss_discriminator(self.disc(self.depth, self.color), self.disc(fake, self.color))

        self.check(loss, self.disc.parameters())


class ObjectiveTests(SimpleTestCase):
    def setUp(self):
        self.gen, self.disc = toy_nets()
        self.color, self.depth = toy_pair(batch=2)

    def grads(self, loss):
        return torch.autograd.grad(loss, list(self.gen.parameters()), allow_unused=True)

    def assertGradsEqual(self, first, second):
        for a, b in zip(first, second):
            self.assertTrue(torch.allclose(a, b, rtol=1e-10, atol=1e-12))

    def test_zero_eta_is_pure_adversarial(self):
        total, _, _ = generator_objective(self.gen, self.disc, self.color, self.depth, eta=0.0, stochastic=False)
        adversarial = loss_generator_adversarial(self.disc(self.gen(self.color, stochastic=False), self.color))
        self.assertGradsEqual(self.grads(total), self.grads(adversarial))

    def test_zero_head_discriminator_leaves_l1_gradient(self):
        with torch.no_grad():
            self.disc.head.weight.zero_()
            self.disc.head.bias.zero_()
        total, _, _ = generator_objective(self.gen, self.disc, self.color, self.depth, eta=3.0, stochastic=False)
        l1 = 3.0 * loss_l1(self.gen(self.color, stochastic=False), self.depth)
        self.assertGradsEqual(self.grads(total), self.grads(l1))

    def test_objective_variants(self):
        total, adversarial, l1 = generator_objective(
            self.gen, self.disc, self.color, self.depth, eta=2.0, objective="l1", stochastic=False
        )
        self.assertEqual(float(total), 2.0 * float(l1))
        total, adversarial, _ = generator_objective(
            self.gen, self.disc, self.color, self.depth, eta=2.0, objective="adversarial", stochastic=False
        )
        self.assertEqual(float(total), float(adversarial))


class TrainStepTests(SimpleTestCase):
    def setUp(self):
        self.gen, self.disc = toy_nets()
        self.color, self.depth = toy_pair(batch=2)

    def snapshot(self):
        return [p.detach().clone() for p in list(self.gen.parameters()) + list(self.disc.parameters())]

    def test_zero_learning_rate_changes_nothing(self):
        for d_optimizer in ("adam", "sgd"):
            trainer = GanTrainer(self.gen, self.disc, GanSchedule(learning_rate=0.0, d_optimizer=d_optimizer))
            before = self.snapshot()
            report = trainer.train_step(self.color, self.depth)
            self.assertTrue(report.is_finite())
            for old, new in zip(before, self.snapshot()):
                self.assertTrue(torch.equal(old, new))

    def test_step_updates_both_networks(self):
        trainer = GanTrainer(self.gen, self.disc, GanSchedule(learning_rate=1e-2))
        before = self.snapshot()
        trainer.train_step(self.color, self.depth)
        changed = [not torch.equal(old, new) for old, new in zip(before, self.snapshot())]
        gen_count = len(list(self.gen.parameters()))
        self.assertTrue(any(changed[:gen_count]))
        self.assertTrue(any(changed[gen_count:]))

    def test_l1_objective_skips_discriminator(self):
        trainer = GanTrainer(self.gen, self.disc, GanSchedule(learning_rate=1e-2, objective="l1"))
        before = [p.detach().clone() for p in self.disc.parameters()]
        trainer.train_step(self.color, self.depth)
        for old, new in zip(before, self.disc.parameters()):
            self.assertTrue(torch.equal(old, new))

    def test_non_finite_loss_diverges(self):
        trainer = GanTrainer(self.gen, self.disc)
        color = self.color.clone()
        color[0, 0, 0, 0] = float("nan")
        with self.assertRaises(TrainingDivergedError) as caught:
            trainer.train_step(color, self.depth)
        self.assertIn("epoch", caught.exception.report)

    def test_empty_batch(self):
        with self.assertRaises(InvalidInputError):
            GanTrainer(self.gen, self.disc).train_step(self.color[:0], self.depth[:0])

    def test_beta1_schedule(self):
        schedule = GanSchedule(switch_epoch=10)
        self.assertEqual(schedule.beta1(9), 0.5)
        self.assertEqual(schedule.beta1(10), 0.9)
        trainer = GanTrainer(self.gen, self.disc, GanSchedule(d_optimizer="sgd"))
        trainer.set_epoch(10)
        self.assertEqual(trainer.opt_g.param_groups[0]["betas"][0], 0.9)
        self.assertEqual(trainer.opt_d.param_groups[0]["momentum"], 0.9)

    def test_unknown_objective(self):
        with self.assertRaises(InvalidInputError):
            GanSchedule(objective="perceptual")


class FitAndCheckpointTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def train(self):
        gen, disc = toy_nets()
        color, depth = toy_pair(batch=6)
        dataset = TensorDataset(color, depth, torch.arange(6))
        trainer = GanTrainer(gen, disc, GanSchedule(learning_rate=1e-3, eta=10.0))
        history = trainer.fit(seeded_loader(dataset, 2, seed=4), epochs=2, loss_curve=self.root / "losses.csv")
        return trainer, history

    def test_loss_curve_written(self):
        _, history = self.train()
        self.assertEqual(len(history), 2)
        with open(self.root / "losses.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual(list(rows[0]), ["epoch", "loss_D", "loss_G_adv", "loss_G_L1"])
        self.assertEqual([row["epoch"] for row in rows], ["0", "1"])

    def test_loss_curve_names_the_config(self):
        gen, disc = toy_nets()
        color, depth = toy_pair(batch=4)
        trainer = GanTrainer(gen, disc, GanSchedule(learning_rate=1e-3, eta=10.0))
        loader = seeded_loader(TensorDataset(color, depth, torch.arange(4)), 2, seed=4)
        trainer.fit(loader, epochs=1, loss_curve=self.root / "losses.csv", config_hash="f00d")
        lines = (self.root / "losses.csv").read_text().splitlines()
        self.assertEqual(lines[0], "# config_hash: f00d")
        self.assertEqual(lines[1], "epoch,loss_D,loss_G_adv,loss_G_L1")

    def test_training_is_reproducible(self):
        first, _ = self.train()
        second, _ = self.train()
        for a, b in zip(first.gen.state_dict().values(), second.gen.state_dict().values()):
            self.assertTrue(torch.equal(a, b))

    def test_checkpoint_round_trip(self):
        trainer, _ = self.train()
        path = save_checkpoint(self.root / "gan.ckpt", trainer.checkpoint(seed=1, config_hash="abc", stats={"color": [0.5] * 3}))
        checkpoint = load_checkpoint(path, "gan")
        self.assertEqual(checkpoint.config_hash, "abc")
        self.assertEqual(checkpoint.meta["epoch"], 2)

        restored = GanTrainer.from_checkpoint(checkpoint)
        for a, b in zip(trainer.gen.state_dict().values(), restored.gen.state_dict().values()):
            self.assertTrue(torch.equal(a, b))
        self.assertEqual(restored.epoch, 2)
        self.assertEqual(restored.schedule, trainer.schedule)

        gen = load_generator(checkpoint)
        self.assertFalse(gen.training)
        with self.assertRaises(InvalidInputError):
            load_checkpoint(path, "ccp")
