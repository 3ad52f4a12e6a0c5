from django.test import SimpleTestCase

from depth_hfr.exceptions import InvalidInputError
from unimodal_cnn.schedule import TrainSchedule


class TrainScheduleTests(SimpleTestCase):
    def test_step_decay(self):
        schedule = TrainSchedule()
        self.assertEqual(schedule.learning_rate_at(0), 1.0)
        self.assertAlmostEqual(schedule.learning_rate_at(10), 0.2)
        self.assertAlmostEqual(schedule.learning_rate_at(20), 0.04)
        for epoch in range(41):
            self.assertAlmostEqual(schedule.learning_rate_at(epoch), 5.0 ** -(epoch // 10), places=15)

    def test_momentum_switch(self):
        schedule = TrainSchedule()
        self.assertEqual(schedule.momentum_at(9), 0.5)
        self.assertEqual(schedule.momentum_at(10), 0.9)

    def test_finetuning_keeps_rate_constant(self):
        schedule = TrainSchedule.finetuning()
        self.assertEqual({schedule.learning_rate_at(e) for e in range(20)}, {0.001})
        self.assertEqual(TrainSchedule.finetuning(epochs=4).momentum_switch_epoch, 4)

    def test_invalid_schedules(self):
        for kwargs in (
            {"learning_rate": 0.0},
            {"decay_factor": 1.0},
            {"epochs": 5, "momentum_switch_epoch": 10},
            {"momentum_final": 1.0},
            {"batch_size": 0},
        ):
            with self.subTest(**kwargs), self.assertRaises(InvalidInputError):
                TrainSchedule(**kwargs)
