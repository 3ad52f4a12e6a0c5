"""Helpers shared by the test suites of several apps."""

import unittest
from pathlib import Path
from typing import Callable, Dict, Iterable, Optional

import torch
from django.conf import settings

from depth_hfr.seeding import derive_seed
from harness.config import load_config
from harness.pipeline import stage_order
from harness.stages import STAGE_FUNCTIONS
from harness.workspace import Workspace


def slow_test(test):
    """Skip unless DEPTH_HFR_SLOW_TESTS=1 (end-to-end training runs)."""
    return unittest.skipUnless(settings.DEPTH_HFR_SLOW_TESTS, "set DEPTH_HFR_SLOW_TESTS=1 to run")(test)


@torch.no_grad()
def central_differences(loss: Callable[[], torch.Tensor], parameters: Iterable[torch.Tensor], step: float = 1e-4):
    """Numerical gradient of ``loss()`` w.r.t. every element of ``parameters``."""
    gradients = []
    for parameter in parameters:
        grad = torch.zeros_like(parameter)
        flat, flat_grad = parameter.view(-1), grad.view(-1)
        for i in range(flat.numel()):
            original = flat[i].item()
            flat[i] = original + step
            upper = loss().item()
            flat[i] = original - step
            lower = loss().item()
            flat[i] = original
            flat_grad[i] = (upper - lower) / (2 * step)
        gradients.append(grad)
    return gradients


def analytic_gradients(loss: Callable[[], torch.Tensor], parameters):
    parameters = list(parameters)
    return torch.autograd.grad(loss(), parameters)


def relative_error(analytic, numeric) -> float:
    a = torch.cat([g.reshape(-1) for g in analytic])
    n = torch.cat([g.reshape(-1) for g in numeric])
    return float((a - n).norm() / max(float(a.norm()), float(n.norm()), 1e-12))


def desk_config(**overrides):
    """configs/desk.yaml with dotted ``section.key`` overrides."""
    return load_config(Path(settings.BASE_DIR) / "configs" / "desk.yaml").override(**overrides)


def run_stages(config, stages: Optional[Iterable[str]] = None) -> Dict[str, dict]:
    """Stage functions in dataflow order on ``config.out_dir``, without the run ledger."""
    ws = Workspace(config.out_dir)
    ws.root.mkdir(parents=True, exist_ok=True)
    return {
        stage: STAGE_FUNCTIONS[stage](config, ws, derive_seed(config.seed, stage)).metrics
        for stage in stage_order(stages)
    }


# 20 training and 18 test identities, each test identity enrolled once: chance rank-1 is 1/18
RECOGNITION_OVERRIDES = {
    "data.num_ids": 40,
    "data.samples_per_id": 4,
    "data.split": [0.5, 0.05, 0.45],
    "gan.epochs": 5,
    "unimodal.epochs": 8,
    "unimodal.momentum_switch_epoch": 4,
    "unimodal.finetune_epochs": 5,
    "crossmodal.epochs": 5,
}
