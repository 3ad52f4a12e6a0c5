import hashlib
import random

import numpy as np
import torch


def derive_seed(master: int, *names: object) -> int:
    """Fan a master seed out to a named sub-seed.

    seed = first 4 bytes (little endian) of sha256("master:name1:name2...").
    """
    key = ":".join(str(part) for part in (master, *names))
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:4], "little")


def seed_everything(seed: int) -> torch.Generator:
    random.seed(seed)
    np.random.seed(seed % 2**32)
    torch.manual_seed(seed)
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator
