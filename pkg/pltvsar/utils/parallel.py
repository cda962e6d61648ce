import os
from typing import Callable, Iterable, List, Optional

import numpy as np
from p_tqdm import p_map
from tqdm import tqdm

from pltvsar.utils.errors import PltvsarError, ReplicateFailure
from pltvsar.utils.messages import REPLICATE_FAIL_MSG

NUM_WORKERS_ENV = "PLTVSAR_NUM_WORKERS"


def default_num_workers() -> int:
    value = os.environ.get(NUM_WORKERS_ENV, "")
    return int(value) if value.strip() else 1


def replicate_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for replicate ``keys`` under a master seed; independent of run order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """64-bit master seed for a nested stream (e.g. the bootstrap of one replicate)."""
    state = np.random.SeedSequence(seed, spawn_key=tuple(keys)).generate_state(
        1, np.uint64
    )
    return int(state[0])


class _Guarded:
    """Wraps a replicate function so failures carry the replicate index."""

    def __init__(self, func: Callable):
        self.func = func

    def __call__(self, index: int):
        try:
            return self.func(index)
        except PltvsarError as e:
            raise ReplicateFailure(REPLICATE_FAIL_MSG.format(index, e), index) from e


def run_replicates(
    func: Callable,
    indices: Iterable[int],
    num_workers: Optional[int] = None,
    desc: Optional[str] = None,
    progress: bool = True,
) -> List:
    """Map ``func`` over replicate indices, results ordered by index.

    Uses ``p_map`` when more than one worker is requested.
    """
    indices = sorted(indices)
    num_workers = default_num_workers() if num_workers is None else num_workers
    guarded = _Guarded(func)
    if num_workers > 1 and len(indices) > 1:
        return p_map(
            guarded, indices, num_cpus=num_workers, desc=desc, disable=not progress
        )
    return [guarded(i) for i in tqdm(indices, desc=desc, disable=not progress)]
