"""Counter-based random substreams for reproducible, coordination-free sampling.

Every unit of work gets its own Philox stream addressed by a (purpose,
dataset index, item index) triple placed in the high words of the 256-bit
counter. Philox increments the low word first, so streams with distinct
addresses never overlap for any realistic draw count, and the whole run is
reproducible (and embarrassingly parallel) from one master seed.
"""

from __future__ import annotations

import numpy as np

PURPOSE_VALUES = 0
PURPOSE_POOL = 1


def master_key(seed: int) -> np.ndarray:
    """Derive the 128-bit Philox key for a run from one integer seed."""
    return np.random.SeedSequence(int(seed)).generate_state(2, dtype=np.uint64)


def substream(key: np.ndarray, purpose: int, dataset: int, item: int) -> np.random.Generator:
    """Independent generator for one (purpose, dataset, item) work unit."""
    counter = np.array([0, purpose, dataset, item], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
