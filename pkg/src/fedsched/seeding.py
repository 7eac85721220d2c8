"""Deterministic RNG substreams derived from a single master seed.

Every source of randomness in a run (channel fading, client selection,
minibatch sampling, data generation) gets its own independent stream keyed
by (purpose, index). Adding devices or purposes never perturbs existing
streams, so runs stay reproducible as configurations grow.
"""

from __future__ import annotations

import numpy as np

# Purpose tags for substream derivation. Values are part of the
# reproducibility contract: changing them changes every run's output.
DATA = 0
CHANNEL = 1
SELECTION = 2
MINIBATCH = 3
INIT = 4


def substream(master_seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Return an independent Generator for (purpose, index)."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(purpose, index))
    return np.random.default_rng(seq)
