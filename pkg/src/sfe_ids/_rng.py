"""Seeded random streams.

Every random draw in the package goes through :func:`stream`, which keys a
counter-based Philox generator by ``(seed, purpose, *ids)``.  Two callers that
use different keys never share state, so results do not depend on the order
in which threads or folds happen to run.
"""
import numpy as np

# purpose tags
RESAMPLE = 1
KMEANS = 2
GMM = 3
FOREST = 4
FOLDS = 5
SYNTH = 6
TREE = 7
SAMPLE = 8


def stream(seed: int, purpose: int, *ids: int) -> np.random.Generator:
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, int(purpose), *(int(i) for i in ids)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))
