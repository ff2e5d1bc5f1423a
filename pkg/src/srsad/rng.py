"""Counter-based random stream derivation.

Every stochastic object in the toolkit (weight init, each training or
validation mixture, each test sample) gets its own Philox generator keyed
by (seed, stream, index). Streams are order-independent: sample i can be
drawn without drawing 0..i-1, and regenerating any sample is exact.
"""

from __future__ import annotations

import numpy as np

STREAM_INIT = 0
STREAM_TRAIN = 1
STREAM_VAL = 2
STREAM_TEST = 3
STREAM_CORPUS = 4
STREAM_MIX = 5

_MASK64 = (1 << 64) - 1
_MASK48 = (1 << 48) - 1


def stream_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    key = [int(seed) & _MASK64, ((int(stream) & 0xFFFF) << 48) | (int(index) & _MASK48)]
    return np.random.Generator(np.random.Philox(key=key))
