import numpy as np


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator keyed by ``seed`` and an integer stream path.

    Distinct stream paths give independent generators, so work can be split
    across processes without changing any individual stream.
    """
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in stream))
    return np.random.Generator(np.random.Philox(ss))
