import numpy as np


def seed_sequence(seed: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """
    Counter-based stream keyed by (seed, *keys).
    Same keys give the same stream regardless of what ran before.
    """
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *keys)))


def derive_seed(seed: int, *keys: int) -> int:
    return int(seed_sequence(seed, *keys).generate_state(1, np.uint64)[0])
