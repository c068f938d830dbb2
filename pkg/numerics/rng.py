"""
Counter-based random streams keyed by (seed, stream labels)
"""
import hashlib

import numpy as np


def stream_key(seed: int, *labels) -> int:
    """128-bit Philox key derived from the seed and the stream labels"""
    text = ":".join([str(int(seed))] + [str(label) for label in labels])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest()
    return int.from_bytes(digest, "little")


def stream(seed: int, *labels) -> np.random.Generator:
    """
    Independent generator for one named stochastic step.

    The same (seed, labels) always yields the same sequence, whatever
    else has been drawn before.
    """
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *labels)))
