"""Counter-based random streams.

Every stochastic routine draws from a named Philox stream keyed by
(seed, purpose, index). Streams are independent by construction, so the
number of workers or the order in which particles are processed can
never change the numbers drawn.
"""

import hashlib

import numpy as np


def stream(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    """Return the generator for a named stream.

    Parameters
    ----------
    seed : master seed for the run.
    purpose : short label, e.g. "merton-path" or "flow-particle".
    index : stream number within the purpose (particle id, path id, ...).
    """
    tag = int.from_bytes(
        hashlib.blake2b(purpose.encode(), digest_size=8).digest(), "big"
    )
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, tag ^ index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
