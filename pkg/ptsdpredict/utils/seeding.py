import zlib

import numpy as np


def derive_seed(seed: int, *keys) -> int:
    """Stable child seed of ``seed`` for a stage name or index path.

    Strings are reduced with CRC32 so the derivation is identical across
    processes and platforms.
    """
    spawn_key = tuple(
        zlib.crc32(key.encode("utf-8")) if isinstance(key, str) else int(key)
        for key in keys
    )
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key)
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
