"""Counter-based random streams.

Every consumer of randomness in this package draws from a Philox generator
keyed by ``(seed, domain, index)``.  Philox is counter-based, so streams with
distinct keys are independent and can be created in any order by any number
of workers: results depend only on the key, never on scheduling.  Chunked
consumers (sampling, Monte-Carlo paths) assign one stream per fixed-size
chunk so that output is identical for any worker count.
"""

import numpy as np

# Domain tags keep unrelated subsystems on disjoint key ranges.
GAUSS_SAMPLES = 1
WIENER = 2
MC_PATHS = 3
FIELD_FAMILY = 4

_MASK64 = (1 << 64) - 1
_INDEX_BITS = 48


def stream(seed: int, domain: int, index: int = 0) -> np.random.Generator:
    """Return the generator for stream ``(seed, domain, index)``.

    ``index`` must fit in 48 bits; the domain tag occupies the high bits of
    the second Philox key word.
    """
    if not 0 <= index < (1 << _INDEX_BITS):
        raise ValueError(f"stream index {index} out of range")
    key = np.array(
        [seed & _MASK64, ((domain << _INDEX_BITS) | index) & _MASK64],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))
