"""Counter-based random streams keyed by (root seed, stream path).

Every consumer asks for its own stream, e.g. ``stream(seed, GAUSS, replica)``,
so draws never depend on evaluation order or worker count.  Streams are
Philox counters keyed through a ``SeedSequence``; reading ``n`` values and
then ``n + 1`` values from a fresh stream agrees on the first ``n``.
"""

import numpy as np

UINT64_MAX = 2**64 - 1

# stream ids
UNIFORM = 1
GAUSS = 2
REPLICA = 3

_INV_2_53 = 1.0 / 9007199254740992.0


def check_seed(seed):
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ValueError(f"seed must be an integer, got {seed!r}") from None
    if not 0 <= seed <= UINT64_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def stream(seed, *path):
    """Return a Philox bit generator for ``(seed, *path)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Philox(ss)


def derive_seed(seed, *path):
    """A child u64 seed, e.g. per replica: ``derive_seed(root, REPLICA, r)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])


def uniform_closed_open(bitgen, n):
    """n doubles in [0, 1) on the 2**-53 grid."""
    raw = bitgen.random_raw(n)
    return (raw >> np.uint64(11)).astype(np.float64) * _INV_2_53


def uniform_open(bitgen, n):
    """n doubles in (0, 1), midpoints of the 2**-53 grid; safe for quantiles."""
    raw = bitgen.random_raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53
