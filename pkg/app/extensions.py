"""
Exo-Mix - Shared Extensions

Process-wide objects shared by services: the active configuration, keyed
random streams and the worker pool.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import config as _configs


class _AppState:
    """Holds the configuration selected by create_app."""

    def __init__(self):
        self.config = None

    def init_app(self, cfg):
        self.config = cfg


state = _AppState()


def get_config():
    """Active configuration (falls back to the default one)."""
    return state.config or _configs['default']


# Random streams
# A stream is keyed by (seed, *key) so that e.g. bootstrap replicate i gets
# the same draws regardless of how many replicates run or in which order.
STREAM_SIMULATION = 0
STREAM_NPEM = 1
STREAM_BOOTSTRAP = 2


def seed_sequence(seed, *key):
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))


def seed_stream(seed, *key):
    """numpy Generator for the stream identified by (seed, *key)."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))


def derive_seed(seed, *key):
    """A 63-bit integer seed derived from (seed, *key)."""
    return int(seed_sequence(seed, *key).generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def worker_pool(threads=None):
    """Thread pool capped at ``threads`` workers (config default when None).

    numpy releases the GIL inside the heavy kernels (matrix products,
    exp), so threads are enough for restart- and replicate-level parallelism.
    """
    if threads is None:
        threads = get_config().THREADS
    return ThreadPoolExecutor(max_workers=threads)
