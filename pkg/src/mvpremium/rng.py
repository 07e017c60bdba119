"""Counter-based random streams.

Every variate is addressed by ``(seed, tag, step, path, component)`` through
numpy's Philox4x64 generator: the key is ``(seed, tag)``, the counter starts
at ``(0, step, 0, 0)`` and the path/component pair selects the raw word. Any
slice of paths can therefore be generated independently, which keeps results
identical whatever the chunking or worker count.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox, SeedSequence
from scipy.special import ndtri

BROWNIAN = 0
REGIME = 1
SAMPLER = 2

_UINT64 = (1 << 64) - 1


def _raw(seed: int, tag: int, step: int, start: int, count: int) -> np.ndarray:
    bitgen = Philox(key=[seed & _UINT64, tag], counter=[0, step, 0, 0])
    # each counter increment yields four 64-bit words
    bitgen.advance(start // 4)
    skip = start % 4
    return bitgen.random_raw(count + skip)[skip:]


def uniforms(seed: int, tag: int, step: int, path_start: int, n_paths: int,
             width: int = 1) -> np.ndarray:
    """Uniforms in the open interval (0, 1), shape ``(n_paths, width)``."""
    raw = _raw(seed, tag, step, path_start * width, n_paths * width)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return u.reshape(n_paths, width)


def normals(seed: int, tag: int, step: int, path_start: int, n_paths: int,
            width: int = 1) -> np.ndarray:
    """Standard normals by inverse-CDF transform of :func:`uniforms`."""
    return ndtri(uniforms(seed, tag, step, path_start, n_paths, width))


def child_seed(seed: int, index: int) -> int:
    """Deterministic independent 64-bit seed for sub-experiment ``index``."""
    state = SeedSequence(seed & _UINT64, spawn_key=(index,)).generate_state(1, np.uint64)
    return int(state[0])
