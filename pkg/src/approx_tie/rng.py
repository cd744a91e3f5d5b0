"""Deterministic seed derivation.

Every random stream in the package is derived from one integer master seed
plus a tuple of labels, so that independent consumers (solves, estimates,
branch draws, sample blocks) never share a stream and results do not depend
on call order or worker count.
"""

from __future__ import annotations

import zlib

import numpy as np

# Samples are drawn in fixed-size blocks, each with its own child stream,
# so a parallel split by block index reproduces the serial result exactly.
SAMPLE_BLOCK = 4096


def _label_key(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    return zlib.crc32(str(label).encode("utf-8"))


def derive_seed(seed, *labels) -> np.random.SeedSequence:
    """Child seed sequence for ``labels`` under master ``seed``.

    ``seed`` may itself be a SeedSequence, in which case labels extend its
    spawn key.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            entropy=seed.entropy,
            spawn_key=tuple(seed.spawn_key) + tuple(_label_key(x) for x in labels),
        )
    return np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(_label_key(x) for x in labels)
    )


def make_rng(seed, *labels) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *labels)))


def block_uniforms(seed, num_samples: int, width: int, *labels) -> np.ndarray:
    """``num_samples x width`` uniforms drawn block-wise from derived streams."""
    out = np.empty((num_samples, width))
    for b, start in enumerate(range(0, num_samples, SAMPLE_BLOCK)):
        stop = min(start + SAMPLE_BLOCK, num_samples)
        out[start:stop] = make_rng(seed, *labels, "block", b).random((stop - start, width))
    return out
