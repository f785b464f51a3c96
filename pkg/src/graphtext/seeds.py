"""Deterministic seed derivation for multi-stage pipelines.

A single master seed is fanned out into independent per-stage seeds so that
each stage (splitting, sampling, training, evaluation) can be re-run in
isolation with a reproducible random stream.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One step of the splitmix64 mixing function (public-domain constants)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stage_seed(master_seed: int, stage: str) -> int:
    """Derive a 64-bit seed for a named stage from the master seed.

    The stage label is hashed with blake2b (stable across platforms and
    Python processes, unlike the builtin ``hash``), XORed into the master
    seed and passed through splitmix64.
    """
    label = int.from_bytes(hashlib.blake2b(stage.encode("utf-8"), digest_size=8).digest(), "big")
    return splitmix64((master_seed & _MASK64) ^ label)


def stage_rng(master_seed: int, stage: str) -> np.random.Generator:
    """Seeded numpy Generator for a named stage."""
    return np.random.default_rng(stage_seed(master_seed, stage))


def worker_rng(master_seed: int, stage: str, worker: int) -> np.random.Generator:
    """Independent stream for one worker inside a parallel stage."""
    return np.random.default_rng(splitmix64(stage_seed(master_seed, stage) ^ (worker + 1)))
