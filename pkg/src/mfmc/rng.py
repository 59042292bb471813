"""Seeding helpers.

Every stochastic routine takes either an integer seed, a
:class:`numpy.random.SeedSequence` or a ready :class:`numpy.random.Generator`.
Independent substreams are derived from a master seed with a tuple key, so the
stream for e.g. ``(method, budget_index, run)`` does not depend on how many
other streams were drawn before it.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"expected an integer seed, SeedSequence or Generator, got {seed!r}")
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def seed_sequence(master: int | np.random.SeedSequence, *key: int) -> np.random.SeedSequence:
    """Return the seed sequence addressed by ``key`` under ``master``."""
    if isinstance(master, np.random.SeedSequence):
        return np.random.SeedSequence(master.entropy, spawn_key=tuple(master.spawn_key) + tuple(key))
    return np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))


def substream(master: int | np.random.SeedSequence, *key: int) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(master, *key))
