"""Seeded random streams.

Every randomised operation takes a numpy Generator from its caller. Work that may run
in parallel derives child streams by counter-based splitting, so results depend on
the root seed only and not on scheduling.
"""

import numpy as np

RngLike = np.random.Generator | int | None


def make_rng(seed: RngLike = None) -> np.random.Generator:
  if isinstance(seed, np.random.Generator):
    return seed
  return np.random.default_rng(seed)


def child_rng(seed: int, *key: int) -> np.random.Generator:
  """Stream number *key* under *seed*; identical for identical arguments."""
  return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def derive_seed(rng: np.random.Generator) -> int:
  return int(rng.integers(0, 2**63 - 1))


def split(rng: np.random.Generator, count: int) -> list[np.random.Generator]:
  return rng.spawn(count)
