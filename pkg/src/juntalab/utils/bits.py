"""Bitmask helpers for points and coordinate sets.

A point of {+1,-1}^n is stored as an integer whose bit i is set when coordinate i
equals -1 (little-endian over coordinates, 0-indexed). A coordinate set is stored
the same way: bit i set means coordinate i belongs to the set.
"""

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Iterator

import numpy as np

CoordSet = int


def full_mask(n: int) -> CoordSet:
  return (1 << n) - 1


def popcount(mask: int) -> int:
  return int(mask).bit_count()


def bits_of(mask: int) -> list[int]:
  """Return the coordinates in *mask* in increasing order."""
  out = []
  index = 0
  while mask:
    if mask & 1:
      out.append(index)
    mask >>= 1
    index += 1
  return out


def mask_of(coords: Iterable[int]) -> CoordSet:
  mask = 0
  for coord in coords:
    mask |= 1 << int(coord)
  return mask


def complement(mask: CoordSet, n: int) -> CoordSet:
  return full_mask(n) & ~mask


def is_subset(inner: CoordSet, outer: CoordSet) -> bool:
  return inner & ~outer == 0


def submasks(mask: CoordSet) -> Iterator[CoordSet]:
  """Iterate every subset of *mask*, from *mask* itself down to the empty set."""
  sub = mask
  while True:
    yield sub
    if sub == 0:
      return
    sub = (sub - 1) & mask


def k_subsets(universe: CoordSet, k: int) -> Iterator[CoordSet]:
  """Iterate the size-*k* subsets of *universe* in lexicographic order."""
  for combo in combinations(bits_of(universe), k):
    yield mask_of(combo)


@lru_cache(maxsize=32)
def _popcount_table(n: int) -> np.ndarray:
  table = np.bitwise_count(np.arange(1 << n, dtype=np.int64)).astype(np.int64)
  table.setflags(write=False)
  return table


def popcount_table(n: int) -> np.ndarray:
  """Read-only array holding popcount(i) for i in 0..2^n-1."""
  return _popcount_table(n)


def popcounts(masks: np.ndarray) -> np.ndarray:
  return np.bitwise_count(np.asarray(masks, dtype=np.int64)).astype(np.int64)


def parity(subset: CoordSet, points) -> np.ndarray:
  """chi_S evaluated at *points*: +1 or -1 for each point."""
  weight = popcounts(np.asarray(points, dtype=np.int64) & subset)
  return 1 - 2 * (weight & 1)


def ball_size(n: int, r: int) -> int:
  return sum(comb(n, j) for j in range(min(r, n) + 1))


@lru_cache(maxsize=256)
def _ball_offsets(domain: CoordSet, r: int) -> np.ndarray:
  coords = bits_of(domain)
  offsets = []
  for weight in range(min(r, len(coords)) + 1):
    for combo in combinations(coords, weight):
      offsets.append(mask_of(combo))
  table = np.array(offsets, dtype=np.int64)
  table.setflags(write=False)
  return table


def ball_offsets(domain: CoordSet, r: int) -> np.ndarray:
  """Flip patterns T ⊆ *domain* with |T| ≤ r.

  Ordered by increasing weight, then lexicographically by sorted coordinates; the
  order is fixed so bundles and ball values stay addressable by position.
  """
  return _ball_offsets(domain, r)


def signs(point: int, n: int) -> np.ndarray:
  """The ±1 vector of a point."""
  return 1 - 2 * ((point >> np.arange(n)) & 1)


def point_of(sign_vector) -> int:
  return mask_of(i for i, value in enumerate(sign_vector) if value < 0)


def sign_matrix(points: np.ndarray, n: int) -> np.ndarray:
  """Rows of ±1 vectors for an array of points."""
  points = np.asarray(points, dtype=np.int64)
  return 1 - 2 * ((points[:, None] >> np.arange(n)) & 1)


def points_of(sign_rows: np.ndarray) -> np.ndarray:
  bits = (np.asarray(sign_rows) < 0).astype(np.int64)
  return bits @ (1 << np.arange(bits.shape[1], dtype=np.int64))
