"""Coordinate oracles: the reduction from n variables to k' surrogate coordinates.

Only the identity provider (k' = n, oracle i returns x_i) ships here. An external
provider plugs in through `CoordinateOracleProvider`; it must

  1. expose k' evaluable coordinate predicates on the base domain,
  2. with each relevant coordinate of the target captured by some oracle,
  3. at the configured confidence,
  4. and supply an oracle for g(y) = E[f(x) | oracle outputs = y].
"""

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from juntalab.errors import DomainError, UnsupportedModeError
from juntalab.oracles.value_oracle import ValueOracle

PROVIDER_MODES = ('identity', 'external')


class CoordinateOracleProvider(Protocol):
  def evaluate(self, index: int, points: np.ndarray) -> np.ndarray: ...

  def conditional_oracle(self, base: ValueOracle, oracles: 'CoordinateOracleSet') -> ValueOracle: ...


@dataclass
class CoordinateOracleSet:
  k_prime: int
  mode: str = 'identity'
  provider: CoordinateOracleProvider | None = None
  confidence: float = 0.0

  def __post_init__(self):
    if self.mode not in PROVIDER_MODES:
      raise UnsupportedModeError(f'unknown coordinate oracle mode {self.mode!r}')

  @classmethod
  def identity(cls, n: int) -> 'CoordinateOracleSet':
    return cls(k_prime=n)

  def evaluate(self, index: int, points) -> np.ndarray:
    """Oracle *index* at each point, as 0/1 bits in the bitmask encoding."""
    if not 0 <= index < self.k_prime:
      raise DomainError(f'oracle index {index} outside 0..{self.k_prime - 1}')
    points = np.asarray(points, dtype=np.int64)
    if self.mode == 'identity':
      return (points >> index) & 1
    if self.provider is None:
      raise UnsupportedModeError('external coordinate oracles need a provider')
    return self.provider.evaluate(index, points)


def coordinate_avg_oracle(base: ValueOracle, oracles: CoordinateOracleSet) -> ValueOracle:
  """Oracle on k' coordinates for g(y) = E[f | oracle outputs = y]."""
  if oracles.mode == 'identity':
    if oracles.k_prime != base.arity:
      raise DomainError(f'identity oracles need k\' = n, got {oracles.k_prime} != {base.arity}')
    return base
  if oracles.provider is None:
    raise UnsupportedModeError('external coordinate oracles need a provider')
  return oracles.provider.conditional_oracle(base, oracles)
