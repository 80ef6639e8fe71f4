"""Conjunctions, labelled datasets, samplers and ball events.

Labels and conjunction values are ±1 with +1 meaning True. A positive literal on
coordinate i is satisfied when x_i = +1 (bit i clear), a negative literal when
x_i = −1 (bit i set).
"""

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from juntalab.errors import DataError, DomainError
from juntalab.utils.bits import CoordSet, bits_of, full_mask, popcounts

CONSTANTS = ('TRUE', 'FALSE')


@dataclass(frozen=True)
class Conjunction:
  positive: CoordSet = 0
  negative: CoordSet = 0
  constant_override: str | None = None

  def __post_init__(self):
    if self.constant_override not in (None, *CONSTANTS):
      raise DomainError(f'constant_override must be TRUE, FALSE or None, got {self.constant_override!r}')
    if self.positive & self.negative and self.constant_override is None:
      raise DomainError('a literal appears both positive and negative; use constant_override=FALSE')

  @classmethod
  def true(cls) -> 'Conjunction':
    return cls(constant_override='TRUE')

  @classmethod
  def false(cls) -> 'Conjunction':
    return cls(constant_override='FALSE')

  @property
  def size(self) -> int:
    return 0 if self.constant_override else (self.positive | self.negative).bit_count()

  def predict(self, points) -> np.ndarray:
    points = np.asarray(points, dtype=np.int64)
    if self.constant_override == 'TRUE':
      return np.ones(points.shape, dtype=np.int64)
    if self.constant_override == 'FALSE':
      return -np.ones(points.shape, dtype=np.int64)
    satisfied = ((points & self.positive) == 0) & ((points & self.negative) == self.negative)
    return np.where(satisfied, 1, -1)

  def error(self, data: 'LabeledDataset') -> float:
    return float(np.mean(self.predict(data.points) != data.labels)) if len(data) else 0.0

  def describe(self) -> str:
    if self.constant_override:
      return self.constant_override
    literals = [f'x{i}' for i in bits_of(self.positive)] + [f'¬x{i}' for i in bits_of(self.negative)]
    return ' ∧ '.join(literals) if literals else 'TRUE'

  def to_dict(self) -> dict:
    return {'positive': self.positive, 'negative': self.negative, 'constant_override': self.constant_override}

  @classmethod
  def from_dict(cls, data: dict) -> 'Conjunction':
    try:
      return cls(int(data.get('positive', 0)), int(data.get('negative', 0)), data.get('constant_override'))
    except (TypeError, ValueError) as e:
      raise DataError(f'malformed conjunction: {e}') from e


@dataclass(frozen=True, eq=False)
class LabeledDataset:
  n: int
  points: np.ndarray
  labels: np.ndarray

  def __post_init__(self):
    points = np.asarray(self.points, dtype=np.int64).reshape(-1)
    labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
    if points.shape != labels.shape:
      raise DomainError(f'{points.size} points but {labels.size} labels')
    if not np.all(np.abs(labels) == 1):
      raise DomainError('labels must be ±1')
    if points.size and (points.min() < 0 or points.max() > full_mask(self.n)):
      raise DomainError(f'points outside the {self.n}-dimensional cube')
    object.__setattr__(self, 'points', points)
    object.__setattr__(self, 'labels', labels)

  def __len__(self):
    return int(self.points.size)

  def select(self, keep) -> 'LabeledDataset':
    return LabeledDataset(self.n, self.points[keep], self.labels[keep])

  def positive_rate(self) -> float:
    return float(np.mean(self.labels == 1)) if len(self) else 0.0

  def write_csv(self, path: Path | str):
    """Rows 'x_bits,label' (coordinate 0 first, '1' meaning −1) plus a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = ['x_bits,label']
    for point, label in zip(self.points.tolist(), self.labels.tolist()):
      bits = ''.join('1' if point >> i & 1 else '0' for i in range(self.n))
      rows.append(f'{bits},{label}')
    path.write_text('\n'.join(rows) + '\n')
    path.with_suffix('.json').write_text(json.dumps({'n': self.n, 'count': len(self)}))

  @classmethod
  def read_csv(cls, path: Path | str) -> 'LabeledDataset':
    path = Path(path)
    try:
      meta = json.loads(path.with_suffix('.json').read_text())
      n = int(meta['n'])
      lines = path.read_text().splitlines()[1:]
      points, labels = [], []
      for line in lines:
        if not line.strip():
          continue
        bits, label = line.split(',')
        if len(bits) != n:
          raise DataError(f'{path}: row {bits!r} does not have {n} bits')
        points.append(sum(1 << i for i, bit in enumerate(bits) if bit == '1'))
        labels.append(int(label))
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as e:
      raise DataError(f'{path}: {e}') from e
    if len(points) != int(meta.get('count', len(points))):
      raise DataError(f'{path}: sidecar count {meta["count"]} but {len(points)} rows')
    return cls(n, np.array(points, dtype=np.int64), np.array(labels, dtype=np.int64))


class DatasetSampler(ABC):
  """Streaming draws of labelled examples from a distribution over {±1}^n × {±1}."""

  n: int

  @abstractmethod
  def draw(self, count: int, rng: np.random.Generator) -> LabeledDataset:
    """*count* independent examples."""


class EmpiricalSampler(DatasetSampler):
  """Uniform draws, with replacement, from a fixed dataset."""

  def __init__(self, data: LabeledDataset):
    if not len(data):
      raise DataError('cannot sample from an empty dataset')
    self.n = data.n
    self.data = data

  def draw(self, count, rng):
    return self.data.select(rng.integers(0, len(self.data), size=count))


class StreamSampler(DatasetSampler):
  """Serves the rows of a dataset in order, once each."""

  def __init__(self, data: LabeledDataset):
    self.n = data.n
    self.data = data
    self.position = 0

  def draw(self, count, rng):
    if self.position + count > len(self.data):
      raise DataError(f'sampler exhausted after {self.position} of {len(self.data)} rows')
    chunk = self.data.select(slice(self.position, self.position + count))
    self.position += count
    return chunk


@dataclass(frozen=True)
class BallEvent:
  """x belongs when it differs from the anchor on at most `radius` coordinates of const_coords."""

  n: int
  anchor: int
  const_coords: CoordSet
  radius: int

  def distance(self, points) -> np.ndarray:
    return popcounts((np.asarray(points, dtype=np.int64) ^ self.anchor) & self.const_coords)

  def contains(self, points) -> np.ndarray:
    return self.distance(points) <= self.radius

  def to_dict(self) -> dict:
    return {'n': self.n, 'anchor': self.anchor, 'const_coords': self.const_coords, 'radius': self.radius}

  @classmethod
  def from_dict(cls, data: dict) -> 'BallEvent':
    try:
      return cls(int(data['n']), int(data['anchor']), int(data['const_coords']), int(data['radius']))
    except (KeyError, TypeError, ValueError) as e:
      raise DataError(f'malformed ball event: {e}') from e
