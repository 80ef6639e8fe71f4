"""Instance generators: planted juntas, characters, random tables and conjunction data."""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from juntalab.errors import ConfigError
from juntalab.models.boolfn import BooleanFunction
from juntalab.models.conjunction import Conjunction, DatasetSampler, LabeledDataset
from juntalab.services.job_log_handling import log_info
from juntalab.utils.bits import CoordSet, bits_of, full_mask, mask_of

KINDS = ('junta', 'conjunction', 'character', 'random')
JUNTA_BASES = ('random', 'majority')
MARGINALS = ('uniform', 'biased')


@dataclass(frozen=True)
class InstanceSpec:
  kind: str = 'junta'
  n: int = 8
  k: int = 3
  eta: float = 0.0
  size: int = 4
  base: str = 'random'
  marginal: str = 'uniform'
  bias: float = 0.25
  count: int = 10_000

  def __post_init__(self):
    if self.kind not in KINDS:
      raise ConfigError(f'instance kind must be one of {KINDS}, got {self.kind!r}')
    if self.n < 1:
      raise ConfigError(f'n must be positive, got {self.n}')
    if not 0 <= self.k <= self.n:
      raise ConfigError(f'k={self.k} outside [0, {self.n}]')
    if not 0 <= self.eta <= 0.5:
      raise ConfigError(f'flip rate eta={self.eta} outside [0, 1/2]')
    if self.kind == 'conjunction' and not 0 <= self.size <= self.n:
      raise ConfigError(f'conjunction size {self.size} outside [0, {self.n}]')
    if self.base not in JUNTA_BASES:
      raise ConfigError(f'junta base must be one of {JUNTA_BASES}, got {self.base!r}')
    if self.marginal not in MARGINALS:
      raise ConfigError(f'marginal must be one of {MARGINALS}, got {self.marginal!r}')
    if not 0 < self.bias < 1:
      raise ConfigError(f'bias must lie in (0, 1), got {self.bias}')

  @classmethod
  def from_dict(cls, data: dict) -> 'InstanceSpec':
    known = set(cls.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
      raise ConfigError(f'unknown instance keys {sorted(unknown)}')
    types = {'kind': str, 'base': str, 'marginal': str, 'eta': float, 'bias': float}
    try:
      return cls(**{key: types.get(key, int)(value) for key, value in data.items()})
    except (TypeError, ValueError) as e:
      raise ConfigError(f'bad instance value: {e}') from e

  def to_dict(self) -> dict:
    return asdict(self)


class PlantedConjunctionSampler(DatasetSampler):
  """Points from a product marginal, labelled by *target* and flipped with probability eta."""

  def __init__(self, n: int, target: Conjunction, eta: float = 0.0, probabilities=None):
    self.n = n
    self.target = target
    self.eta = eta
    # probability that coordinate i is −1
    self.probabilities = np.full(n, 0.5) if probabilities is None else np.asarray(probabilities, dtype=float)

  def draw(self, count, rng):
    bits = rng.random((count, self.n)) < self.probabilities
    points = bits.astype(np.int64) @ (1 << np.arange(self.n, dtype=np.int64))
    labels = self.target.predict(points)
    labels = np.where(rng.random(count) < self.eta, -labels, labels)
    return LabeledDataset(self.n, points, labels)


@dataclass
class Instance:
  spec: InstanceSpec
  function: BooleanFunction | None = None
  dataset: LabeledDataset | None = None
  sampler: PlantedConjunctionSampler | None = None
  relevant: CoordSet = 0
  target: Conjunction | None = None
  flips: int = 0
  meta: dict = field(default_factory=dict)

  def to_dict(self) -> dict:
    return {
      'spec': self.spec.to_dict(),
      'relevant': self.relevant,
      'target': self.target.to_dict() if self.target is not None else None,
      'flips': self.flips,
      **self.meta,
    }


def planted_junta(n: int, R: CoordSet, base: BooleanFunction) -> BooleanFunction:
  """f(x) = base(x restricted to R), R's coordinates taken in increasing order."""
  coords = bits_of(R)
  points = np.arange(1 << n, dtype=np.int64)
  index = np.zeros(points.size, dtype=np.int64)
  for j, i in enumerate(coords):
    index |= ((points >> i) & 1) << j
  return BooleanFunction(n, base.values[index], base.bound)


def _junta(spec: InstanceSpec, rng: np.random.Generator) -> Instance:
  R = mask_of(int(i) for i in rng.choice(spec.n, size=spec.k, replace=False))
  if spec.base == 'majority':
    if spec.k % 2 == 0:
      raise ConfigError('a majority base needs odd k')
    base = BooleanFunction.majority(spec.k)
  else:
    base = BooleanFunction.random_sign(spec.k, rng)
  clean = planted_junta(spec.n, R, base)
  flipped = rng.random(clean.size) < spec.eta
  f = BooleanFunction(spec.n, np.where(flipped, -clean.values, clean.values), 1.0)
  return Instance(spec, function=f, relevant=R, flips=int(flipped.sum()))


def _conjunction(spec: InstanceSpec, rng: np.random.Generator) -> Instance:
  literals = [int(i) for i in rng.choice(spec.n, size=spec.size, replace=False)]
  negated = rng.random(spec.size) < 0.5
  target = Conjunction(
    mask_of(i for i, neg in zip(literals, negated) if not neg),
    mask_of(i for i, neg in zip(literals, negated) if neg),
  )
  probabilities = None
  if spec.marginal == 'biased':
    # each coordinate leans towards −1 or +1 by the bias
    probabilities = np.where(rng.random(spec.n) < 0.5, spec.bias, 1 - spec.bias)
  sampler = PlantedConjunctionSampler(spec.n, target, spec.eta, probabilities)
  data = sampler.draw(spec.count, rng)
  flips = int(np.sum(data.labels != target.predict(data.points)))
  return Instance(spec, dataset=data, sampler=sampler, target=target, flips=flips, relevant=target.positive | target.negative)


def generate_instance(spec: InstanceSpec, rng: np.random.Generator) -> Instance:
  if spec.kind == 'junta':
    instance = _junta(spec, rng)
  elif spec.kind == 'conjunction':
    instance = _conjunction(spec, rng)
  elif spec.kind == 'character':
    R = full_mask(min(spec.k + 1, spec.n))
    instance = Instance(spec, function=BooleanFunction.character(spec.n, R), relevant=R)
  else:
    instance = Instance(spec, function=BooleanFunction.random_sign(spec.n, rng), relevant=full_mask(spec.n))
  log_info(f'generated {spec.kind} instance', n=spec.n, relevant=instance.relevant, flips=instance.flips)
  return instance


def write_instance(instance: Instance, out: Path | str) -> list[Path]:
  """Truth table (JSON) or dataset (CSV + sidecar), plus instance.json describing it."""
  out = Path(out)
  out.mkdir(parents=True, exist_ok=True)
  written = []
  if instance.function is not None:
    path = out / 'function.json'
    instance.function.write_json(path)
    written.append(path)
  if instance.dataset is not None:
    path = out / 'dataset.csv'
    instance.dataset.write_csv(path)
    written.extend([path, path.with_suffix('.json')])
  meta = out / 'instance.json'
  meta.write_text(json.dumps(instance.to_dict(), indent=2, sort_keys=True))
  written.append(meta)
  return written
