"""Randomised bounded query access to functions on the hypercube.

An oracle answers batches of points (bitmask-encoded int64 arrays) with reals in
[-bound, bound] whose mean equals the function it represents. Wrappers compose:
noise, averaging, SharpNoise mixtures and derivatives all forward to an inner
oracle, and every oracle counts the base-function calls made through it.
"""

import threading
from abc import ABC, abstractmethod

import numpy as np

from juntalab.algorithms.fourier import average_over, noise_operator, sample_noise_points
from juntalab.errors import BudgetExceeded, DomainError
from juntalab.models.boolfn import BooleanFunction
from juntalab.utils.bits import CoordSet, full_mask


class QueryCounter:
  """Thread-safe running total of base-function calls, with an optional budget."""

  def __init__(self, budget: int | None = None):
    self._count = 0
    self._lock = threading.Lock()
    self.budget = budget

  @property
  def count(self) -> int:
    return self._count

  def add(self, amount: int):
    with self._lock:
      self._count += int(amount)
      used = self._count
    if self.budget is not None and used > self.budget:
      raise BudgetExceeded(used, self.budget)

  @staticmethod
  def merged(*counters: 'QueryCounter') -> int:
    return sum(counter.count for counter in counters)


class ValueOracle(ABC):
  arity: int
  bound: float
  calls_per_query: int
  deterministic: bool = False

  def __init__(self, arity: int, bound: float, calls_per_query: int = 1):
    self.arity = arity
    self.bound = float(bound)
    self.calls_per_query = calls_per_query
    self.counter = QueryCounter()

  @abstractmethod
  def _evaluate(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One randomised answer per point."""

  def represented(self) -> BooleanFunction | None:
    """The function this oracle computes in expectation, when it can be tabulated."""
    return None

  def query_many(self, xs, rng: np.random.Generator) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.int64)
    values = np.asarray(self._evaluate(xs, rng), dtype=float)
    self.counter.add(self.calls_per_query * xs.size)
    return values

  def query(self, x: int, rng: np.random.Generator) -> float:
    return float(self.query_many(np.array([x], dtype=np.int64), rng)[0])

  @property
  def query_count(self) -> int:
    return self.counter.count

  def __repr__(self):
    return f'{type(self).__name__}(arity={self.arity}, bound={self.bound:g})'


class ExactOracle(ValueOracle):
  deterministic = True

  def __init__(self, f: BooleanFunction):
    super().__init__(f.n, f.bound, 1)
    self.function = f

  def _evaluate(self, xs, rng):
    return self.function.values[xs]

  def represented(self) -> BooleanFunction:
    return self.function


class BernoulliOracle(ValueOracle):
  """Answers ±bound with mean f(x): a genuinely randomised base oracle."""

  def __init__(self, f: BooleanFunction, bound: float | None = None):
    bound = f.bound if bound is None else bound
    if bound <= 0:
      raise DomainError('Bernoulli oracle needs a positive bound')
    super().__init__(f.n, bound, 1)
    self.function = f

  def _evaluate(self, xs, rng):
    means = self.function.values[xs] / self.bound
    plus = rng.random(xs.shape) < (1.0 + means) / 2.0
    return np.where(plus, self.bound, -self.bound)

  def represented(self) -> BooleanFunction:
    return self.function.with_bound(self.bound)


class NoisyOracle(ValueOracle):
  """T_rho on *coords*: resample each coordinate of *coords* with probability 1 - rho."""

  def __init__(self, inner: ValueOracle, rho: float, coords: CoordSet):
    if not 0.0 <= rho <= 1.0:
      raise DomainError(f'noise rate {rho} outside [0, 1]')
    super().__init__(inner.arity, inner.bound, inner.calls_per_query)
    self.inner = inner
    self.rho = rho
    self.coords = coords & full_mask(inner.arity)
    self.deterministic = inner.deterministic and (rho == 1.0 or self.coords == 0)

  def _evaluate(self, xs, rng):
    if self.rho == 1.0 or self.coords == 0:
      return self.inner.query_many(xs, rng)
    ys = sample_noise_points(xs, self.rho, self.coords, self.arity, rng)
    return self.inner.query_many(ys, rng)

  def represented(self):
    inner = self.inner.represented()
    return None if inner is None else noise_operator(inner, self.rho, self.coords)


class AveragedOracle(ValueOracle):
  """g averaged over *coords*: the coordinates of *coords* are redrawn uniformly."""

  def __init__(self, inner: ValueOracle, coords: CoordSet):
    super().__init__(inner.arity, inner.bound, inner.calls_per_query)
    self.inner = inner
    self.coords = coords & full_mask(inner.arity)
    self.deterministic = inner.deterministic and self.coords == 0

  def _evaluate(self, xs, rng):
    if self.coords == 0:
      return self.inner.query_many(xs, rng)
    ys = sample_noise_points(xs, 0.0, self.coords, self.arity, rng)
    return self.inner.query_many(ys, rng)

  def represented(self):
    inner = self.inner.represented()
    return None if inner is None else average_over(inner, self.coords)


def exact_oracle(f: BooleanFunction) -> ExactOracle:
  return ExactOracle(f)


def noisy_oracle(o: ValueOracle, rho: float, coords: CoordSet) -> NoisyOracle:
  return NoisyOracle(o, rho, coords)


def averaged_oracle(o: ValueOracle, coords: CoordSet) -> ValueOracle:
  return AveragedOracle(o, coords)
