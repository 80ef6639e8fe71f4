"""Monte Carlo estimators over value oracles."""

import math

import numpy as np

from juntalab.errors import DomainError
from juntalab.oracles.value_oracle import ValueOracle


def hoeffding_queries(bound: float, eps: float, delta: float) -> int:
  """Queries so that a mean of [-bound, bound] draws is eps-close w.p. 1 - delta."""
  return max(1, math.ceil(2.0 * bound * bound * math.log(2.0 / delta) / (eps * eps)))


def _check_accuracy(eps: float, delta: float):
  if eps <= 0:
    raise DomainError(f'accuracy must be positive, got {eps}')
  if not 0 < delta < 1:
    raise DomainError(f'failure probability {delta} outside (0, 1)')


def estimate_values(
  o: ValueOracle,
  xs,
  eps: float,
  delta: float,
  rng: np.random.Generator,
  max_queries: int | None = None,
) -> np.ndarray:
  """estimate_value for every point of *xs*, batched into one oracle call."""
  _check_accuracy(eps, delta)
  xs = np.asarray(xs, dtype=np.int64)
  if o.deterministic:
    return o.query_many(xs, rng)
  count = hoeffding_queries(o.bound, eps, delta)
  if max_queries is not None:
    count = max(1, min(count, max_queries))
  answers = o.query_many(np.repeat(xs, count), rng).reshape(xs.size, count)
  return np.clip(answers.mean(axis=1), -o.bound, o.bound)


def estimate_value(
  o: ValueOracle,
  x: int,
  eps: float,
  delta: float,
  rng: np.random.Generator,
  max_queries: int | None = None,
) -> float:
  """Mean of O((M/eps)² log(1/delta)) queries at *x*, clamped to [-M, M].

  A deterministic oracle is asked once.
  """
  return float(estimate_values(o, np.array([x]), eps, delta, rng, max_queries)[0])


def l2_sample_size(bound: float, eps: float, delta: float) -> int:
  return math.ceil(1000.0 * bound**4 * math.log(1.0 / delta) / (eps * eps))


def estimate_l2(
  o: ValueOracle,
  eps: float,
  delta: float,
  rng: np.random.Generator,
  max_points: int | None = None,
  max_inner: int | None = None,
) -> float:
  """Estimate E_x[g(x)²]: N uniform points, the mean of N queries at each, squared and
  averaged, with N = 1000·M⁴·log(1/delta)/eps².

  Args:
    max_points, max_inner: caps on the two sample sizes.

  Returns:
    A value in [0, M²].
  """
  if not 0 < eps <= 0.25 or not 0 < delta <= 0.25:
    raise DomainError(f'estimate_l2 needs eps, delta in (0, 1/4], got {eps}, {delta}')
  size = l2_sample_size(o.bound, eps, delta)
  points = size if max_points is None else max(1, min(size, max_points))
  inner = 1 if o.deterministic else size if max_inner is None else max(1, min(size, max_inner))
  xs = rng.integers(0, 1 << o.arity, size=points, dtype=np.int64)
  answers = o.query_many(np.repeat(xs, inner), rng).reshape(points, inner)
  means = np.clip(answers.mean(axis=1), -o.bound, o.bound)
  return float(np.clip(np.mean(means * means), 0.0, o.bound * o.bound))


def low_variance_gap(values, probabilities) -> tuple[float, float]:
  """(E|X| - |E X|, stddev X) for a finite-support random variable.

  The first entry always lies in [0, stddev].
  """
  values = np.asarray(values, dtype=float)
  probabilities = np.asarray(probabilities, dtype=float)
  probabilities = probabilities / probabilities.sum()
  mean = float(probabilities @ values)
  spread = float(probabilities @ np.square(values - mean))
  return float(probabilities @ np.abs(values)) - abs(mean), math.sqrt(spread)
