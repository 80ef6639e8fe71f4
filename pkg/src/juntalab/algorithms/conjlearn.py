"""Agnostic learning of conjunctions by ball restriction and L1 polynomial regression.

Each round draws m = ⌈n^{1/3}⌉ labelled examples. When all are positive they fix a
ball event (the coordinates on which they agree, a radius of ⌈n^{2/3}⌉ around the
first one); a degree-d L1 regression fitted on the data conditioned on that event
gives a hypothesis that answers inside the ball and says −1 outside. The final
hypothesis is whichever candidate, the constant −1 included, has the lowest error
on a fresh holdout sample.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from juntalab.algorithms.flatpoly import chebyshev_eval
from juntalab.errors import CapacityError, DataError, DomainError
from juntalab.models.conjunction import BallEvent, Conjunction, DatasetSampler, LabeledDataset
from juntalab.models.params import ParamSchedule, ceil_root
from juntalab.services.job_log_handling import log_debug, log_info
from juntalab.utils.bits import full_mask, k_subsets, parity
from juntalab.utils.simplex import l1_fit

MAX_FEATURES = 5000


class Hypothesis(ABC):
  @abstractmethod
  def predict(self, points) -> np.ndarray:
    """±1 prediction for every point."""

  @abstractmethod
  def to_dict(self) -> dict:
    pass

  def error(self, data: LabeledDataset) -> float:
    return empirical_error(self, data)


@dataclass(frozen=True)
class ConstantHypothesis(Hypothesis):
  value: int = -1

  def predict(self, points):
    return np.full(np.asarray(points).shape, self.value, dtype=np.int64)

  def to_dict(self):
    return {'kind': 'constant', 'value': self.value}


@dataclass(frozen=True, eq=False)
class ThresholdPolynomial(Hypothesis):
  """sign(p(x) − threshold) with p = Σ_S w_S χ_S, ties going to +1."""

  n: int
  monomials: np.ndarray
  weights: np.ndarray
  threshold: float

  def values(self, points) -> np.ndarray:
    return _features(np.asarray(points, dtype=np.int64).reshape(-1), self.monomials) @ self.weights

  def predict(self, points):
    return np.where(self.values(points) >= self.threshold, 1, -1)

  def to_dict(self):
    return {
      'kind': 'threshold_polynomial',
      'n': self.n,
      'coefficients': {str(int(S)): float(w) for S, w in zip(self.monomials, self.weights) if w != 0.0},
      'threshold': float(self.threshold),
    }


@dataclass(frozen=True, eq=False)
class StitchedHypothesis(Hypothesis):
  """The fitted hypothesis inside the ball event, −1 outside it."""

  event: BallEvent
  inner: ThresholdPolynomial

  def predict(self, points):
    points = np.asarray(points, dtype=np.int64)
    return np.where(self.event.contains(points), self.inner.predict(points), -1)

  def to_dict(self):
    inner = self.inner.to_dict()
    return {
      'kind': 'ball',
      'ball_event': self.event.to_dict(),
      'coefficients': inner['coefficients'],
      'threshold': inner['threshold'],
    }


def empirical_error(h: Hypothesis, data: LabeledDataset) -> float:
  if not len(data):
    return 0.0
  return float(np.mean(h.predict(data.points) != data.labels))


def build_ball_event(points, n: int, radius: int | None = None) -> BallEvent:
  points = np.asarray(points, dtype=np.int64).reshape(-1)
  if points.size == 0:
    raise DomainError('a ball event needs at least one sample')
  anchor = int(points[0])
  differs = int(np.bitwise_or.reduce(points ^ anchor))
  const = full_mask(n) & ~differs
  return BallEvent(n, anchor, const, ceil_root(n * n, 3) if radius is None else radius)


def monomials_up_to(n: int, d: int) -> np.ndarray:
  """Every S ⊆ [n] with |S| ≤ d, by size and then lexicographically."""
  universe = full_mask(n)
  return np.array([S for j in range(min(d, n) + 1) for S in k_subsets(universe, j)], dtype=np.int64)


def feature_count(n: int, d: int) -> int:
  return sum(math.comb(n, j) for j in range(min(d, n) + 1))


def _features(points: np.ndarray, monomials: np.ndarray) -> np.ndarray:
  if monomials.size == 0:
    return np.zeros((points.size, 0))
  return np.stack([parity(int(S), points) for S in monomials], axis=1).astype(float)


def _best_threshold(values: np.ndarray, labels: np.ndarray) -> tuple[float, int]:
  """Threshold among the sample values (or +inf) with fewest mistakes; ties go to the larger one."""
  order = np.argsort(values, kind='stable')
  ordered, ys = values[order], labels[order]
  thresholds = np.append(np.unique(ordered), np.inf)
  below = np.searchsorted(ordered, thresholds, side='left')
  positives = np.concatenate([[0], np.cumsum(ys == 1)])
  negatives = np.concatenate([[0], np.cumsum(ys == -1)])
  mistakes = positives[below] + (negatives[-1] - negatives[below])
  pick = int(np.flatnonzero(mistakes == mistakes.min())[-1])
  return float(thresholds[pick]), int(mistakes[pick])


def l1_regression(data: LabeledDataset, d: int, backend: str = 'simplex') -> tuple[ThresholdPolynomial, float]:
  """Degree-d L1 polynomial regression followed by the best empirical threshold.

  Returns:
    (hypothesis, training error)
  """
  if not len(data):
    raise DomainError('cannot fit an empty dataset')
  width = feature_count(data.n, d)
  if width > MAX_FEATURES:
    raise CapacityError(f'{width} monomials of degree ≤ {d} over n={data.n}, above {MAX_FEATURES}')
  monomials = monomials_up_to(data.n, d)
  features = _features(data.points, monomials)
  weights, loss = l1_fit(features, data.labels.astype(float), backend)
  threshold, mistakes = _best_threshold(features @ weights, data.labels)
  log_debug('l1 regression', samples=len(data), features=width, loss=round(loss, 6), mistakes=mistakes)
  return ThresholdPolynomial(data.n, monomials, weights, threshold), mistakes / len(data)


def ball_distribution_sampler(
  sampler: DatasetSampler,
  event: BallEvent,
  count: int,
  max_draws: int,
  rng: np.random.Generator,
) -> LabeledDataset:
  """Up to *count* examples from the data conditioned on *event*, from at most *max_draws* draws.

  Fewer than *count* come back when the draw budget runs out first; an exhausted
  sampler raises DataError.
  """
  kept_points, kept_labels, accepted, drawn = [], [], 0, 0
  while accepted < count and drawn < max_draws:
    batch = sampler.draw(min(max_draws - drawn, max(2 * count, 256)), rng)
    drawn += len(batch)
    inside = batch.select(event.contains(batch.points))
    take = min(count - accepted, len(inside))
    kept_points.append(inside.points[:take])
    kept_labels.append(inside.labels[:take])
    accepted += take
  if not kept_points:
    return LabeledDataset(sampler.n, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
  return LabeledDataset(sampler.n, np.concatenate(kept_points), np.concatenate(kept_labels))


def is_useful_tuple(samples: LabeledDataset, target: Conjunction, reference: LabeledDataset, eps: float) -> bool:
  """All samples are positive and satisfy *target*, and their ball event holds on at least
  a 1 − eps fraction of the reference examples that are positive and satisfy *target*."""
  if not len(samples) or np.any(samples.labels != 1) or np.any(target.predict(samples.points) != 1):
    return False
  event = build_ball_event(samples.points, samples.n)
  agreeing = reference.points[(reference.labels == 1) & (target.predict(reference.points) == 1)]
  if agreeing.size == 0:
    return False
  return float(np.mean(event.contains(agreeing))) >= 1 - eps


@dataclass(frozen=True)
class AndApproximator:
  """q(t) = T_d(t/Δ)/T_d((Δ+1)/Δ), composed as p(x) = q(Σ literals − (s − Δ) + 1).

  With literals valued ±1, p is 1 where all s literals hold and within eps of 0
  where at most Δ of them fail.
  """

  s: int
  delta: int
  degree: int
  eps: float

  def q(self, t: float) -> float:
    if self.delta == 0:
      return 1.0
    scale = chebyshev_eval(self.degree, (self.delta + 1) / self.delta)
    return chebyshev_eval(self.degree, t / self.delta) / scale

  def p(self, literal_sum: float) -> float:
    return self.q(literal_sum - (self.s - self.delta) + 1)

  def on_points(self, points, conjunction: Conjunction) -> np.ndarray:
    """p at each point, reading the literals of *conjunction* as ±1."""
    points = np.asarray(points, dtype=np.int64).reshape(-1)
    positive = conjunction.positive.bit_count() - 2 * np.bitwise_count(points & conjunction.positive)
    negative = 2 * np.bitwise_count(points & conjunction.negative) - conjunction.negative.bit_count()
    return np.array([self.p(float(total)) for total in (positive + negative).tolist()])


def and_approximator(s: int, slack: int, eps: float) -> AndApproximator:
  if not 0 < eps < 1:
    raise DomainError(f'eps must lie in (0, 1), got {eps}')
  delta = max(0, min(slack, s))
  degree = math.ceil(3 * math.sqrt(delta) * math.log(1 / eps)) if delta else 0
  return AndApproximator(s, delta, degree, eps)


@dataclass
class LearnResult:
  hypothesis: Hypothesis
  holdout_error: float
  candidate_errors: list[float] = field(default_factory=list)
  rounds: int = 0
  fitted: int = 0
  degree: int = 0
  samples_per_fit: int = 0

  def to_dict(self) -> dict:
    return {
      'hypothesis': self.hypothesis.to_dict(),
      'holdout_error': self.holdout_error,
      'candidate_errors': self.candidate_errors,
      'rounds': self.rounds,
      'fitted': self.fitted,
      'degree': self.degree,
      'samples_per_fit': self.samples_per_fit,
    }


def agnostic_learn(sampler: DatasetSampler, eps: float, sched: ParamSchedule, rng: np.random.Generator) -> LearnResult:
  """Candidates h_0 ≡ −1 and one stitched hypothesis per useful-looking round; keep the holdout winner."""
  if not 0 < eps < 1:
    raise DomainError(f'eps must lie in (0, 1), got {eps}')
  n = sampler.n
  m = ceil_root(n, 3)
  degree = sched.learner_degree(n, eps)
  width = feature_count(n, degree)
  if width > MAX_FEATURES:
    raise CapacityError(f'{width} monomials of degree ≤ {degree} over n={n}, above {MAX_FEATURES}')
  count = sched.regression_samples(width, eps)
  budget = math.ceil(sched.rejection_factor * count / eps)
  candidates: list[Hypothesis] = [ConstantHypothesis(-1)]
  for round_, stream in enumerate(rng.spawn(sched.learner_rounds)):
    tuple_ = sampler.draw(m, stream)
    if np.any(tuple_.labels != 1):
      continue
    event = build_ball_event(tuple_.points, n)
    conditioned = ball_distribution_sampler(sampler, event, count, budget, stream)
    if len(conditioned) < count:
      log_debug('ball event too rare, round skipped', round=round_, accepted=len(conditioned), needed=count)
      continue
    inner, training_error = l1_regression(conditioned, degree, sched.lp_backend)
    candidates.append(StitchedHypothesis(event, inner))
    log_debug('round fitted', round=round_, const=event.const_coords, training_error=training_error)

  holdout = sampler.draw(sched.holdout(n, eps), rng)
  errors = [h.error(holdout) for h in candidates]
  best = int(np.argmin(errors))
  log_info(f'learner: {len(candidates) - 1} fitted rounds, best holdout error {errors[best]:.4f}', degree=degree)
  return LearnResult(candidates[best], errors[best], errors, sched.learner_rounds, len(candidates) - 1, degree, count)


def hypothesis_from_dict(data: dict) -> Hypothesis:
  """Rebuild an exported hypothesis."""
  try:
    kind = data['kind']
    if kind == 'constant':
      return ConstantHypothesis(int(data['value']))
    if kind in ('threshold_polynomial', 'ball'):
      event = BallEvent.from_dict(data['ball_event']) if kind == 'ball' else None
      n = event.n if event is not None else int(data['n'])
      coefficients = {int(S): float(w) for S, w in data['coefficients'].items()}
      monomials = np.array(sorted(coefficients, key=lambda S: (S.bit_count(), S)), dtype=np.int64)
      weights = np.array([coefficients[int(S)] for S in monomials], dtype=float)
      inner = ThresholdPolynomial(n, monomials, weights, float(data['threshold']))
      return StitchedHypothesis(event, inner) if event is not None else inner
  except (KeyError, TypeError, ValueError) as e:
    raise DataError(f'malformed hypothesis: {e}') from e
  raise DataError(f'unknown hypothesis kind {kind!r}')
