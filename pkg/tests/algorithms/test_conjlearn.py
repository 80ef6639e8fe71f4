"""
Tests for the conjunction learner: hypotheses, ball events, L1 regression, the
AND approximator and the full learning loop on planted conjunctions.
"""

import numpy as np
import pytest

from juntalab.algorithms.conjlearn import (
  ConstantHypothesis,
  StitchedHypothesis,
  ThresholdPolynomial,
  agnostic_learn,
  and_approximator,
  ball_distribution_sampler,
  build_ball_event,
  empirical_error,
  feature_count,
  hypothesis_from_dict,
  is_useful_tuple,
  l1_regression,
  monomials_up_to,
)
from juntalab.algorithms.reference import exact_opt_conjunction
from juntalab.errors import CapacityError, DataError, DomainError
from juntalab.models.conjunction import BallEvent, Conjunction, LabeledDataset, StreamSampler
from juntalab.models.params import ParamSchedule
from juntalab.services.instances import InstanceSpec, PlantedConjunctionSampler, generate_instance
from juntalab.utils.bits import parity


# =============================================================================
# Fixtures
# =============================================================================


@pytest.fixture
def target():
  # x1 ∧ ¬x4
  return Conjunction(positive=0b00010, negative=0b10000)


@pytest.fixture
def sampler(target):
  return PlantedConjunctionSampler(8, target)


# =============================================================================
# Hypotheses
# =============================================================================


class TestHypotheses:
  def test_constant(self):
    h = ConstantHypothesis()
    assert h.predict(np.arange(3)).tolist() == [-1, -1, -1]
    data = LabeledDataset(2, np.arange(4), np.array([1, -1, -1, -1]))
    assert empirical_error(h, data) == pytest.approx(0.25)

  def test_threshold_polynomial(self):
    h = ThresholdPolynomial(2, np.array([0b01]), np.array([1.0]), 0.0)
    assert h.predict(np.arange(4)).tolist() == [1, -1, 1, -1]

  def test_stitched_is_negative_outside(self):
    event = BallEvent(3, 0b000, 0b100, 0)
    inner = ThresholdPolynomial(3, np.array([0]), np.array([1.0]), 0.0)
    h = StitchedHypothesis(event, inner)
    assert h.predict(np.array([0b000, 0b011, 0b100])).tolist() == [1, 1, -1]

  def test_export_round_trip(self):
    event = BallEvent(3, 0b001, 0b101, 1)
    inner = ThresholdPolynomial(3, np.array([0, 0b010, 0b011]), np.array([0.5, -1.0, 0.25]), 0.1)
    points = np.arange(8)
    for h in (ConstantHypothesis(1), inner, StitchedHypothesis(event, inner)):
      rebuilt = hypothesis_from_dict(h.to_dict())
      assert rebuilt.predict(points).tolist() == h.predict(points).tolist()

  @pytest.mark.parametrize('data', [{'kind': 'forest'}, {'kind': 'ball'}, {}])
  def test_bad_export(self, data):
    with pytest.raises(DataError):
      hypothesis_from_dict(data)


# =============================================================================
# Ball events and monomials
# =============================================================================


class TestBallEvent:
  def test_agreeing_coordinates_are_constant(self):
    event = build_ball_event([0b0011, 0b0001], 4)
    assert event.anchor == 0b0011
    assert event.const_coords == 0b1101
    assert event.radius == 3

  def test_explicit_radius(self):
    assert build_ball_event([5], 4, radius=1).radius == 1

  def test_needs_a_sample(self):
    with pytest.raises(DomainError):
      build_ball_event([], 4)


def test_monomials():
  assert monomials_up_to(3, 1).tolist() == [0, 1, 2, 4]
  assert feature_count(3, 1) == 4
  assert feature_count(3, 5) == 8
  assert len(monomials_up_to(5, 2)) == feature_count(5, 2)


# =============================================================================
# L1 regression
# =============================================================================


class TestL1Regression:
  def test_fits_a_character(self):
    points = np.arange(16)
    data = LabeledDataset(4, points, parity(0b0101, points).astype(np.int64))
    h, training_error = l1_regression(data, 2)
    assert training_error == 0.0
    assert h.predict(points).tolist() == data.labels.tolist()

  def test_fits_a_conjunction(self, target):
    points = np.arange(256)
    data = LabeledDataset(8, points, target.predict(points))
    h, training_error = l1_regression(data, 2, backend='highs')
    assert training_error == 0.0

  def test_empty(self):
    with pytest.raises(DomainError):
      l1_regression(LabeledDataset(3, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)), 1)

  def test_feature_cap(self):
    data = LabeledDataset(13, np.array([0]), np.array([1]))
    with pytest.raises(CapacityError):
      l1_regression(data, 13)


# =============================================================================
# Conditioned sampling and useful tuples
# =============================================================================


class TestBallDistributionSampler:
  def test_every_example_lies_in_the_event(self, sampler):
    event = BallEvent(8, 0, 0b11, 0)
    data = ball_distribution_sampler(sampler, event, 100, 10_000, np.random.default_rng(0))
    assert len(data) == 100
    assert np.all(event.contains(data.points))

  def test_draw_budget_limits_the_yield(self, sampler):
    event = BallEvent(8, 0, 0xFF, 0)
    data = ball_distribution_sampler(sampler, event, 100, 50, np.random.default_rng(1))
    assert len(data) < 100

  def test_exhausted_sampler(self):
    rows = LabeledDataset(2, np.arange(4), np.ones(4, dtype=np.int64))
    with pytest.raises(DataError):
      ball_distribution_sampler(StreamSampler(rows), BallEvent(2, 0, 0b11, 0), 10, 1000, np.random.default_rng(2))


class TestUsefulTuple:
  def test_positive_agreeing_tuple(self, target, sampler):
    reference = sampler.draw(2000, np.random.default_rng(3))
    # both satisfy the target and agree everywhere else, so the ball covers
    # every target-satisfying reference point within radius
    samples = LabeledDataset(8, np.array([0b00010000, 0b00010000]), np.array([1, 1]))
    assert is_useful_tuple(samples, target, reference, 0.25)

  def test_negative_label_disqualifies(self, target, sampler):
    reference = sampler.draw(200, np.random.default_rng(4))
    samples = LabeledDataset(8, np.array([0b00010000, 0b00010001]), np.array([1, -1]))
    assert not is_useful_tuple(samples, target, reference, 0.25)

  def test_target_must_hold(self, target, sampler):
    reference = sampler.draw(200, np.random.default_rng(5))
    samples = LabeledDataset(8, np.array([0b00000000]), np.array([1]))
    assert not is_useful_tuple(samples, target, reference, 0.25)


# =============================================================================
# AND approximator
# =============================================================================


class TestAndApproximator:
  def test_degree_formula(self):
    # 3·√4·ln 10 = 13.8
    approx = and_approximator(4, 4, 0.1)
    assert approx.delta == 4 and approx.degree == 14
    assert and_approximator(4, 9, 0.1).delta == 4
    assert and_approximator(3, 0, 0.1).degree == 0

  def test_one_when_satisfied_small_when_slack_fails(self):
    conj = Conjunction(positive=0b0011, negative=0b1100)
    approx = and_approximator(4, 2, 0.1)
    # all literals hold at 0b1100; each flipped literal costs 2 in the sum
    assert approx.on_points([0b1100], conj)[0] == pytest.approx(1.0)
    for failing in (0b1101, 0b1111, 0b0101):
      assert abs(approx.on_points([failing], conj)[0]) <= 0.1

  def test_zero_slack_is_constant(self):
    approx = and_approximator(3, 0, 0.2)
    assert approx.p(-3.0) == 1.0

  @pytest.mark.parametrize('eps', [0.0, 1.0])
  def test_eps_range(self, eps):
    with pytest.raises(DomainError):
      and_approximator(3, 1, eps)


# =============================================================================
# Learner
# =============================================================================


class TestAgnosticLearn:
  @pytest.fixture
  def sched(self):
    return ParamSchedule.desk().with_overrides({'learner_rounds': 120, 'regression_cap': 400, 'holdout_size': 4000})

  def test_noiseless_planted_conjunction(self, sampler, sched):
    result = agnostic_learn(sampler, 0.25, sched, np.random.default_rng(6))
    assert result.fitted >= 1
    assert result.holdout_error <= 0.05
    assert result.candidate_errors[0] == pytest.approx(0.25, abs=0.03)
    assert result.holdout_error == min(result.candidate_errors)
    assert result.to_dict()['rounds'] == 120

  def test_constant_wins_without_positive_tuples(self, sched):
    never = PlantedConjunctionSampler(6, Conjunction.false())
    result = agnostic_learn(never, 0.25, sched, np.random.default_rng(7))
    assert result.fitted == 0
    assert isinstance(result.hypothesis, ConstantHypothesis)
    assert result.holdout_error == 0.0

  @pytest.mark.parametrize('eps', [0.0, 1.0])
  def test_eps_range(self, sampler, sched, eps):
    with pytest.raises(DomainError):
      agnostic_learn(sampler, eps, sched, np.random.default_rng(8))

  def test_feature_cap(self, sched):
    wide = PlantedConjunctionSampler(40, Conjunction.true())
    with pytest.raises(CapacityError):
      agnostic_learn(wide, 0.01, sched, np.random.default_rng(9))

  @pytest.mark.slow
  def test_close_to_best_conjunction_under_label_noise(self):
    sched = ParamSchedule.desk().with_overrides({
      'learner_rounds': 60, 'regression_cap': 200, 'holdout_size': 4000, 'lp_backend': 'highs',
    })
    close = 0
    for seed in range(30):
      rng = np.random.default_rng(seed)
      sampler = generate_instance(InstanceSpec(kind='conjunction', n=10, size=4, eta=0.1), rng).sampler
      result = agnostic_learn(sampler, 0.1, sched, rng)
      evaluation = sampler.draw(2000, rng)
      opt, _ = exact_opt_conjunction(evaluation)
      close += result.hypothesis.error(evaluation) <= opt + 0.1
    assert close >= 20
