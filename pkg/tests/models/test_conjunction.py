"""
Tests for conjunctions, labelled datasets, samplers and ball events.

Truth convention: +1 is True, bit i set means x_i = -1, so a positive literal on
coordinate i holds exactly when bit i is clear.
"""

import numpy as np
import pytest

from juntalab.errors import DataError, DomainError
from juntalab.models.conjunction import (
  BallEvent,
  Conjunction,
  EmpiricalSampler,
  LabeledDataset,
  StreamSampler,
)


def _dataset(points, labels, n=3):
  return LabeledDataset(n, np.array(points), np.array(labels))


# =============================================================================
# Conjunction
# =============================================================================


class TestConjunction:
  def test_literal_semantics(self):
    # x0 ∧ ¬x2
    c = Conjunction(positive=0b001, negative=0b100)
    assert c.predict(np.array([0b100, 0b000, 0b101, 0b110])).tolist() == [1, -1, -1, 1]
    assert c.size == 2
    assert c.describe() == 'x0 ∧ ¬x2'

  def test_constants(self):
    points = np.arange(4)
    assert Conjunction.true().predict(points).tolist() == [1, 1, 1, 1]
    assert Conjunction.false().predict(points).tolist() == [-1, -1, -1, -1]
    assert Conjunction.true().size == 0
    assert Conjunction().describe() == 'TRUE'
    assert Conjunction.false().describe() == 'FALSE'

  def test_contradiction_needs_override(self):
    with pytest.raises(DomainError):
      Conjunction(positive=0b1, negative=0b1)
    assert Conjunction(0b1, 0b1, 'FALSE').predict(np.array([0])).tolist() == [-1]

  def test_bad_override(self):
    with pytest.raises(DomainError):
      Conjunction(constant_override='MAYBE')

  def test_error(self):
    c = Conjunction(positive=0b1)
    data = _dataset([0, 1, 2, 3], [1, 1, 1, -1])
    assert c.error(data) == pytest.approx(0.25)

  def test_record(self):
    c = Conjunction(0b010, 0b001)
    assert Conjunction.from_dict(c.to_dict()) == c
    with pytest.raises(DataError):
      Conjunction.from_dict({'positive': 'x'})


# =============================================================================
# LabeledDataset
# =============================================================================


class TestLabeledDataset:
  @pytest.mark.parametrize(
    'points,labels',
    [([0, 1], [1]), ([0, 1], [1, 0]), ([0, 8], [1, 1]), ([-1], [1])],
  )
  def test_validation(self, points, labels):
    with pytest.raises(DomainError):
      _dataset(points, labels)

  def test_select_and_rate(self):
    data = _dataset([0, 1, 2, 3], [1, -1, 1, 1])
    assert len(data.select(data.labels == 1)) == 3
    assert data.positive_rate() == pytest.approx(0.75)
    assert _dataset([], []).positive_rate() == 0.0

  def test_csv_layout(self, tmp_path):
    path = tmp_path / 'data.csv'
    _dataset([0b001, 0b110], [1, -1]).write_csv(path)
    assert path.read_text().splitlines() == ['x_bits,label', '100,1', '011,-1']
    loaded = LabeledDataset.read_csv(path)
    assert loaded.points.tolist() == [0b001, 0b110]
    assert loaded.labels.tolist() == [1, -1]

  def test_csv_count_mismatch(self, tmp_path):
    path = tmp_path / 'data.csv'
    _dataset([0, 1], [1, 1]).write_csv(path)
    path.with_suffix('.json').write_text('{"n": 3, "count": 5}')
    with pytest.raises(DataError):
      LabeledDataset.read_csv(path)

  def test_csv_bad_row(self, tmp_path):
    path = tmp_path / 'data.csv'
    _dataset([0], [1]).write_csv(path)
    path.write_text('x_bits,label\n10,1\n')
    with pytest.raises(DataError):
      LabeledDataset.read_csv(path)

  def test_csv_missing_sidecar(self, tmp_path):
    path = tmp_path / 'data.csv'
    path.write_text('x_bits,label\n')
    with pytest.raises(DataError):
      LabeledDataset.read_csv(path)


# =============================================================================
# Samplers
# =============================================================================


class TestSamplers:
  def test_empirical_draws_from_rows(self):
    data = _dataset([1, 2], [1, -1])
    drawn = EmpiricalSampler(data).draw(50, np.random.default_rng(0))
    assert len(drawn) == 50
    assert set(drawn.points.tolist()) <= {1, 2}
    assert np.all(drawn.labels == np.where(drawn.points == 1, 1, -1))

  def test_empirical_needs_rows(self):
    with pytest.raises(DataError):
      EmpiricalSampler(_dataset([], []))

  def test_stream_serves_in_order_then_runs_out(self):
    sampler = StreamSampler(_dataset([0, 1, 2], [1, 1, -1]))
    rng = np.random.default_rng(1)
    assert sampler.draw(2, rng).points.tolist() == [0, 1]
    assert sampler.draw(1, rng).points.tolist() == [2]
    with pytest.raises(DataError):
      sampler.draw(1, rng)


# =============================================================================
# BallEvent
# =============================================================================


class TestBallEvent:
  def test_distance_counts_constant_coordinates_only(self):
    event = BallEvent(4, 0b0000, 0b0011, 1)
    points = np.array([0b0000, 0b0001, 0b0011, 0b1100])
    assert event.distance(points).tolist() == [0, 1, 2, 0]
    assert event.contains(points).tolist() == [True, True, False, True]

  def test_record(self):
    event = BallEvent(5, 0b10101, 0b00111, 2)
    assert BallEvent.from_dict(event.to_dict()) == event
    with pytest.raises(DataError):
      BallEvent.from_dict({'n': 5})
