"""
Tests for coordinate oracle sets. The external provider is faked with a mock.
"""

from unittest.mock import MagicMock

import numpy as np
import pytest

from juntalab.errors import DomainError, UnsupportedModeError
from juntalab.models.boolfn import BooleanFunction
from juntalab.oracles.coordinate import CoordinateOracleSet, coordinate_avg_oracle
from juntalab.oracles.value_oracle import exact_oracle


class TestIdentityOracles:
  def test_evaluate_reads_bits(self):
    oracles = CoordinateOracleSet.identity(4)
    assert oracles.evaluate(2, np.array([0b0100, 0b1011])).tolist() == [1, 0]

  def test_index_checked(self):
    with pytest.raises(DomainError):
      CoordinateOracleSet.identity(3).evaluate(3, np.array([0]))

  def test_avg_oracle_is_the_base(self):
    base = exact_oracle(BooleanFunction.constant(3, 1.0))
    assert coordinate_avg_oracle(base, CoordinateOracleSet.identity(3)) is base

  def test_arity_must_match(self):
    base = exact_oracle(BooleanFunction.constant(3, 1.0))
    with pytest.raises(DomainError):
      coordinate_avg_oracle(base, CoordinateOracleSet.identity(4))


class TestExternalOracles:
  def test_unknown_mode(self):
    with pytest.raises(UnsupportedModeError):
      CoordinateOracleSet(3, mode='quantum')

  def test_missing_provider(self):
    oracles = CoordinateOracleSet(3, mode='external')
    with pytest.raises(UnsupportedModeError):
      oracles.evaluate(0, np.array([0]))
    with pytest.raises(UnsupportedModeError):
      coordinate_avg_oracle(exact_oracle(BooleanFunction.constant(5, 1.0)), oracles)

  def test_provider_is_consulted(self):
    provider = MagicMock()
    provider.evaluate.return_value = np.array([1])
    sentinel = object()
    provider.conditional_oracle.return_value = sentinel
    oracles = CoordinateOracleSet(2, mode='external', provider=provider)
    assert oracles.evaluate(1, np.array([7])).tolist() == [1]
    base = exact_oracle(BooleanFunction.constant(6, 1.0))
    assert coordinate_avg_oracle(base, oracles) is sentinel
    provider.conditional_oracle.assert_called_once_with(base, oracles)
