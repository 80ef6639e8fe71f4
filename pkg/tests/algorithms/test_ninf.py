"""
Tests for normalized influences: the exact formula, the derivative, the
sampling estimator and level-set sampling.
"""

import math

import numpy as np
import pytest

from juntalab.algorithms.fourier import wht
from juntalab.algorithms.ninf import (
  NinfEstimateParams,
  derivative_fn,
  estimate_ninf,
  integral_identity_check,
  ninf_trials,
  norm_inf_exact,
  norm_inf_table,
  sample_level_set,
)
from juntalab.errors import DomainError, EmptyDistributionError, UnsupportedModeError
from juntalab.models.boolfn import BooleanFunction
from juntalab.oracles.value_oracle import exact_oracle


# =============================================================================
# Exact values
# =============================================================================


class TestNormInfExact:
  def test_character(self):
    spec = wht(BooleanFunction.character(4, 0b0111))
    assert norm_inf_exact(spec, 0b0001) == pytest.approx(1 / 3)
    assert norm_inf_exact(spec, 0b0011) == pytest.approx(1 / 3)
    assert norm_inf_exact(spec, 0b1000) == 0.0

  def test_empty_set_is_total_weight(self):
    spec = wht(BooleanFunction.random_bounded(4, np.random.default_rng(0)))
    assert norm_inf_exact(spec, 0) == pytest.approx(spec.total_weight())

  def test_table_covers_level(self):
    spec = wht(BooleanFunction.character(4, 0b0110))
    table = norm_inf_table(spec, 1)
    assert sorted(table) == [1, 2, 4, 8]
    assert table[2] == pytest.approx(0.5) and table[1] == 0.0

  @pytest.mark.parametrize('U', [0b001, 0b011, 0b111])
  def test_integral_identity(self, U):
    spec = wht(BooleanFunction.random_bounded(5, np.random.default_rng(1)))
    lhs, rhs = integral_identity_check(spec, U)
    assert lhs == pytest.approx(rhs, abs=1e-12)


class TestDerivative:
  def test_spectrum_shifts_down(self):
    f = BooleanFunction.random_bounded(4, np.random.default_rng(2))
    U = 0b0101
    g = wht(derivative_fn(f, U))
    spec = wht(f)
    for T in range(16):
      expected = 0.0 if T & U else spec[T | U]
      assert g[T] == pytest.approx(expected, abs=1e-12)

  def test_oracle_matches_table(self):
    f = BooleanFunction.random_bounded(3, np.random.default_rng(3))
    o = derivative_fn(exact_oracle(f), 0b011)
    answers = o.query_many(np.arange(8), np.random.default_rng(4))
    assert answers == pytest.approx(derivative_fn(f, 0b011).values)
    assert o.calls_per_query == 4

  @pytest.mark.parametrize('U', [0b0001, 0b0101, 0b0111])
  def test_oracle_makes_one_base_call_per_subcube_point(self, U):
    base = exact_oracle(BooleanFunction.random_bounded(4, np.random.default_rng(10)))
    o = derivative_fn(base, U)
    o.query_many(np.arange(5), np.random.default_rng(11))
    assert base.query_count == 5 * 2 ** bin(U).count('1')
    assert o.query_count == base.query_count

  def test_order_cap(self):
    with pytest.raises(DomainError):
      derivative_fn(BooleanFunction.constant(7, 1.0), 0b1111111)


# =============================================================================
# Estimator
# =============================================================================


class TestEstimateParams:
  def test_trials_formula_and_cap(self):
    p = NinfEstimateParams(1.0, 1.0, math.exp(-1))
    assert p.trials(0) == 1000
    assert p.trials(2) == 16000
    capped = NinfEstimateParams(1.0, 1.0, math.exp(-1), max_trials=50)
    assert capped.trials(2) == 50

  @pytest.mark.parametrize('eps,delta', [(0.0, 0.1), (0.5, 0.25)])
  def test_ranges(self, eps, delta):
    with pytest.raises(DomainError):
      NinfEstimateParams(1.0, eps, delta)

  def test_mode(self):
    with pytest.raises(UnsupportedModeError):
      NinfEstimateParams(1.0, 0.1, 0.1, mode='direct')


class TestEstimateNinf:
  def test_paired_estimate_of_character(self):
    # chi on {0, 1}: NormInf of {0} is 1/2
    f = BooleanFunction.character(3, 0b011)
    p = NinfEstimateParams(1.0, 0.1, 0.05, max_trials=200_000)
    estimate = estimate_ninf(exact_oracle(f), 0b001, p, np.random.default_rng(5))
    assert estimate == pytest.approx(0.5, abs=0.02)

  def test_irrelevant_coordinate(self):
    f = BooleanFunction.character(3, 0b011)
    p = NinfEstimateParams(1.0, 0.1, 0.05, max_trials=20_000)
    assert estimate_ninf(exact_oracle(f), 0b100, p, np.random.default_rng(6)) == 0.0

  def test_paired_trials_are_signed(self):
    f = BooleanFunction.character(3, 0b011)
    p = NinfEstimateParams(1.0, 0.1, 0.05, max_trials=5000)
    values = ninf_trials(exact_oracle(f), 0b001, p, np.random.default_rng(12))
    assert values.size == 5000
    assert values.min() >= -1.0 and values.max() <= 1.0
    assert np.any(values < 0)

  def test_estimate_clamped_to_range(self):
    f = BooleanFunction.character(3, 0b011)
    p = NinfEstimateParams(1.0, 0.1, 0.05, max_trials=1)
    raw = [float(ninf_trials(exact_oracle(f), 0b001, p, np.random.default_rng(seed))[0]) for seed in range(30)]
    estimates = [estimate_ninf(exact_oracle(f), 0b001, p, np.random.default_rng(seed)) for seed in range(30)]
    assert min(raw) < 0
    assert all(0.0 <= e <= 1.0 for e in estimates)
    assert all(e == 0.0 for r, e in zip(raw, estimates) if r < 0)

  def test_l2_trials_in_range(self):
    f = BooleanFunction.character(3, 0b011)
    p = NinfEstimateParams(1.0, 0.1, 0.05, mode='l2', max_trials=40, max_points=32, max_inner=4)
    values = ninf_trials(exact_oracle(f), 0b001, p, np.random.default_rng(13))
    assert values.size == 40
    assert values.min() >= 0.0 and values.max() <= 1.0

  def test_l2_estimate_of_character(self):
    # T_{√y} of chi_{1} squares to y, so each trial is y plus at most 1/32 of inner noise
    f = BooleanFunction.character(3, 0b011)
    p = NinfEstimateParams(1.0, 0.1, 0.05, mode='l2', max_trials=200, max_points=64, max_inner=32)
    estimate = estimate_ninf(exact_oracle(f), 0b001, p, np.random.default_rng(14))
    assert estimate == pytest.approx(0.5, abs=0.1)


# =============================================================================
# Level-set sampling
# =============================================================================


class TestSampleLevelSet:
  def test_exact_draws_carry_mass(self):
    o = exact_oracle(BooleanFunction.character(4, 0b0110))
    rng = np.random.default_rng(7)
    draws = {sample_level_set(o, 1, 0.1, rng, exact=True).subset for _ in range(20)}
    assert draws <= {0b0010, 0b0100}

  def test_sampled_distribution_close_to_exact(self):
    f = BooleanFunction.random_bounded(3, np.random.default_rng(15))
    exact = norm_inf_table(wht(f), 1)
    p = NinfEstimateParams(1.0, 0.1, 0.05, max_trials=20_000)
    sample = sample_level_set(exact_oracle(f), 1, 0.1, np.random.default_rng(16), params=p)
    estimated = np.clip(np.array([sample.table[U] for U in sorted(exact)]), 0.0, None)
    truth = np.array([exact[U] for U in sorted(exact)])
    tv = 0.5 * np.abs(estimated / estimated.sum() - truth / truth.sum()).sum()
    assert tv <= 0.1
    assert sample.subset in exact

  def test_zero_function(self):
    o = exact_oracle(BooleanFunction.constant(3, 0.0))
    with pytest.raises(EmptyDistributionError):
      sample_level_set(o, 1, 0.1, np.random.default_rng(8), exact=True)

  def test_no_sets_of_that_size(self):
    o = exact_oracle(BooleanFunction.constant(3, 1.0))
    with pytest.raises(EmptyDistributionError):
      sample_level_set(o, 4, 0.1, np.random.default_rng(9), exact=True)
