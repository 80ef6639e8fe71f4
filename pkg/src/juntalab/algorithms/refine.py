"""Refine-Coordinates and Find-High-Level-Coordinates.

Refine-Coordinates averages out a random guess I of coordinates, then keeps adding
to C' the coordinates of sets drawn in proportion to the normalized influence of
h = f_ave^I − SharpNoise^{C \\ C'} f_ave^I, until h has small variance or the drawn
set adds nothing new. Find-High-Level-Coordinates applies it level by level to a
noisy copy of the input, accumulating the averaged sets.
"""

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from juntalab.algorithms.ninf import NinfEstimateParams, sample_level_set
from juntalab.algorithms.sharpnoise import NoiseMixture, SharpNoiseParams, h_oracle, mixture_coeffs
from juntalab.errors import CapacityError, EmptyDistributionError, InvariantViolation
from juntalab.models.boolfn import FourierSpectrum
from juntalab.models.params import ParamSchedule, log_term
from juntalab.models.report import RefinePair
from juntalab.oracles.estimators import estimate_l2
from juntalab.oracles.value_oracle import ValueOracle, averaged_oracle, noisy_oracle
from juntalab.services.job_log_handling import log_debug, log_info
from juntalab.services.run_log import RunLog, write_lambda_table
from juntalab.utils.bits import CoordSet, bits_of, full_mask, is_subset, mask_of, popcount, popcount_table


@dataclass(frozen=True)
class RefineParams:
  k: int
  k_prime: int
  eps: float
  ell: int
  gamma: int
  kappa: int
  delta_exp: int = 10
  c_m: float = 1e-4
  outer_reps: int = 200
  evaluation: str = 'exact'
  family_cap: int = 20_000
  variance_delta: float = 2.0**-20
  ninf: NinfEstimateParams | None = None
  l2_max_points: int | None = None
  l2_max_inner: int | None = None
  lambda_dir: str | None = None

  def __post_init__(self):
    if self.gamma > self.ell:
      raise InvariantViolation(f'gamma={self.gamma} exceeds ell={self.ell}')
    # SharpNoiseParams enforces kappa ≥ 5
    self.sharpnoise(0)

  @classmethod
  def from_schedule(cls, k: int, k_prime: int, eps: float, sched: ParamSchedule, **extra) -> 'RefineParams':
    return cls(
      k=k,
      k_prime=k_prime,
      eps=eps,
      ell=sched.refine_ell(k, k_prime, eps),
      gamma=sched.refine_gamma(k, k_prime, eps),
      kappa=sched.kappa_for(k_prime, eps),
      delta_exp=sched.noise_delta_exp() or 10,
      c_m=sched.c_m,
      outer_reps=sched.refine_outer_reps,
      evaluation=sched.evaluation,
      family_cap=sched.family_cap,
      variance_delta=sched.variance_delta,
      ninf=NinfEstimateParams(
        1.0, 1.0, sched.ninf_delta, sched.ninf_mode, sched.ninf_max_trials, sched.l2_max_points, sched.l2_max_inner
      ),
      l2_max_points=sched.l2_max_points,
      l2_max_inner=sched.l2_max_inner,
      **extra,
    )

  @property
  def variance_threshold(self) -> float:
    return self.eps**2 / self.k**2

  @property
  def ell_prime(self) -> int:
    return math.ceil((math.log2(self.k_prime) + 2) * self.ell)

  @property
  def levels(self) -> int:
    return int(math.floor(math.log2(self.k_prime))) + 1

  def m_for(self, c_size: int) -> int:
    beta = max(c_size, self.k)
    m = self.c_m * beta / self.k ** (2 / 3) * log_term(self.k_prime, self.eps) ** 4
    return max(1, min(self.k_prime, math.ceil(m)))

  def sharpnoise(self, V: CoordSet) -> SharpNoiseParams:
    return SharpNoiseParams(self.ell, self.kappa, self.delta_exp, V)

  @cached_property
  def mixture(self) -> NoiseMixture:
    return mixture_coeffs(self.sharpnoise(0))


def _mean_square(h: ValueOracle, p: RefineParams, rng: np.random.Generator) -> float:
  if p.evaluation == 'exact':
    values = h.represented().values
    return float(np.mean(values * values))
  accuracy = min(0.25, p.variance_threshold / 10)
  return estimate_l2(h, accuracy, min(0.25, p.variance_delta), rng, p.l2_max_points, p.l2_max_inner)


def refine_coordinates(
  o: ValueOracle,
  C: CoordSet,
  p: RefineParams,
  rng: np.random.Generator,
  run_log: RunLog | None = None,
) -> set[RefinePair]:
  """Pairs (C', I) with C', I ⊆ C, one per outer repetition (duplicates collapse)."""
  if C == 0:
    return {RefinePair(0, 0)}
  coords = bits_of(C)
  m = p.m_for(len(coords))
  threshold = p.variance_threshold
  pairs = set()
  for rep, stream in enumerate(rng.spawn(p.outer_reps)):
    I = mask_of(stream.choice(coords, size=min(m, len(coords)), replace=False))
    base = averaged_oracle(o, I)
    c_prime = 0
    for passes in itertools.count(1):
      if passes > p.k_prime + 1:
        raise InvariantViolation(f'refine loop ran {passes - 1} passes without settling')
      h = h_oracle(base, p.sharpnoise(C & ~c_prime), p.mixture)
      variance = _mean_square(h, p, stream)
      record = {'rep': rep, 'pass': passes, 'C': C, 'I': I, 'C_prime': c_prime, 'variance': variance}
      if variance <= threshold:
        exit_reason, drawn = 'variance', None
      else:
        try:
          sample = sample_level_set(
            h, p.gamma, threshold / 10, stream, exact=p.evaluation == 'exact', params=p.ninf
          )
        except EmptyDistributionError:
          exit_reason, drawn = 'empty', None
        else:
          drawn = sample.subset
          if p.lambda_dir is not None:
            write_lambda_table(f'{p.lambda_dir}/lambda_C{C}_I{I}_r{rep}_p{passes}.csv', sample.table)
          exit_reason = 'contained' if is_subset(drawn & C, c_prime) else None
      record.update({'T': drawn, 'exit': exit_reason})
      if drawn is not None:
        record['new_in_C'] = drawn & C & ~c_prime
      if run_log is not None:
        run_log.write(record)
      log_debug('refine pass', **record)
      if exit_reason is not None:
        break
      c_prime |= drawn & C
    pairs.add(RefinePair(c_prime, I))
  return pairs


def find_high_level_coordinates(
  f_oracle: ValueOracle,
  k: int,
  eps: float,
  p: RefineParams,
  rng: np.random.Generator,
  run_log: RunLog | None = None,
) -> set[RefinePair]:
  """Union over levels of the refined pairs, seeded with ([k'], ∅).

  Runs on g = T_{1−1/(2k)} f; each level sends every pair (C, I) of the previous
  level through refine_coordinates on g_ave^I and keeps (C', I ∪ I').
  """
  g = noisy_oracle(f_oracle, 1.0 - 1.0 / (2.0 * k), full_mask(f_oracle.arity))
  frontier = {RefinePair(full_mask(f_oracle.arity), 0)}
  family = set(frontier)
  for level in range(p.levels):
    produced = set()
    ordered = sorted(frontier)
    for pair, stream in zip(ordered, rng.spawn(len(ordered))):
      for refined in refine_coordinates(averaged_oracle(g, pair.I), pair.C, p, stream, run_log):
        produced.add(RefinePair(refined.C, pair.I | refined.I))
    family |= produced
    log_info(f'refine level {level}: {len(produced)} pairs, family {len(family)}', eps=eps)
    if len(family) > p.family_cap:
      raise CapacityError(f'family size {len(family)} above {p.family_cap} at level {level}')
    frontier = produced
  return family


def check_pair_conditions(
  spec: FourierSpectrum,
  pair: RefinePair,
  R: CoordSet,
  k: int,
  eps: float,
  ell_prime: int | None = None,
) -> bool:
  """(i) I ⊆ R̄, (ii) C' ⊆ R, (iii) averaged high-level mass outside C' at most eps²/100.

  The mass in (iii) sums f̂(S)² over S disjoint from I with |S \\ C'| ≥ ell_prime and
  |S| ≤ k. Without an explicit ell_prime the desk schedule's refine ell is used.
  """
  if ell_prime is None:
    ell = ParamSchedule.desk().refine_ell(k, spec.n, eps)
    ell_prime = math.ceil((math.log2(spec.n) + 2) * ell) if spec.n > 1 else ell
  if pair.I & R or not is_subset(pair.C, R):
    return False
  subsets = np.arange(1 << spec.n, dtype=np.int64)
  levels = popcount_table(spec.n)
  outside = popcount_table(spec.n)[subsets & ~pair.C & full_mask(spec.n)]
  keep = ((subsets & pair.I) == 0) & (outside >= ell_prime) & (levels <= k)
  return float(np.sum(spec.coeffs[keep] ** 2)) <= eps**2 / 100


def attenuated_mass(f_spec: FourierSpectrum, pair: RefinePair, C: CoordSet, level: int) -> float:
  """Σ f̂_ave^I(S)² over S with |S ∩ (C \\ C')| ≥ level, for the exit diagnostic."""
  subsets = np.arange(1 << f_spec.n, dtype=np.int64)
  inside = popcount_table(f_spec.n)[subsets & C & ~pair.C]
  keep = ((subsets & pair.I) == 0) & (inside >= level)
  return float(np.sum(f_spec.coeffs[keep] ** 2))


def sizes(pairs: set[RefinePair]) -> dict[str, int]:
  return {
    'pairs': len(pairs),
    'max_C': max((popcount(pair.C) for pair in pairs), default=0),
    'max_I': max((popcount(pair.I) for pair in pairs), default=0),
  }
