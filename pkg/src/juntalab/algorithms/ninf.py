"""Normalized influences.

NormInf_U[f] = Σ_{S ⊇ U} f̂(S)² / C(|S|, |U|). Writing g for the derivative of f
along U (ĝ(T) = f̂(T ∪ U) for T disjoint from U), the minimum y of |U| uniforms
satisfies E[y^a] = 1 / C(a + |U|, |U|), so E_y E_x[(T_{√y} g)(x)²] = NormInf_U[f].
The estimator samples exactly that expectation.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from juntalab.algorithms.fourier import sample_noise_points, wht
from juntalab.errors import DomainError, EmptyDistributionError, UnsupportedModeError
from juntalab.models.boolfn import BooleanFunction, FourierSpectrum
from juntalab.models.params import NINF_MODES
from juntalab.oracles.estimators import estimate_l2
from juntalab.oracles.value_oracle import NoisyOracle, ValueOracle
from juntalab.services.job_log_handling import log_debug
from juntalab.utils.bits import CoordSet, full_mask, k_subsets, parity, popcount, popcount_table, submasks

MAX_ORDER = 6
CHUNK = 1 << 16
ZERO_MASS = 1e-12


@dataclass(frozen=True)
class NinfEstimateParams:
  B: float
  eps: float
  delta: float
  mode: str = 'paired'
  max_trials: int | None = None
  max_points: int | None = None
  max_inner: int | None = None

  def __post_init__(self):
    if not 0 < self.eps <= 1:
      raise DomainError(f'eps must lie in (0, 1], got {self.eps}')
    if not 0 < self.delta < 0.25:
      raise DomainError(f'delta must lie in (0, 1/4), got {self.delta}')
    if self.mode not in NINF_MODES:
      raise UnsupportedModeError(f'unknown ninf mode {self.mode!r}')

  def trials(self, order: int) -> int:
    """M = 1000·(|U|!)⁴·B⁴·log(1/delta)/eps², optionally capped."""
    scale = math.factorial(order) ** 4
    count = math.ceil(1000 * scale * self.B**4 * math.log(1 / self.delta) / self.eps**2)
    return count if self.max_trials is None else max(1, min(count, self.max_trials))

  def l2_accuracy(self, order: int) -> tuple[float, float]:
    square = math.factorial(order) ** 2
    return self.eps / (4 * square), min(0.25, self.eps / (100 * self.B**2 * square))


def _check_order(U: CoordSet):
  if popcount(U) > MAX_ORDER:
    raise DomainError(f'|U| = {popcount(U)} above {MAX_ORDER}')


def norm_inf_exact(spec: FourierSpectrum, U: CoordSet) -> float:
  size = popcount(U)
  subsets = np.arange(1 << spec.n, dtype=np.int64)
  keep = (subsets & U) == U
  levels = popcount_table(spec.n)[keep]
  ratios = np.array([1.0 / math.comb(level, size) for level in range(spec.n + 1)])
  return float(np.sum(spec.coeffs[keep] ** 2 * ratios[levels]))


def norm_inf_table(spec: FourierSpectrum, gamma: int, universe: CoordSet | None = None) -> dict[int, float]:
  """Exact NormInf_U for every size-gamma U inside *universe*."""
  universe = full_mask(spec.n) if universe is None else universe
  return {U: norm_inf_exact(spec, U) for U in k_subsets(universe, gamma)}


def _derivative_table(f: BooleanFunction, U: CoordSet) -> BooleanFunction:
  values = np.asarray(f.values, dtype=float).copy()
  points = np.arange(f.size, dtype=np.int64)
  for coord in range(f.n):
    bit = 1 << coord
    if U & bit:
      sign = 1.0 - 2.0 * ((points & bit) != 0)
      values = (values - values[points ^ bit]) / 2.0 * sign
  return BooleanFunction(f.n, values, f.bound)


class DerivativeOracle(ValueOracle):
  """chi_U(x)·Σ_{S ⊆ U} (−1)^{|S|} 2^{−|U|} f(x^{⊕S}); the weights have unit l1 norm."""

  def __init__(self, inner: ValueOracle, U: CoordSet):
    _check_order(U)
    self.offsets = np.array(list(submasks(U & full_mask(inner.arity))), dtype=np.int64)
    super().__init__(inner.arity, inner.bound, inner.calls_per_query * self.offsets.size)
    self.inner = inner
    self.U = U & full_mask(inner.arity)
    self.deterministic = inner.deterministic
    self._weights = (1.0 - 2.0 * (np.bitwise_count(self.offsets) & 1)) / self.offsets.size

  def _evaluate(self, xs, rng):
    ys = (xs[:, None] ^ self.offsets[None, :]).reshape(-1)
    answers = self.inner.query_many(ys, rng).reshape(xs.size, self.offsets.size)
    return parity(self.U, xs) * (answers @ self._weights)

  def represented(self):
    inner = self.inner.represented()
    return None if inner is None else _derivative_table(inner, self.U)


def derivative_fn(f: BooleanFunction | ValueOracle, U: CoordSet) -> BooleanFunction | ValueOracle:
  """g with ĝ(T) = f̂(T ∪ U) for T ∩ U = ∅, as a table or as an oracle."""
  if isinstance(f, BooleanFunction):
    _check_order(U)
    return _derivative_table(f, U)
  return DerivativeOracle(f, U)


def _minimum_of_uniforms(count: int, order: int, rng: np.random.Generator) -> np.ndarray:
  if order == 0:
    return np.ones(count)
  # y_1 ≥ ... ≥ y_|U|; only the last is used
  return np.sort(rng.random((count, order)), axis=1)[:, 0]


def _paired_trials(g: ValueOracle, order: int, trials: int, rng: np.random.Generator) -> np.ndarray:
  n = g.arity
  everything = full_mask(n)
  out = []
  for start in range(0, trials, CHUNK):
    count = min(CHUNK, trials - start)
    xs = rng.integers(0, 1 << n, size=count, dtype=np.int64)
    rho = np.sqrt(_minimum_of_uniforms(count, order, rng))
    first = g.query_many(sample_noise_points(xs, rho, everything, n, rng), rng)
    second = g.query_many(sample_noise_points(xs, rho, everything, n, rng), rng)
    out.append(first * second)
  return np.concatenate(out) if out else np.zeros(0)


def _l2_trials(g: ValueOracle, order: int, p: NinfEstimateParams, trials: int, rng) -> np.ndarray:
  eps, delta = p.l2_accuracy(order)
  ys = _minimum_of_uniforms(trials, order, rng)
  values = [
    estimate_l2(NoisyOracle(g, math.sqrt(y), full_mask(g.arity)), eps, delta, rng, p.max_points, p.max_inner)
    for y in ys
  ]
  return np.asarray(values)


def ninf_trials(o: ValueOracle, U: CoordSet, p: NinfEstimateParams, rng: np.random.Generator) -> np.ndarray:
  """Per-trial values whose mean estimates NormInf_U.

  `paired` mode takes one uniform x per trial and multiplies two independent
  queries of T_{√y} g at x, so a trial lies in [−B², B²]; `l2` mode runs
  estimate_l2 on T_{√y} g per trial, which keeps every trial in [0, B²].
  """
  _check_order(U)
  order = popcount(U)
  g = derivative_fn(o, U)
  trials = p.trials(order)
  if p.mode == 'paired':
    return _paired_trials(g, order, trials, rng)
  return _l2_trials(g, order, p, trials, rng)


def estimate_ninf(o: ValueOracle, U: CoordSet, p: NinfEstimateParams, rng: np.random.Generator) -> float:
  """Estimate NormInf_U of the function behind *o* to within ±eps, clamped to [0, B²]."""
  values = ninf_trials(o, U, p, rng)
  return float(np.clip(values.mean(), 0.0, p.B**2))


def integral_identity_check(spec: FourierSpectrum, U: CoordSet) -> tuple[float, float]:
  """(1/|U|!)·∫ over y_1 ≥ ... ≥ y_|U| of E_x[(T_{√y} g)²], against NormInf_U/(|U|!)².

  Over the ordered region, ∫ y_|U|^a dy = a!/(a + |U|)!; the left side sums that
  against the derivative's spectrum.
  """
  order = popcount(U)
  square = math.factorial(order) ** 2
  lhs = 0.0
  for subset in range(1 << spec.n):
    if subset & U == U and spec.coeffs[subset] != 0.0:
      a = popcount(subset) - order
      lhs += spec.coeffs[subset] ** 2 * math.factorial(a) / math.factorial(a + order)
  lhs /= math.factorial(order)
  return lhs, norm_inf_exact(spec, U) / square


@dataclass(frozen=True)
class LevelSample:
  subset: CoordSet
  table: dict[int, float]


def sample_level_set(
  o: ValueOracle,
  gamma: int,
  accuracy: float,
  rng: np.random.Generator,
  universe: CoordSet | None = None,
  exact: bool = False,
  params: NinfEstimateParams | None = None,
) -> LevelSample:
  """Draw a size-gamma U with probability proportional to NormInf_U.

  Every lambda_U is estimated (or, with exact=True, computed from the function the
  oracle represents), negatives are clamped to zero, and U is drawn from the
  normalised table. The table is returned alongside for logging.
  """
  universe = full_mask(o.arity) if universe is None else universe
  candidates = list(k_subsets(universe, gamma))
  if not candidates:
    raise EmptyDistributionError(f'no sets of size {gamma} to sample from')
  if exact:
    represented = o.represented()
    if represented is None:
      raise DomainError('exact level sampling needs an oracle with a tabulated function')
    spec = wht(represented)
    table = {U: norm_inf_exact(spec, U) for U in candidates}
  else:
    template = params or NinfEstimateParams(o.bound, accuracy, 0.1)
    p = replace(template, B=o.bound, eps=min(1.0, accuracy))
    streams = rng.spawn(len(candidates))
    table = {U: estimate_ninf(o, U, p, stream) for U, stream in zip(candidates, streams)}

  weights = np.clip(np.array([table[U] for U in candidates]), 0.0, None)
  total = float(weights.sum())
  if total <= ZERO_MASS:
    raise EmptyDistributionError(f'no normalized influence at level {gamma}')
  choice = candidates[int(rng.choice(len(candidates), p=weights / total))]
  log_debug('level set drawn', gamma=gamma, subset=bin(choice), mass=f'{total:.3e}')
  return LevelSample(choice, table)
