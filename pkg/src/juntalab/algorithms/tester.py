"""Tolerant junta testers.

Both testers estimate corr(f, J_k), the best correlation of f with a k-junta, and
report dist = (1 − gamma)/2. The quantum-sim tester draws its candidate cores C
from the exact spectral sample; the classical tester gets them from
Find-High-Level-Coordinates and re-validates every winner with a direct estimate.
"""

import math
from typing import Callable

import numpy as np

from juntalab.algorithms.fourier import escaping_mass, junta_corr_exact, spectral_sample, wht
from juntalab.algorithms.localest import (
  BundleCache,
  LocalEstParams,
  draw_bundles,
  estimate_junta_corr,
  exact_local_corr,
)
from juntalab.algorithms.refine import RefineParams, find_high_level_coordinates, sizes
from juntalab.algorithms.sharpnoise import SharpNoiseParams, apply_exact_function, mixture_coeffs
from juntalab.errors import BudgetExceeded, DomainError
from juntalab.models.boolfn import BooleanFunction
from juntalab.models.params import ParamSchedule
from juntalab.models.report import TesterReport
from juntalab.oracles.coordinate import CoordinateOracleSet, coordinate_avg_oracle
from juntalab.oracles.estimators import estimate_values, hoeffding_queries
from juntalab.oracles.value_oracle import ValueOracle, averaged_oracle, exact_oracle
from juntalab.services.job_log_handling import log_debug, log_info, log_warning
from juntalab.services.run_log import RunLog
from juntalab.utils.bits import CoordSet, complement, full_mask, k_subsets, popcount, popcounts

SetFilter = Callable[[CoordSet, CoordSet], bool]


def candidate_sets(n: int, k: int, C: CoordSet, avoid: CoordSet = 0, set_filter: SetFilter | None = None):
  """Size-k sets U with C ⊆ U and U ∩ avoid = ∅, in lexicographic order of U \\ C."""
  if popcount(C) > k or C & avoid:
    return []
  free = full_mask(n) & ~C & ~avoid
  out = [C | extra for extra in k_subsets(free, k - popcount(C))]
  return [U for U in out if set_filter is None or set_filter(U, C)]


def high_level_fraction(reference: np.ndarray, U: CoordSet, C: CoordSet, ell: int) -> float:
  """Fraction of reference samples S with S ⊆ U and |S \\ C| ≥ ell."""
  if reference.size == 0:
    return 0.0
  inside = (reference & ~U) == 0
  high = popcounts(reference & ~C) >= ell
  return float(np.mean(inside & high))


class _JuntaCorrEstimator:
  """Est_{C,U} for all candidate U of one core C, exact or through sample bundles."""

  def __init__(self, o: ValueOracle, C: CoordSet, noise: SharpNoiseParams, local: LocalEstParams, eps: float,
               sched: ParamSchedule, rng: np.random.Generator):
    self.o = o
    self.C = C
    self.local = local
    self.eps = eps
    self.sched = sched
    self.rng = rng
    n = o.arity
    outside = full_mask(n) & ~C
    if sched.evaluation == 'exact':
      self.table = apply_exact_function(o.represented(), noise.with_coords(outside))
    else:
      self.mixture = mixture_coeffs(noise)
      self.draws = sched.bundle_draws_for(self.mixture.l1_norm, eps)
      if self.mixture.l1_norm > 10.0 * eps * math.sqrt(self.draws):
        log_warning(
          'mixture norm too large for the bundle draws, sampled estimates will run high',
          l1_norm=f'{self.mixture.l1_norm:.3g}', draws=self.draws, delta_exp=noise.delta_exp,
        )
      self.xs = rng.integers(0, 1 << n, size=sched.samples, dtype=np.int64)
      self.bundles = draw_bundles(self.xs, C, local, self.mixture, n, rng, sched.coupled_bundles, self.draws)
      self.cache = BundleCache()

  def __call__(self, U: CoordSet) -> float:
    if self.sched.evaluation == 'exact':
      return exact_local_corr(self.table, U, self.local)
    cache = self.cache if self.sched.cache_values else None
    estimate = estimate_junta_corr(
      self.o, U, self.C, self.xs, self.bundles, self.local, self.mixture, self.eps, self.rng,
      cache=cache, max_queries=self.sched.value_queries,
    )
    if estimate > self.o.bound + self.eps:
      log_warning('junta correlation estimate outside its range', U=U, C=self.C, estimate=f'{estimate:.4g}')
    return estimate


def _local_params(n: int, k: int, noise: SharpNoiseParams, eps: float, sched: ParamSchedule) -> LocalEstParams:
  # levels above the restricted domain's arity carry no weight
  domain = max(1, n - k)
  level = max(1, min(noise.kappa * noise.ell, domain))
  return LocalEstParams.build(level, sched.tau(eps), domain, sched.r_constant, sched.lp_backend)


def _noise_params(n: int, k: int, eps: float, ell: int, sched: ParamSchedule) -> SharpNoiseParams:
  kappa = sched.kappa_for(n, eps)
  delta_exp = sched.noise_delta_exp()
  if delta_exp is not None:
    return SharpNoiseParams(ell, kappa, delta_exp, 0)
  domain = max(1, n - k)
  level = max(1, min(kappa * ell, domain))
  r = LocalEstParams.build(level, sched.tau(eps), domain, sched.r_constant, sched.lp_backend).r
  return SharpNoiseParams(ell, kappa, sched.delta_exp_for(n, eps, r), 0)


def quantum_sim_tester(
  f: BooleanFunction,
  k: int,
  eps: float,
  sched: ParamSchedule,
  rng: np.random.Generator,
  oracle: ValueOracle | None = None,
  set_filter: SetFilter | None = None,
  run_log: RunLog | None = None,
) -> TesterReport:
  """Spectral-sample-driven estimate of corr(f, J_k), the spectral sampler simulated exactly."""
  n = f.n
  if k > n:
    raise DomainError(f'k={k} exceeds the arity {n}')
  if not f.sign_valued:
    raise DomainError('the quantum-sim tester needs a sign-valued function')
  oracle = oracle or exact_oracle(f)
  spec = wht(f)
  ell = sched.tester_ell(k, n)
  noise = _noise_params(n, k, eps, ell, sched)
  local = _local_params(n, k, noise, eps, sched)
  reference = spectral_sample(spec, rng, size=sched.reference_count(n, eps))
  report = TesterReport(caps={
    'reference_samples': int(reference.size),
    'outer_reps': sched.outer_reps,
    'samples': sched.samples,
    'ell': ell,
    'kappa': noise.kappa,
    'delta_exp': noise.delta_exp,
    'L': local.L,
    'r': local.r,
    'evaluation': sched.evaluation,
  })
  limit = eps**2 / 10
  for rep, stream in enumerate(rng.spawn(sched.outer_reps)):
    draws = spectral_sample(spec, stream, size=sched.draws_per_rep(k))
    C = int(np.bitwise_or.reduce(draws)) if draws.size else 0
    report.diagnostics.append({'rep': rep, 'C': C, 'escaping_mass': escaping_mass(spec, C, ell)})
    passing = [
      U for U in candidate_sets(n, k, C, set_filter=set_filter)
      if high_level_fraction(reference, U, C, ell) <= limit
    ]
    if not passing:
      log_debug('no candidate passes', rep=rep, C=C)
      continue
    estimator = _JuntaCorrEstimator(oracle, C, noise, local, eps, sched, stream)
    for U in passing:
      estimate = estimator(U)
      report.record(U, estimate, C=C)
      report.offer(U, estimate)
      if run_log is not None:
        run_log.write({'rep': rep, 'C': C, 'U': U, 'estimate': estimate})
    log_info(f'quantum-sim rep {rep}: C={C:#x}, {len(passing)} candidates, gamma={report.gamma:.4f}')
  report.query_count = oracle.query_count
  return report.clamp()


def estimate_corr_direct(
  o: ValueOracle,
  A: CoordSet,
  eps: float,
  delta: float,
  rng: np.random.Generator,
  points: int | None = None,
  max_queries: int | None = None,
) -> float:
  """Mean over uniform y of an estimate of |o averaged over Ā at y|, within ±eps w.p. 1 − delta."""
  averaged = averaged_oracle(o, complement(A, o.arity))
  count = points or hoeffding_queries(o.bound, eps / 2, delta / 2)
  ys = rng.integers(0, 1 << o.arity, size=count, dtype=np.int64)
  values = estimate_values(averaged, ys, eps / 2, delta / (2 * count), rng, max_queries)
  return float(np.abs(values).mean())


def classical_tester(
  f_oracle: ValueOracle,
  k: int,
  eps: float,
  oracles: CoordinateOracleSet,
  sched: ParamSchedule,
  rng: np.random.Generator,
  set_filter: SetFilter | None = None,
  run_log: RunLog | None = None,
) -> TesterReport:
  """Estimate corr(f, J_k) from refined (C, I) pairs, re-validating each pair's winner."""
  g = coordinate_avg_oracle(f_oracle, oracles)
  n = g.arity
  if k > n:
    raise DomainError(f'k={k} exceeds the number of coordinate oracles {n}')
  refine = RefineParams.from_schedule(k, n, eps**2, sched)
  family = find_high_level_coordinates(g, k, eps**2, refine, rng, run_log)
  noise = _noise_params(n, k, eps, refine.ell, sched)
  local = _local_params(n, k, noise, eps, sched)
  exact = sched.evaluation == 'exact'
  target = g.represented() if exact else None
  report = TesterReport(caps={
    'refine_outer_reps': refine.outer_reps,
    'levels': refine.levels,
    'ell': refine.ell,
    'gamma_level': refine.gamma,
    'kappa': noise.kappa,
    'delta_exp': noise.delta_exp,
    'L': local.L,
    'r': local.r,
    'direct_points': sched.direct_points(n, eps),
    'evaluation': sched.evaluation,
    **sizes(family),
  })
  ordered = sorted(family)
  for pair, stream in zip(ordered, rng.spawn(len(ordered))):
    candidates = candidate_sets(n, k, pair.C, avoid=pair.I, set_filter=set_filter)
    if not candidates:
      continue
    base = averaged_oracle(g, pair.I)
    estimator = _JuntaCorrEstimator(base, pair.C, noise, local, eps, sched, stream)
    best, best_set = -math.inf, candidates[0]
    for U in candidates:
      estimate = estimator(U)
      report.record(U, estimate, C=pair.C, I=pair.I)
      if estimate > best:
        best, best_set = estimate, U
    if not math.isfinite(best):
      best = math.nan
      log_warning('no finite estimate for the pair, re-validating its first candidate', C=pair.C, I=pair.I)
    if exact:
      checked = junta_corr_exact(target, best_set)
    else:
      checked = estimate_corr_direct(
        g, best_set, eps / 20, 2.0 ** -min(n * n, 40), stream,
        points=sched.direct_points(n, eps), max_queries=sched.value_queries,
      )
    report.diagnostics.append({'C': pair.C, 'I': pair.I, 'A': best_set, 'est': best, 'est_A': checked})
    if run_log is not None:
      run_log.write({'C': pair.C, 'I': pair.I, 'A': best_set, 'est': best, 'est_A': checked})
    report.offer(best_set, checked)
  log_info(f'classical tester: {len(family)} pairs, gamma={report.gamma:.4f}')
  report.query_count = f_oracle.query_count
  return report.clamp()


def run_with_budget(run: Callable[[], TesterReport], oracle: ValueOracle, budget: int) -> TesterReport:
  """Run a tester with a cap on the base oracle's calls; overrunning aborts with gamma = 0."""
  previous = oracle.counter.budget
  oracle.counter.budget = oracle.query_count + budget
  try:
    return run()
  except BudgetExceeded as e:
    log_warning('query budget exceeded, aborting', used=e.used, budget=e.budget)
    return TesterReport(gamma=0.0, query_count=e.used, aborted=True, caps={'budget': budget})
  finally:
    oracle.counter.budget = previous


def distance_estimate(report: TesterReport) -> float:
  return report.dist


def budgeted_distance(
  run: Callable[[], TesterReport], oracle: ValueOracle, expected: int, sched: ParamSchedule
) -> tuple[float, TesterReport]:
  """dist with the budget set to budget_factor × the expected query count."""
  report = run_with_budget(run, oracle, math.ceil(sched.budget_factor * expected))
  return distance_estimate(report), report
