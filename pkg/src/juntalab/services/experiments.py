"""Run a task across seeds and report every estimate next to its exact value."""

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from juntalab.algorithms.conjlearn import agnostic_learn
from juntalab.algorithms.fourier import inverse_wht, wht
from juntalab.algorithms.ninf import NinfEstimateParams, estimate_ninf, norm_inf_exact
from juntalab.algorithms.reference import exact_junta_corr_k, exact_opt_conjunction
from juntalab.algorithms.refine import RefineParams, check_pair_conditions, find_high_level_coordinates
from juntalab.algorithms.tester import classical_tester, quantum_sim_tester
from juntalab.errors import ConfigError
from juntalab.models.params import ParamSchedule
from juntalab.oracles.coordinate import CoordinateOracleSet
from juntalab.oracles.value_oracle import exact_oracle
from juntalab.services.config import ExperimentConfig
from juntalab.services.instances import Instance, generate_instance, write_instance
from juntalab.services.job_log_handling import log_error, log_info
from juntalab.services.run_log import RunLog, read_jsonl, write_csv
from juntalab.utils.bits import mask_of
from juntalab.utils.rng import child_rng

RECORDS = 'records.jsonl'
SUMMARY = 'summary.csv'
SUMMARY_COLUMNS = [
  'task',
  'runs',
  'successes',
  'success_fraction',
  'required_fraction',
  'mean_estimate',
  'mean_exact',
  'mean_abs_error',
  'std_abs_error',
  'mean_err_minus_opt',
  'mean_queries',
  'mean_runtime',
  'passed',
]
WHT_TOLERANCE = 1e-9

Runner = Callable[[Instance, ExperimentConfig, ParamSchedule, np.random.Generator, Path], dict]


@dataclass
class ExperimentOutcome:
  records: list[dict] = field(default_factory=list)
  summary: dict = field(default_factory=dict)
  exit_code: int = 0


def _function(instance: Instance):
  if instance.function is None:
    raise ConfigError(f'task needs a truth table, the instance kind is {instance.spec.kind!r}')
  return instance.function


def _run_gen(instance, config, sched, rng, run_dir):
  paths = write_instance(instance, run_dir)
  return {'files': [str(path) for path in paths], 'success': True}


def _run_wht(instance, config, sched, rng, run_dir):
  f = _function(instance)
  gap = float(np.abs(inverse_wht(wht(f)).values - f.values).max())
  return {'estimate': gap, 'exact': 0.0, 'abs_error': gap, 'success': gap <= WHT_TOLERANCE}


def _tester_record(report, exact: float, config: ExperimentConfig) -> dict:
  error = abs(report.gamma - exact)
  return {
    'estimate': report.gamma,
    'exact': exact,
    'abs_error': error,
    'dist': report.dist,
    'best_set': report.best_set,
    'queries': report.query_count,
    'aborted': report.aborted,
    'success': error <= config.allowed_error,
  }


def _run_quantum_sim(instance, config, sched, rng, run_dir):
  f = _function(instance)
  k = instance.spec.k
  report = quantum_sim_tester(f, k, config.eps, sched, rng)
  report.write_json(run_dir / 'report.json')
  return _tester_record(report, exact_junta_corr_k(f, k)[0], config)


def _run_classical(instance, config, sched, rng, run_dir):
  f = _function(instance)
  k = instance.spec.k
  report = classical_tester(exact_oracle(f), k, config.eps, CoordinateOracleSet.identity(f.n), sched, rng)
  report.write_json(run_dir / 'report.json')
  return _tester_record(report, exact_junta_corr_k(f, k)[0], config)


def _run_learn(instance, config, sched, rng, run_dir):
  if instance.sampler is None:
    raise ConfigError(f'learn-conj needs a conjunction instance, got {instance.spec.kind!r}')
  result = agnostic_learn(instance.sampler, config.eps, sched, rng)
  evaluation = instance.sampler.draw(instance.spec.count, rng)
  error = result.hypothesis.error(evaluation)
  opt, best = exact_opt_conjunction(evaluation)
  gap = error - opt
  return {
    'estimate': error,
    'exact': opt,
    'abs_error': abs(gap),
    'err_minus_opt': gap,
    'opt_conjunction': best.describe(),
    'fitted_rounds': result.fitted,
    'success': gap <= config.allowed_error,
  }


def _run_ninf(instance, config, sched, rng, run_dir):
  f = _function(instance)
  order = min(3, f.n, max(1, instance.spec.k))
  U = mask_of(int(i) for i in rng.choice(f.n, size=order, replace=False))
  params = NinfEstimateParams(
    f.bound, config.eps, sched.ninf_delta, sched.ninf_mode, sched.ninf_max_trials, sched.l2_max_points, sched.l2_max_inner
  )
  oracle = exact_oracle(f)
  estimate = estimate_ninf(oracle, U, params, rng)
  exact = norm_inf_exact(wht(f), U)
  error = abs(estimate - exact)
  return {
    'U': U,
    'estimate': estimate,
    'exact': exact,
    'abs_error': error,
    'queries': oracle.query_count,
    'success': error <= config.allowed_error,
  }


def _run_refine(instance, config, sched, rng, run_dir):
  f = _function(instance)
  k = instance.spec.k
  eps = config.eps**2
  params = RefineParams.from_schedule(k, f.n, eps, sched)
  log = RunLog(run_dir / 'refine.jsonl')
  family = find_high_level_coordinates(exact_oracle(f), k, eps, params, rng, log)
  spec = wht(f)
  passing = [
    pair for pair in sorted(family)
    if check_pair_conditions(spec, pair, instance.relevant, k, eps, params.ell_prime)
  ]
  return {
    'estimate': 1.0 if passing else 0.0,
    'exact': 1.0,
    'abs_error': 0.0 if passing else 1.0,
    'pairs': len(family),
    'passing_pairs': len(passing),
    'success': bool(passing),
  }


RUNNERS: dict[str, Runner] = {
  'gen': _run_gen,
  'wht': _run_wht,
  'test-junta-quantum-sim': _run_quantum_sim,
  'test-junta-classical': _run_classical,
  'learn-conj': _run_learn,
  'ninf': _run_ninf,
  'refine': _run_refine,
}


def _mean(values: list[float]) -> float | None:
  return float(np.mean(values)) if values else None


def summarize(records: list[dict], required_fraction: float) -> dict:
  """One summary row over *records*, all from the same task."""
  if not records:
    raise ConfigError('no run records to summarise')
  successes = sum(1 for record in records if record.get('success'))
  errors = [record['abs_error'] for record in records if record.get('abs_error') is not None]
  fraction = successes / len(records)
  return {
    'task': records[0]['task'],
    'runs': len(records),
    'successes': successes,
    'success_fraction': fraction,
    'required_fraction': required_fraction,
    'mean_estimate': _mean([r['estimate'] for r in records if r.get('estimate') is not None]),
    'mean_exact': _mean([r['exact'] for r in records if r.get('exact') is not None]),
    'mean_abs_error': _mean(errors),
    'std_abs_error': float(np.std(errors)) if errors else None,
    'mean_err_minus_opt': _mean([r['err_minus_opt'] for r in records if 'err_minus_opt' in r]),
    'mean_queries': _mean([r['queries'] for r in records if 'queries' in r]),
    'mean_runtime': _mean([r['runtime'] for r in records if 'runtime' in r]),
    'passed': fraction >= required_fraction - 1e-12,
  }


def _finish(outcome: ExperimentOutcome, config: ExperimentConfig) -> ExperimentOutcome:
  summary = summarize(outcome.records, config.success_fraction)
  write_csv(config.out / SUMMARY, [summary], SUMMARY_COLUMNS)
  outcome.summary = summary
  if summary['passed']:
    log_info(f'{summary["task"]}: {summary["successes"]}/{summary["runs"]} runs within tolerance')
  else:
    outcome.exit_code = 1
    failed = [record.get('seed_index') for record in outcome.records if not record.get('success')]
    log_error(
      f'{summary["task"]}: success fraction {summary["success_fraction"]:.3f} below '
      f'{config.success_fraction:.3f}; failing runs {failed}'
    )
  return outcome


def run_and_report(config: ExperimentConfig) -> ExperimentOutcome:
  """Run config.task over config.seeds seeds; write records.jsonl and summary.csv under config.out.

  The exit code is 0 when the success fraction reaches config.success_fraction and
  1 otherwise.
  """
  out = Path(config.out)
  if config.task == 'report':
    records = read_jsonl(out / RECORDS)
    return _finish(ExperimentOutcome(records=records), config)

  runner = RUNNERS[config.task]
  sched = config.schedule()
  log = RunLog(out / RECORDS)
  outcome = ExperimentOutcome()
  for index in range(config.seeds):
    instance = generate_instance(config.instance, child_rng(config.seed, index, 0))
    run_dir = out / 'runs' / f'{index:04d}'
    run_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    record = runner(instance, config, sched, child_rng(config.seed, index, 1), run_dir)
    record = {'task': config.task, 'seed': config.seed, 'seed_index': index, **record}
    if config.timing:
      record['runtime'] = time.perf_counter() - started
    record = _jsonable(record)
    log.write(record)
    outcome.records.append(record)
  return _finish(outcome, config)


def _jsonable(record: dict) -> dict:
  out = {}
  for key, value in record.items():
    if isinstance(value, (np.floating, np.integer, np.bool_)):
      value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
      value = None
    out[key] = value
  return out
