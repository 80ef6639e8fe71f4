"""
Tests for the experiment runner: per-seed records, the summary row and the exit
code, on instances small enough to run in a few seconds.
"""

import csv
import json

import pytest

from juntalab.errors import ConfigError
from juntalab.services.config import ExperimentConfig
from juntalab.services.experiments import RECORDS, SUMMARY, run_and_report, summarize
from juntalab.services.instances import InstanceSpec
from juntalab.services.job_log_handling import job
from juntalab.services.run_log import read_jsonl


# =============================================================================
# Helpers
# =============================================================================


def _config(tmp_path, task, instance=None, **kwargs):
  return ExperimentConfig(task=task, instance=instance or InstanceSpec(), out=tmp_path, **kwargs)


def _summary(tmp_path):
  with (tmp_path / SUMMARY).open() as handle:
    return list(csv.DictReader(handle))


@pytest.fixture(autouse=True)
def fresh_job():
  job.start('test')


# =============================================================================
# summarize
# =============================================================================


class TestSummarize:
  def test_fractions_and_means(self):
    records = [
      {'task': 'ninf', 'success': True, 'estimate': 0.5, 'exact': 0.4, 'abs_error': 0.1, 'queries': 10},
      {'task': 'ninf', 'success': False, 'estimate': 0.9, 'exact': 0.4, 'abs_error': 0.5, 'queries': 30},
      {'task': 'ninf', 'success': True, 'estimate': 0.3, 'exact': 0.3, 'abs_error': 0.0, 'queries': 20},
    ]
    summary = summarize(records, 2 / 3)
    assert summary['runs'] == 3 and summary['successes'] == 2
    assert summary['passed']
    assert summary['mean_abs_error'] == pytest.approx(0.2)
    assert summary['mean_queries'] == pytest.approx(20.0)
    assert summary['mean_runtime'] is None
    assert summary['mean_err_minus_opt'] is None

  def test_below_required_fraction(self):
    records = [{'task': 'wht', 'success': False}, {'task': 'wht', 'success': True}]
    assert not summarize(records, 2 / 3)['passed']

  def test_nothing_to_summarise(self):
    with pytest.raises(ConfigError):
      summarize([], 0.5)


# =============================================================================
# Tasks
# =============================================================================


class TestRunAndReport:
  def test_wht_records_and_summary(self, tmp_path):
    outcome = run_and_report(_config(tmp_path, 'wht', InstanceSpec(kind='random', n=6), seeds=3))
    assert outcome.exit_code == 0
    records = read_jsonl(tmp_path / RECORDS)
    assert [r['seed_index'] for r in records] == [0, 1, 2]
    assert all(r['success'] and 'runtime' not in r for r in records)
    assert _summary(tmp_path)[0]['runs'] == '3'

  def test_output_is_reproducible(self, tmp_path):
    first = tmp_path / 'a'
    second = tmp_path / 'b'
    spec = InstanceSpec(kind='junta', n=5, k=2)
    run_and_report(_config(first, 'ninf', spec, seed=11, seeds=2))
    run_and_report(_config(second, 'ninf', spec, seed=11, seeds=2))
    assert (first / RECORDS).read_text() == (second / RECORDS).read_text()

  def test_timing_adds_runtime(self, tmp_path):
    run_and_report(_config(tmp_path, 'wht', InstanceSpec(kind='random', n=3), timing=True))
    assert read_jsonl(tmp_path / RECORDS)[0]['runtime'] >= 0.0

  def test_gen_writes_instance_files(self, tmp_path):
    spec = InstanceSpec(kind='conjunction', n=5, size=2, count=40)
    run_and_report(_config(tmp_path, 'gen', spec, seeds=2))
    for index in ('0000', '0001'):
      assert (tmp_path / 'runs' / index / 'dataset.csv').exists()
      assert (tmp_path / 'runs' / index / 'instance.json').exists()

  def test_ninf_estimates_within_eps(self, tmp_path):
    outcome = run_and_report(_config(tmp_path, 'ninf', InstanceSpec(kind='junta', n=4, k=2), seeds=2))
    assert outcome.exit_code == 0
    assert all(r['queries'] > 0 for r in outcome.records)

  @pytest.mark.slow
  def test_learn_conj(self, tmp_path):
    spec = InstanceSpec(kind='conjunction', n=6, size=2, count=2000)
    config = _config(tmp_path, 'learn-conj', spec, eps=0.3, overrides={'learner_rounds': 60, 'regression_cap': 400})
    outcome = run_and_report(config)
    record = outcome.records[0]
    assert record['exact'] == 0.0
    assert record['err_minus_opt'] <= 0.3
    assert outcome.summary['mean_err_minus_opt'] == pytest.approx(record['err_minus_opt'])

  @pytest.mark.slow
  def test_quantum_sim_writes_report(self, tmp_path):
    spec = InstanceSpec(kind='junta', n=6, k=3, base='majority')
    outcome = run_and_report(_config(tmp_path, 'test-junta-quantum-sim', spec))
    assert outcome.exit_code == 0
    report = json.loads((tmp_path / 'runs' / '0000' / 'report.json').read_text())
    assert report['best_set'] == outcome.records[0]['best_set']

  @pytest.mark.slow
  def test_classical_on_a_parity(self, tmp_path):
    # chi on three coordinates has zero correlation with every 2-junta
    spec = InstanceSpec(kind='character', n=4, k=2)
    config = _config(tmp_path, 'test-junta-classical', spec, eps=0.5, overrides={'refine_outer_reps': 10})
    outcome = run_and_report(config)
    record = outcome.records[0]
    assert record['exact'] == pytest.approx(0.0)
    assert record['queries'] >= 0 and 'best_set' in record

  def test_wrong_instance_kind(self, tmp_path):
    with pytest.raises(ConfigError):
      run_and_report(_config(tmp_path, 'wht', InstanceSpec(kind='conjunction', n=4, size=1)))
    with pytest.raises(ConfigError):
      run_and_report(_config(tmp_path, 'learn-conj', InstanceSpec(kind='random', n=4)))


class TestReportTask:
  def test_rereads_records_and_flags_breach(self, tmp_path):
    lines = [
      {'task': 'ninf', 'seed': 0, 'seed_index': 0, 'success': False, 'abs_error': 0.4},
      {'task': 'ninf', 'seed': 0, 'seed_index': 1, 'success': True, 'abs_error': 0.1},
    ]
    (tmp_path / RECORDS).write_text(''.join(json.dumps(line) + '\n' for line in lines))
    outcome = run_and_report(_config(tmp_path, 'report'))
    assert outcome.exit_code == 1
    assert outcome.summary['success_fraction'] == 0.5
    assert any('[0]' in message for message in job.error_messages)
    assert _summary(tmp_path)[0]['passed'] == 'False'
