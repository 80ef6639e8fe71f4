"""Tests for the junta-lab command group, driven through click's CliRunner."""

from unittest.mock import patch

import pytest
from click.testing import CliRunner

from juntalab.cli import EXIT_FAILURE, EXIT_OK, EXIT_TOLERANCE, cli, run_task
from juntalab.services.config import TASKS
from juntalab.services.experiments import ExperimentOutcome


@pytest.fixture
def runner():
  return CliRunner()


def test_every_task_is_a_subcommand():
  assert set(TASKS) <= set(cli.commands)


def test_wht_writes_outputs(runner, tmp_path):
  result = runner.invoke(
    cli, ['wht', '--out', str(tmp_path), '--seed', '3', '--override', 'instance.kind=random', '--override', 'instance.n=5']
  )
  assert result.exit_code == EXIT_OK, result.output
  assert (tmp_path / 'records.jsonl').exists()
  assert (tmp_path / 'summary.csv').exists()


def test_config_file_is_read(runner, tmp_path):
  config = tmp_path / 'run.yaml'
  config.write_text('seeds: 2\ninstance:\n  kind: random\n  n: 4\n')
  result = runner.invoke(cli, ['wht', '--config', str(config), '--out', str(tmp_path / 'out')])
  assert result.exit_code == EXIT_OK, result.output
  assert len((tmp_path / 'out' / 'records.jsonl').read_text().splitlines()) == 2


def test_bad_override_fails(runner, tmp_path):
  result = runner.invoke(cli, ['wht', '--out', str(tmp_path), '--override', 'no_such_knob=1'])
  assert result.exit_code == EXIT_FAILURE


def test_missing_config_file_is_a_usage_error(runner, tmp_path):
  result = runner.invoke(cli, ['wht', '--config', str(tmp_path / 'absent.yaml')])
  assert result.exit_code == 2
  assert 'does not exist' in result.output


class TestRunTask:
  def test_tolerance_breach(self, tmp_path):
    with patch('juntalab.cli.run_and_report', return_value=ExperimentOutcome(exit_code=1)):
      assert run_task('ninf', None, None, str(tmp_path), (), None) == EXIT_TOLERANCE

  def test_success(self, tmp_path):
    with patch('juntalab.cli.run_and_report', return_value=ExperimentOutcome()):
      assert run_task('ninf', None, 1, str(tmp_path), (), 'DEBUG') == EXIT_OK
