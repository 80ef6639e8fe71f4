"""The `junta-lab` command group: one subcommand per experiment task."""

import sys

import click

from juntalab.errors import JuntaLabError
from juntalab.services.config import TASKS, load_config
from juntalab.services.experiments import run_and_report
from juntalab.services.job_log_handling import job, log_critical

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_FAILURE = 2

TASK_OPTIONS = (
  click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), help='YAML, JSON or key=value file.'),
  click.option('--seed', type=int, default=None, help='Root seed (unsigned 64-bit).'),
  click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory; defaults to $JUNTALAB_OUT or ./out.'),
  click.option('--override', 'overrides', multiple=True, metavar='KEY=VALUE', help='Schedule, instance.* or top-level setting.'),
  click.option('--log-level', default=None, help='Overrides LOG_LEVEL for this run.'),
)


def _task_options(command):
  for option in reversed(TASK_OPTIONS):
    command = option(command)
  return command


def run_task(task: str, config_path, seed, out, overrides, log_level) -> int:
  job.start(task)
  if log_level:
    job.set_level(log_level)
  try:
    config = load_config(config_path, task=task, seed=seed, out=out, assignments=overrides)
    outcome = run_and_report(config)
  except JuntaLabError as e:
    log_critical(f'{task} failed: {type(e).__name__}: {e}')
    return EXIT_FAILURE
  if outcome.exit_code:
    return EXIT_TOLERANCE
  return EXIT_FAILURE if job.error_messages else EXIT_OK


@click.group()
@click.version_option(package_name='junta-lab')
def cli():
  """Tolerant junta testing and agnostic conjunction learning at desk scale."""


def _register(task: str):
  @cli.command(name=task, help=f'Run the {task} task across the configured seeds.')
  @_task_options
  def command(config_path, seed, out, overrides, log_level):
    sys.exit(run_task(task, config_path, seed, out, overrides, log_level))

  return command


for _task in TASKS:
  _register(_task)


def main():
  cli()
