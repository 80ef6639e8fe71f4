"""Experiment configuration.

A config file is YAML, JSON (read through the YAML loader) or plain key=value lines
with dotted keys for the nested `instance` and `overrides` sections. Values from the
command line are merged over the file.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from juntalab.errors import ConfigError
from juntalab.models.params import ParamSchedule
from juntalab.services.instances import InstanceSpec
from juntalab.services.job_log_handling import log_debug
from juntalab.utils.utilities import parse_assignments, update_dict

TASKS = (
  'gen',
  'wht',
  'test-junta-quantum-sim',
  'test-junta-classical',
  'learn-conj',
  'ninf',
  'refine',
  'report',
)
SECTIONS = ('instance', 'overrides')


@dataclass(frozen=True)
class ExperimentConfig:
  task: str
  seed: int = 0
  seeds: int = 1
  eps: float = 0.2
  tolerance: float | None = None
  success_fraction: float = 2 / 3
  instance: InstanceSpec = field(default_factory=InstanceSpec)
  overrides: dict = field(default_factory=dict)
  out: Path = Path('out')
  timing: bool = False

  def __post_init__(self):
    if self.task not in TASKS:
      raise ConfigError(f'task must be one of {TASKS}, got {self.task!r}')
    if not 0 <= self.seed < 2**64:
      raise ConfigError(f'seed must be an unsigned 64-bit integer, got {self.seed}')
    if self.seeds < 1:
      raise ConfigError(f'seeds must be positive, got {self.seeds}')
    if not 0 < self.eps < 1:
      raise ConfigError(f'eps must lie in (0, 1), got {self.eps}')
    # fails early on unknown or badly typed schedule keys
    self.schedule()

  @property
  def allowed_error(self) -> float:
    return self.eps if self.tolerance is None else self.tolerance

  def schedule(self) -> ParamSchedule:
    return ParamSchedule.desk().with_overrides(self.overrides)

  @classmethod
  def from_dict(cls, data: dict) -> 'ExperimentConfig':
    data = dict(data)
    if 'task' not in data:
      raise ConfigError('config has no task')
    known = set(cls.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
      raise ConfigError(f'unknown config keys {sorted(unknown)}')
    try:
      return cls(
        task=str(data['task']),
        seed=int(data.get('seed', 0)),
        seeds=int(data.get('seeds', 1)),
        eps=float(data.get('eps', 0.2)),
        tolerance=None if data.get('tolerance') in (None, 'none', '') else float(data['tolerance']),
        success_fraction=float(data.get('success_fraction', 2 / 3)),
        instance=InstanceSpec.from_dict(data.get('instance') or {}),
        overrides=dict(data.get('overrides') or {}),
        out=Path(data.get('out') or os.getenv('JUNTALAB_OUT', 'out')),
        timing=str(data.get('timing', False)).lower() in ('true', 'yes', '1'),
      )
    except (TypeError, ValueError) as e:
      raise ConfigError(f'bad config value: {e}') from e

  def to_dict(self) -> dict:
    return {
      'task': self.task,
      'seed': self.seed,
      'seeds': self.seeds,
      'eps': self.eps,
      'tolerance': self.tolerance,
      'success_fraction': self.success_fraction,
      'instance': self.instance.to_dict(),
      'overrides': dict(self.overrides),
      'out': str(self.out),
      'timing': self.timing,
    }


def read_config_file(path: Path | str) -> dict:
  """Raw mapping from a YAML/JSON file or a key=value file."""
  path = Path(path)
  try:
    text = path.read_text()
  except OSError as e:
    raise ConfigError(f'cannot read config {path}: {e}') from e
  if path.suffix.lower() in ('.yaml', '.yml', '.json'):
    try:
      data = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
      raise ConfigError(f'{path}: {e}') from e
    if not isinstance(data, dict):
      raise ConfigError(f'{path}: expected a mapping at the top level')
    return data
  return parse_assignments(text.splitlines())


def load_config(
  path: Path | str | None = None,
  task: str | None = None,
  seed: int | None = None,
  out: Path | str | None = None,
  assignments: list[str] | tuple[str, ...] = (),
) -> ExperimentConfig:
  """File values, then flags: *task*, *seed*, *out* and --override key=value pairs.

  Override keys naming a ParamSchedule field go to `overrides`; `instance.*` and
  top-level keys go where they name.
  """
  merged: dict = {}
  if path is not None:
    file_data = read_config_file(path)
    for section in SECTIONS:
      update_dict(merged, section, file_data.pop(section, None) or {})
    merged.update(file_data)
  schedule_keys = set(ParamSchedule.__dataclass_fields__)
  for key, value in parse_assignments(assignments).items():
    if key in SECTIONS and isinstance(value, dict):
      update_dict(merged, key, value)
    elif key in schedule_keys:
      update_dict(merged, 'overrides', {key: value})
    else:
      merged[key] = value
  if task is not None:
    merged['task'] = task
  if seed is not None:
    merged['seed'] = seed
  if out is not None:
    merged['out'] = str(out)
  log_debug('config merged', keys=sorted(merged))
  return ExperimentConfig.from_dict(merged)
