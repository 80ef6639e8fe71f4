from typing import Iterable

from juntalab.errors import ConfigError


def update_dict(this_dict: dict, key, sub_dict: dict) -> dict:
  """
  Merges sub_dict into the nested dictionary held at this_dict[key].

  The nested dictionary is created when missing; nested dictionaries inside
  sub_dict are merged recursively rather than replaced.

  Args:
    this_dict (dict): The dictionary to update in place.
    key (hashable): The key whose value receives sub_dict.
    sub_dict (dict): Values to merge.

  Returns:
    dict: this_dict[key] after the merge.
  """
  target = this_dict.setdefault(key, {})
  if not isinstance(target, dict):
    raise ConfigError(f'cannot merge a mapping into {key!r}: it holds {type(target).__name__}')
  for name, value in sub_dict.items():
    if isinstance(value, dict):
      update_dict(target, name, value)
    else:
      target[name] = value
  return target


def parse_assignments(lines: Iterable[str]) -> dict:
  """
  Reads 'key=value' strings into a nested dictionary.

  Dotted keys nest ('instance.n=8' becomes {'instance': {'n': '8'}}); blank lines
  and lines starting with '#' are skipped. Values stay strings for the caller to
  coerce.
  """
  out: dict = {}
  for raw in lines:
    line = raw.strip()
    if not line or line.startswith('#'):
      continue
    if '=' not in line:
      raise ConfigError(f'expected key=value, got {line!r}')
    key, value = (part.strip() for part in line.split('=', 1))
    if not key:
      raise ConfigError(f'missing key in {line!r}')
    *parents, leaf = key.split('.')
    target = out
    for parent in parents:
      target = update_dict(target, parent, {})
    target[leaf] = value
  return out
