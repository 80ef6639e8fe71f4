"""
Tests for the configuration dictionary helpers.
"""

import pytest

from juntalab.errors import ConfigError
from juntalab.utils.utilities import parse_assignments, update_dict


class TestUpdateDict:
  """update_dict merges into this_dict[key] and returns the merged mapping."""

  def test_creates_missing_key(self):
    data = {}
    merged = update_dict(data, 'overrides', {'kappa': 5})
    assert data == {'overrides': {'kappa': 5}}
    assert merged is data['overrides']

  def test_nested_dicts_merge_recursively(self):
    data = {'instance': {'n': 8, 'shape': {'a': 1}}}
    update_dict(data, 'instance', {'k': 3, 'shape': {'b': 2}})
    assert data == {'instance': {'n': 8, 'k': 3, 'shape': {'a': 1, 'b': 2}}}

  def test_scalar_values_are_replaced(self):
    data = {'instance': {'n': 8}}
    update_dict(data, 'instance', {'n': 10})
    assert data['instance']['n'] == 10

  def test_refuses_to_merge_into_a_scalar(self):
    with pytest.raises(ConfigError):
      update_dict({'instance': 4}, 'instance', {'n': 1})


class TestParseAssignments:
  def test_flat_and_dotted_keys(self):
    out = parse_assignments(['task=wht', 'instance.n = 8', 'instance.kind=junta'])
    assert out == {'task': 'wht', 'instance': {'n': '8', 'kind': 'junta'}}

  def test_blank_and_comment_lines_skipped(self):
    assert parse_assignments(['', '# note', '  seed=3  ']) == {'seed': '3'}

  def test_value_may_contain_equals(self):
    assert parse_assignments(['label=a=b']) == {'label': 'a=b'}

  @pytest.mark.parametrize('line', ['no-equals-sign', '=value'])
  def test_malformed_lines(self, line):
    with pytest.raises(ConfigError):
      parse_assignments([line])
