"""
Tests for the shared job logger: structured fields, error collection and levels.
"""

import logging

import pytest

from juntalab.services.job_log_handling import (
  format_fields,
  job,
  log_critical,
  log_debug,
  log_error,
  log_info,
  log_warning,
)


@pytest.fixture(autouse=True)
def fresh_job():
  job.start('test')
  yield
  job.start('test')
  job.set_level('INFO')


def test_format_fields():
  assert format_fields(n=8, eps=0.1) == 'n=8 eps=0.1'
  assert format_fields() == ''


def test_info_and_warning_carry_fields(caplog):
  with caplog.at_level(logging.INFO, logger='juntalab'):
    log_info('generated instance', n=8)
    log_warning('budget exceeded')
  assert caplog.messages == ['generated instance n=8', 'budget exceeded']


def test_errors_are_collected(caplog):
  with caplog.at_level(logging.INFO, logger='juntalab'):
    log_error('first')
    log_critical('second')
  assert job.error_messages == ['first', 'second']
  assert [r.levelname for r in caplog.records] == ['ERROR', 'CRITICAL']


def test_start_clears_errors():
  log_error('stale')
  job.start('wht')
  assert job.name == 'wht'
  assert job.error_messages == []


def test_debug_respects_level(caplog):
  with caplog.at_level(logging.DEBUG):
    job.set_level('info')
    log_debug('hidden', step=1)
    job.set_level('debug')
    log_debug('shown', step=2)
  assert caplog.messages == ['shown step=2']
