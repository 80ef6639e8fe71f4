import logging
import os

log_level = os.getenv('LOG_LEVEL', 'INFO').upper()


class Jobs:
  def __init__(self):
    self.error_messages = []
    self.name = None

  logging.basicConfig(
    format='[%(asctime)s] %(levelname)s %(threadName)s %(message)s',
    level=log_level,
  )
  log = logging.getLogger('juntalab')

  def start(self, name: str):
    """Begin a named run (one CLI task); clears errors from any earlier run."""
    self.name = name
    self.error_messages = []

  def set_level(self, level: str):
    self.log.setLevel(level.upper())


# Create a global shared instance
job = Jobs()


def format_fields(**fields) -> str:
  return ' '.join(f'{key}={value}' for key, value in fields.items())


def log_info(message: str, **fields):
  job.log.info(f'{message} {format_fields(**fields)}'.rstrip())


def log_error(error_message: str):
  job.error_messages.append(error_message)
  job.log.error(f'{error_message}')


def log_critical(error_message: str):
  job.error_messages.append(error_message)
  job.log.critical(f'{error_message}')


def log_warning(message: str, **fields):
  job.log.warning(f'{message} {format_fields(**fields)}'.rstrip())


def log_debug(message: str, **fields):
  if job.log.isEnabledFor(logging.DEBUG):
    job.log.debug(f'{message} {format_fields(**fields)}'.rstrip())
