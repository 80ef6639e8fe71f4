"""Exception types raised by junta-lab.

Library code raises these; the services and CLI layers log them and turn them into
exit codes.
"""


class JuntaLabError(Exception):
  """Base class for every junta-lab failure."""


class CapacityError(JuntaLabError):
  """A size limit was exceeded (arity, feature count, family size, iterations)."""


class DomainError(JuntaLabError, ValueError):
  """An argument is outside the domain an operation accepts."""


class EmptyDistributionError(JuntaLabError):
  """A sampler was asked to draw from a distribution with zero total mass."""


class UnsupportedModeError(JuntaLabError):
  """A provider or evaluation mode is known but not available."""


class ConfigError(JuntaLabError):
  """Invalid experiment configuration or parameter override."""


class DataError(JuntaLabError):
  """Malformed input files or an exhausted sampler."""


class InvariantViolation(JuntaLabError, RuntimeError):
  """An internal invariant failed; this is a bug, not a user error."""


class BudgetExceeded(JuntaLabError):
  """A query counter passed its configured budget."""

  def __init__(self, used: int, budget: int):
    super().__init__(f'query budget exceeded: {used} > {budget}')
    self.used = used
    self.budget = budget
