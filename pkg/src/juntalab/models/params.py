"""Every tunable of the testers, Refine-Coordinates and the conjunction learner.

`ParamSchedule.desk()` carries the defaults used throughout the repo;
`ParamSchedule.asymptotic()` swaps in the asymptotic formulas. Derived quantities
(ell, kappa, r, m, ...) are computed from (k, k', eps) by the methods below,
always with base-2 logs and with set sizes clamped to [1, k'].
"""

import math
import sys
import types
import typing
from dataclasses import asdict, dataclass, fields, replace

from juntalab.errors import ConfigError

EVALUATION_MODES = ('exact', 'sampled')
LP_BACKENDS = ('simplex', 'highs')
NINF_MODES = ('paired', 'l2')


def _clamp(value: float, low: int, high: int) -> int:
  return max(low, min(high, math.ceil(value)))


def log_term(k_prime: int, eps: float) -> float:
  return max(1.0, math.log2(k_prime / eps))


def ceil_root(value: int, degree: int) -> int:
  """Smallest integer r ≥ 0 with r**degree ≥ value."""
  if value <= 0:
    return 0
  r = max(0, round(value ** (1 / degree)))
  while r**degree < value:
    r += 1
  while r > 0 and (r - 1) ** degree >= value:
    r -= 1
  return r


@dataclass(frozen=True)
class ParamSchedule:
  evaluation: str = 'exact'
  lp_backend: str = 'simplex'

  # SharpNoise and the local estimator (testers)
  c_ell: float = 1.0
  kappa: int | None = 5
  delta_exp: int | None = 10
  tau_factor: float = 0.1
  r_constant: float = 1.0
  samples: int = 400
  value_queries: int = 64
  coupled_bundles: bool = True
  cache_values: bool = True
  sampled_delta_exp: int | None = 1
  bundle_draws: int | None = None
  bundle_draw_cap: int = 32

  # quantum-sim tester
  outer_reps: int = 20
  spectral_draws: int | None = None
  reference_cap: int = 100_000

  # Refine-Coordinates / Find-High-Level-Coordinates
  c_m: float = 1e-4
  c_gamma: float = 2e-3
  c_ell_refine: float = 3e-3
  refine_outer_reps: int = 200
  family_cap: int = 20_000
  variance_delta: float = 2.0**-20
  ninf_mode: str = 'paired'
  ninf_delta: float = 0.1
  ninf_max_trials: int | None = 20_000
  l2_max_points: int | None = 256
  l2_max_inner: int | None = 16

  # classical tester
  direct_cap: int = 4000
  budget_factor: float = 4.0

  # conjunction learner
  learner_rounds: int = 500
  c_d: float = 0.5
  sample_factor: float = 50.0
  regression_cap: int = 1000
  rejection_factor: float = 4.0
  holdout_size: int | None = None

  def __post_init__(self):
    if self.evaluation not in EVALUATION_MODES:
      raise ConfigError(f'evaluation must be one of {EVALUATION_MODES}, got {self.evaluation!r}')
    if self.lp_backend not in LP_BACKENDS:
      raise ConfigError(f'lp_backend must be one of {LP_BACKENDS}, got {self.lp_backend!r}')
    if self.ninf_mode not in NINF_MODES:
      raise ConfigError(f'ninf_mode must be one of {NINF_MODES}, got {self.ninf_mode!r}')
    if self.samples < 1 or self.outer_reps < 1 or self.refine_outer_reps < 1 or self.learner_rounds < 1:
      raise ConfigError('sample and repetition counts must be positive')
    if self.bundle_draw_cap < 1 or (self.bundle_draws is not None and self.bundle_draws < 1):
      raise ConfigError('bundle draw counts must be positive')

  @classmethod
  def desk(cls) -> 'ParamSchedule':
    return cls()

  @classmethod
  def asymptotic(cls, k: int, k_prime: int, eps: float) -> 'ParamSchedule':
    """The asymptotic schedule. Counts of the form exp(poly) saturate at sys.maxsize."""
    log = log_term(k_prime, eps)

    def saturate(exponent: float) -> int:
      return sys.maxsize if exponent > 43 else math.ceil(math.exp(exponent))

    return cls(
      evaluation='sampled',
      kappa=None,
      delta_exp=None,
      sampled_delta_exp=None,
      c_m=10.0,
      c_gamma=1.0,
      c_ell_refine=1.0,
      outer_reps=saturate(k ** (1 / 3) * math.log(1 / eps)),
      reference_cap=sys.maxsize,
      refine_outer_reps=saturate(k ** (1 / 3) * log**5),
      family_cap=sys.maxsize,
      variance_delta=2.0 ** -(k_prime**2),
      ninf_max_trials=None,
      l2_max_points=None,
      l2_max_inner=None,
      direct_cap=sys.maxsize,
      learner_rounds=saturate(k ** (1 / 3) * math.log(1 / eps)),
    )

  def with_overrides(self, overrides: typing.Mapping[str, typing.Any]) -> 'ParamSchedule':
    """Copy with *overrides* applied; string values are coerced to the field type."""
    hints = typing.get_type_hints(type(self))
    known = {f.name for f in fields(self)}
    changes = {}
    for key, value in overrides.items():
      if key not in known:
        raise ConfigError(f'unknown schedule parameter {key!r}')
      changes[key] = _coerce(key, value, hints[key])
    return replace(self, **changes)

  def to_dict(self) -> dict:
    return asdict(self)

  # derived quantities ------------------------------------------------------

  def tester_ell(self, k: int, k_prime: int) -> int:
    return _clamp(self.c_ell * k ** (2 / 3), 1, k_prime)

  def kappa_for(self, k_prime: int, eps: float) -> int:
    return self.kappa if self.kappa is not None else math.ceil(10 * log_term(k_prime, eps))

  def delta_exp_for(self, k_prime: int, eps: float, r: int) -> int:
    return self.delta_exp if self.delta_exp is not None else math.ceil(10 * r * log_term(k_prime, eps))

  def noise_delta_exp(self) -> int | None:
    """Delta in force for this schedule; sampled runs are held to sampled_delta_exp."""
    if self.evaluation != 'sampled' or self.sampled_delta_exp is None:
      return self.delta_exp
    return self.sampled_delta_exp if self.delta_exp is None else min(self.delta_exp, self.sampled_delta_exp)

  def bundle_draws_for(self, mixture_norm: float, eps: float) -> int:
    """Noise draws per bundle entry: enough that mixture_norm/√draws ≤ 10·eps, capped."""
    if self.bundle_draws is not None:
      return self.bundle_draws
    return max(1, min(self.bundle_draw_cap, math.ceil((mixture_norm / (10.0 * eps)) ** 2)))

  def tau(self, eps: float) -> float:
    return self.tau_factor * eps

  def draws_per_rep(self, k: int) -> int:
    return self.spectral_draws if self.spectral_draws is not None else ceil_root(k, 3)

  def reference_count(self, k_prime: int, eps: float) -> int:
    return int(min((k_prime / eps) ** 4, self.reference_cap))

  def refine_ell(self, k: int, k_prime: int, eps: float) -> int:
    return _clamp(self.c_ell_refine * k ** (2 / 3) * log_term(k_prime, eps) ** 3, 1, k_prime)

  def refine_gamma(self, k: int, k_prime: int, eps: float) -> int:
    ell = self.refine_ell(k, k_prime, eps)
    return _clamp(self.c_gamma * k ** (1 / 3) * log_term(k_prime, eps) ** 3, 1, ell)

  def direct_points(self, k_prime: int, eps: float) -> int:
    return int(min(math.ceil((k_prime / eps) ** 2), self.direct_cap))

  def learner_degree(self, n: int, eps: float) -> int:
    return _clamp(self.c_d * n ** (1 / 3) * math.log2(1 / eps), 1, n)

  def regression_samples(self, features: int, eps: float) -> int:
    return int(min(math.ceil(self.sample_factor * features / eps**2), self.regression_cap))

  def holdout(self, n: int, eps: float) -> int:
    return self.holdout_size if self.holdout_size is not None else math.ceil(10 * n / eps**2)


def _coerce(key: str, value, hint):
  if not isinstance(value, str):
    return value
  options = typing.get_args(hint) if isinstance(hint, types.UnionType) else (hint,)
  text = value.strip()
  if type(None) in options and text.lower() in ('none', 'null', ''):
    return None
  for option in options:
    try:
      if option is bool:
        if text.lower() in ('true', 'yes', '1'):
          return True
        if text.lower() in ('false', 'no', '0'):
          return False
        continue
      if option is int:
        return int(text)
      if option is float:
        return float(text)
      if option is str:
        return text
    except ValueError:
      continue
  raise ConfigError(f'cannot read {value!r} as {hint} for {key!r}')
