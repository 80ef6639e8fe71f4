"""The SharpNoise operator.

SharpNoise on coordinates V scales f̂(S) by

  lambda(c) = (1 − (1 − rho^c)^kappa)^Delta,   c = |S ∩ V|,  rho = 1 − 1/(2·ell),

which stays near 1 for c ≤ ell and falls below 2^-Delta once c ≥ kappa·ell.
Expanding (1 − (1 − x)^kappa)^Delta = Σ_i alpha_i x^i writes the operator as the
mixture Σ_i alpha_i T_{rho^i}, which is how it is reached through queries.
"""

import math
from dataclasses import dataclass

import numpy as np

from juntalab.errors import CapacityError, DomainError
from juntalab.algorithms.fourier import inverse_wht, sample_noise_points, wht
from juntalab.models.boolfn import BooleanFunction, FourierSpectrum
from juntalab.oracles.value_oracle import ValueOracle
from juntalab.utils.bits import CoordSet, full_mask, popcount_table

MIN_KAPPA = 5


@dataclass(frozen=True)
class SharpNoiseParams:
  ell: int
  kappa: int
  delta_exp: int
  V: CoordSet
  strict: bool = True

  def __post_init__(self):
    if self.ell < 1:
      raise DomainError(f'ell must be positive, got {self.ell}')
    if self.delta_exp < 1:
      raise DomainError(f'Delta must be positive, got {self.delta_exp}')
    # the attenuation contract needs kappa ≥ 5; strict=False admits the small
    # algebraic cases used to check the expansion
    if self.kappa < (MIN_KAPPA if self.strict else 1):
      raise DomainError(f'kappa must be at least {MIN_KAPPA}, got {self.kappa}')

  @property
  def rho(self) -> float:
    return 1.0 - 1.0 / (2.0 * self.ell)

  @property
  def degree(self) -> int:
    return self.kappa * self.delta_exp

  def with_coords(self, coords: CoordSet) -> 'SharpNoiseParams':
    return SharpNoiseParams(self.ell, self.kappa, self.delta_exp, coords, self.strict)


@dataclass(frozen=True, eq=False)
class NoiseMixture:
  alphas: np.ndarray
  rho: float
  integer_alphas: tuple[int, ...] = ()

  @property
  def degree(self) -> int:
    return self.alphas.size - 1

  @property
  def l1_norm(self) -> float:
    return float(np.abs(self.alphas).sum())

  def polynomial(self, x: float) -> float:
    return float(np.polynomial.polynomial.polyval(x, self.alphas))

  @classmethod
  def trivial(cls, rho: float = 1.0) -> 'NoiseMixture':
    """The identity operator: alpha_0 = 1."""
    return cls(np.array([1.0]), rho, (1,))


def attenuation(c: int, p: SharpNoiseParams) -> float:
  """lambda(c), evaluated in the log domain."""
  if c < 0:
    raise DomainError(f'intersection size must be nonnegative, got {c}')
  if c == 0:
    return 1.0
  rho_c = math.exp(c * math.log(p.rho))
  if rho_c >= 1.0:
    return 1.0
  miss = math.exp(p.kappa * math.log1p(-rho_c))
  if miss >= 1.0:
    return 0.0
  return math.exp(p.delta_exp * math.log1p(-miss))


def attenuation_table(n: int, p: SharpNoiseParams) -> np.ndarray:
  """lambda(|S ∩ V|) for every S over n coordinates."""
  by_size = np.array([attenuation(c, p) for c in range(n + 1)])
  return by_size[popcount_table(n)[np.arange(1 << n) & p.V]]


def apply_exact(spec: FourierSpectrum, p: SharpNoiseParams) -> FourierSpectrum:
  return FourierSpectrum(spec.n, spec.coeffs * attenuation_table(spec.n, p))


def apply_exact_function(f: BooleanFunction, p: SharpNoiseParams, bound: float | None = None) -> BooleanFunction:
  return inverse_wht(apply_exact(wht(f), p), bound)


def _integer_expansion(kappa: int, delta_exp: int) -> list[int]:
  # 1 − (1 − x)^kappa as integer power coefficients
  inner = [0] * (kappa + 1)
  for i in range(1, kappa + 1):
    inner[i] = -((-1) ** i) * math.comb(kappa, i)
  out = [1]
  for _ in range(delta_exp):
    product = [0] * (len(out) + kappa)
    for i, a in enumerate(out):
      if a:
        for j, b in enumerate(inner):
          product[i + j] += a * b
    out = product
  return out


def mixture_coeffs(p: SharpNoiseParams) -> NoiseMixture:
  """Power coefficients of (1 − (1 − x)^kappa)^Delta, exact in integers then cast."""
  integers = _integer_expansion(p.kappa, p.delta_exp)
  try:
    alphas = np.array([float(a) for a in integers])
  except OverflowError as e:
    raise CapacityError(f'mixture coefficients overflow doubles at kappa·Delta = {p.degree}') from e
  return NoiseMixture(alphas, p.rho, tuple(integers))


class SharpNoiseOracle(ValueOracle):
  """Σ_i alpha_i times one query of the inner oracle at a draw from N_{rho^i}^V(x)."""

  def __init__(self, inner: ValueOracle, p: SharpNoiseParams, mix: NoiseMixture | None = None):
    self.params = p
    self.mixture = mix or mixture_coeffs(p)
    terms = self.mixture.degree + 1
    super().__init__(inner.arity, inner.bound * self.mixture.l1_norm, inner.calls_per_query * terms)
    self.inner = inner
    self.coords = p.V & full_mask(inner.arity)
    self.deterministic = inner.deterministic and self.coords == 0
    self._rates = self.mixture.rho ** np.arange(terms)

  def _evaluate(self, xs, rng):
    terms = self._rates.size
    repeated = np.repeat(xs, terms)
    rates = np.tile(self._rates, xs.size)
    ys = sample_noise_points(repeated, rates, self.coords, self.arity, rng)
    answers = self.inner.query_many(ys, rng).reshape(xs.size, terms)
    return answers @ self.mixture.alphas

  def represented(self):
    inner = self.inner.represented()
    if inner is None:
      return None
    return apply_exact_function(inner, self.params.with_coords(self.coords), self.bound)


class ResidualOracle(ValueOracle):
  """h = g − SharpNoise^V g, from one plain query plus one mixture query."""

  def __init__(self, inner: ValueOracle, p: SharpNoiseParams, mix: NoiseMixture | None = None):
    self.sharp = SharpNoiseOracle(inner, p, mix)
    super().__init__(
      inner.arity,
      inner.bound * (self.sharp.mixture.l1_norm + 1.0),
      inner.calls_per_query + self.sharp.calls_per_query,
    )
    self.inner = inner
    self.params = p
    self.deterministic = self.sharp.deterministic

  def _evaluate(self, xs, rng):
    return self.inner.query_many(xs, rng) - self.sharp.query_many(xs, rng)

  def represented(self):
    inner = self.inner.represented()
    if inner is None:
      return None
    sharp = apply_exact(wht(inner), self.params.with_coords(self.sharp.coords))
    residual = wht(inner).coeffs - sharp.coeffs
    return inverse_wht(FourierSpectrum(inner.n, residual), self.bound)


def sharpnoise_oracle(o: ValueOracle, p: SharpNoiseParams, mix: NoiseMixture | None = None) -> SharpNoiseOracle:
  return SharpNoiseOracle(o, p, mix)


def h_oracle(o: ValueOracle, p: SharpNoiseParams, mix: NoiseMixture | None = None) -> ResidualOracle:
  return ResidualOracle(o, p, mix)
