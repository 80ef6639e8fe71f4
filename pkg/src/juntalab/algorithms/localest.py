"""Local estimators and the bundle-based junta-correlation estimator.

local_g(x) = f(x) − Σ_{i ≤ r} alpha_i Σ_{|S| = i} ∂_S f(x)·chi_S(x), with every
derivative term a signed sum of f over the subcube x^{⊕T}, T ⊆ S. Collecting terms,
the value at x^{⊕T} enters with a weight that depends on |T| only, so local_g is a
fixed weighted sum over the radius-r Hamming ball. In Fourier terms local_g keeps
f̂(∅) and scales every other f̂(S) by 1 − p(|S|).

A sample bundle stores, for each ball point y and each mixture index i, a few
draws from N_{rho^i}^{C̄}(y). Averaging oracle estimates at those draws and pushing
them through the ball weights and the mixture weights estimates the local
estimator of SharpNoise^{C̄} f restricted to x_U, for every U ⊇ C from the same
bundles. A single draw per entry carries variance up to the square of the
mixture's l1 norm, which the absolute value turns into upward bias.
"""

import math
from dataclasses import dataclass

import numpy as np

from juntalab.algorithms.flatpoly import FlatPolynomial, build_flat_poly
from juntalab.algorithms.fourier import inverse_wht, level_weights, sample_noise_points, wht
from juntalab.algorithms.sharpnoise import NoiseMixture
from juntalab.errors import DataError, DomainError
from juntalab.models.boolfn import BooleanFunction, FourierSpectrum
from juntalab.oracles.estimators import estimate_values
from juntalab.oracles.value_oracle import ValueOracle
from juntalab.services.job_log_handling import log_debug
from juntalab.utils.bits import (
  CoordSet,
  ball_offsets,
  ball_size,
  full_mask,
  is_subset,
  popcount,
  popcount_table,
  popcounts,
)


def radius_for(L: int, tau: float, n: int, c: float = 1.0) -> int:
  """r = c·⌈√(L·ln L·ln(1/tau))⌉, clamped to [1, min(L, n)]."""
  base = math.sqrt(L * math.log(L) * math.log(1.0 / tau)) if L > 1 else 1.0
  return max(1, min(math.ceil(c * math.ceil(base)), L, n))


@dataclass(frozen=True, eq=False)
class LocalEstParams:
  L: int
  tau: float
  r: int
  flat: FlatPolynomial
  c: float = 1.0

  @classmethod
  def build(cls, L: int, tau: float, n: int, c: float = 1.0, backend: str = 'simplex') -> 'LocalEstParams':
    """Pick r from (L, tau), solve for the flat polynomial, and insist it meets tau."""
    if L < 1 or not 0 < tau < 1:
      raise DomainError(f'need L ≥ 1 and 0 < tau < 1, got L={L}, tau={tau}')
    r = radius_for(L, tau, n, c)
    flat = build_flat_poly(r, L, backend)
    if flat.achieved_error > tau:
      raise DomainError(
        f'flat polynomial error {flat.achieved_error:.3g} exceeds tau={tau} at r={r}, L={L}; raise c'
      )
    return cls(L, tau, r, flat, c)

  def multiplier(self, level: int) -> float:
    """Fourier scaling local_g applies at a level: 1 at 0, 1 − p(level) above."""
    return 1.0 if level == 0 else 1.0 - self.flat.evaluate_binomial(level)


def ball_weights(domain_arity: int, p: LocalEstParams) -> np.ndarray:
  """Weight of f(x^{⊕T}) in local_g as a function of |T|, for |T| = 0..r."""
  alphas = p.flat.binom_coeffs
  weights = np.zeros(p.r + 1)
  weights[0] = 1.0
  for j in range(min(p.r, domain_arity) + 1):
    total = 0.0
    for i in range(max(1, j), p.r + 1):
      total += alphas[i - 1] * 2.0**-i * math.comb(domain_arity - j, i - j)
    weights[j] -= (-1) ** j * total
  return weights


@dataclass(frozen=True, eq=False)
class BallValues:
  center: int
  r: int
  domain: CoordSet
  values: np.ndarray

  def __post_init__(self):
    expected = ball_size(popcount(self.domain), self.r)
    if len(self.values) != expected:
      raise DomainError(f'ball of radius {self.r} needs {expected} values, got {len(self.values)}')

  @property
  def offsets(self) -> np.ndarray:
    return ball_offsets(self.domain, self.r)


def ball_values(f: BooleanFunction, x: int, r: int, domain: CoordSet | None = None) -> BallValues:
  domain = full_mask(f.n) if domain is None else domain
  return BallValues(x, r, domain, f.values[x ^ ball_offsets(domain, r)])


def local_g(ball: BallValues, p: LocalEstParams) -> float:
  if ball.r != p.r:
    raise DomainError(f'ball radius {ball.r} does not match r={p.r}')
  weights = ball_weights(popcount(ball.domain), p)
  return float(weights[popcounts(ball.offsets)] @ np.asarray(ball.values, dtype=float))


def local_estimate(ball: BallValues, p: LocalEstParams) -> float:
  return abs(local_g(ball, p))


def local_g_table(f: BooleanFunction, p: LocalEstParams) -> np.ndarray:
  """local_g at every point of the cube, through the Fourier multiplier."""
  scale = np.array([p.multiplier(level) for level in range(f.n + 1)])
  spec = wht(f)
  return inverse_wht(FourierSpectrum(f.n, spec.coeffs * scale[popcount_table(f.n)])).values


def exact_local_values(f: BooleanFunction, coords: CoordSet, p: LocalEstParams) -> np.ndarray:
  """local_g of f restricted to x_U, on the ball around x over the other coordinates, at every x.

  The restriction to x_U keeps every f̂(S) and scales it by the multiplier at
  level |S \\ U|, so the whole table comes from one inverse transform.
  """
  scale = np.array([p.multiplier(level) for level in range(f.n + 1)])
  outside = popcount_table(f.n)[np.arange(f.size) & ~coords & full_mask(f.n)]
  spec = wht(f)
  return inverse_wht(FourierSpectrum(f.n, spec.coeffs * scale[outside])).values


def exact_local_corr(f: BooleanFunction, coords: CoordSet, p: LocalEstParams) -> float:
  """E_x |local_g of f restricted to x_U|."""
  return float(np.abs(exact_local_values(f, coords, p)).mean())


def local_error_bound(spec: FourierSpectrum, p: LocalEstParams) -> float:
  """tau·√Var[f] + 5·n^r·√W^{≥L}[f]."""
  weights = level_weights(spec)
  high = float(weights[p.L :].sum()) if p.L <= spec.n else 0.0
  return p.tau * math.sqrt(max(spec.variance(), 0.0)) + 5.0 * spec.n**p.r * math.sqrt(high)


@dataclass(frozen=True, eq=False)
class SampleBundle:
  center: int
  C: CoordSet
  rho: float
  degree: int
  r: int
  n: int
  entries: np.ndarray
  draws: int = 1

  def __post_init__(self):
    expected = (ball_size(self.n, self.r), self.degree + 1, self.draws)
    if self.entries.shape != expected:
      raise DomainError(f'bundle entries shaped {self.entries.shape}, expected {expected}')

  @property
  def offsets(self) -> np.ndarray:
    return ball_offsets(full_mask(self.n), self.r)

  def to_dict(self) -> dict:
    return {
      'center': int(self.center),
      'C': int(self.C),
      'rho': self.rho,
      'degree': self.degree,
      'r': self.r,
      'n': self.n,
      'draws': self.draws,
      'entries': self.entries.tolist(),
    }

  @classmethod
  def from_dict(cls, data: dict) -> 'SampleBundle':
    try:
      return cls(
        int(data['center']),
        int(data['C']),
        float(data['rho']),
        int(data['degree']),
        int(data['r']),
        int(data['n']),
        np.asarray(data['entries'], dtype=np.int64),
        int(data.get('draws', 1)),
      )
    except (KeyError, TypeError, ValueError) as e:
      raise DataError(f'malformed bundle record: {e}') from e


def draw_bundle(
  x: int,
  C: CoordSet,
  p: LocalEstParams,
  mix: NoiseMixture,
  n: int,
  rng: np.random.Generator,
  coupled: bool = False,
  draws: int = 1,
) -> SampleBundle:
  """For each y in B(x, r) and each mixture index i, *draws* draws from N_{rho^i}^{C̄}(y).

  With coupled=True each draw shares a single uniform threshold per coordinate across
  the mixture indices (coordinate j is redrawn at index i iff u_j ≥ rho^i, always to
  the same fresh bit); each entry keeps its N_{rho^i} marginal.
  """
  if draws < 1:
    raise DomainError(f'need at least one draw per entry, got {draws}')
  centers = x ^ ball_offsets(full_mask(n), p.r)
  terms = mix.degree + 1
  rates = mix.rho ** np.arange(terms)
  noisy = full_mask(n) & ~C
  if not coupled:
    entries = sample_noise_points(
      np.repeat(centers, terms * draws), np.tile(np.repeat(rates, draws), centers.size), noisy, n, rng
    ).reshape(centers.size, terms, draws)
  else:
    bits = 1 << np.arange(n, dtype=np.int64)
    thresholds = rng.random((centers.size, 1, draws, n))
    fresh = rng.integers(0, 2, size=(centers.size, 1, draws, n), dtype=np.int64).astype(bool)
    redraw = (thresholds >= rates[None, :, None, None]) & ((bits & noisy) != 0)
    current = (centers[:, None, None, None] & bits) != 0
    flips = (redraw & (fresh != current)).astype(np.int64) @ bits
    entries = centers[:, None, None] ^ flips
  return SampleBundle(int(x), C, float(mix.rho), mix.degree, p.r, n, entries, draws)


def draw_bundles(
  xs,
  C: CoordSet,
  p: LocalEstParams,
  mix: NoiseMixture,
  n: int,
  rng: np.random.Generator,
  coupled: bool = False,
  draws: int = 1,
) -> list[SampleBundle]:
  streams = rng.spawn(len(xs))
  return [draw_bundle(int(x), C, p, mix, n, stream, coupled, draws) for x, stream in zip(xs, streams)]


class BundleCache:
  """Oracle estimates at bundle points, shared by every candidate U.

  The first lookup estimates every distinct entry of the bundles at once; later
  lookups with other U sets make no new queries.
  """

  def __init__(self):
    self._points = np.zeros(0, dtype=np.int64)
    self._values = np.zeros(0)

  def __len__(self):
    return self._points.size

  def fill(self, o: ValueOracle, points: np.ndarray, eps: float, delta: float, rng, max_queries=None):
    unique = np.unique(np.asarray(points, dtype=np.int64))
    missing = unique[~np.isin(unique, self._points)]
    if missing.size == 0:
      return
    estimates = estimate_values(o, missing, eps, delta, rng, max_queries)
    points = np.concatenate([self._points, missing])
    values = np.concatenate([self._values, estimates])
    order = np.argsort(points)
    self._points, self._values = points[order], values[order]
    log_debug('bundle cache filled', new=missing.size, total=self._points.size)

  def lookup(self, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.int64)
    index = np.searchsorted(self._points, points)
    index = np.minimum(index, max(self._points.size - 1, 0))
    if self._points.size == 0 or np.any(self._points[index] != points):
      raise DomainError('bundle point missing from cache')
    return self._values[index]


def default_accuracy(eps: float, mix: NoiseMixture, ball: int) -> float:
  """Per-entry accuracy ε' = ε / (10·(κΔ+1)·ballsize·Σ|α|); the failure rate uses the same form."""
  return eps / (10.0 * (mix.degree + 1) * ball * mix.l1_norm)


def bundle_local_values(
  o: ValueOracle,
  U: CoordSet,
  C: CoordSet,
  xs,
  bundles: list[SampleBundle],
  p: LocalEstParams,
  mix: NoiseMixture,
  eps: float,
  rng: np.random.Generator,
  cache: BundleCache | None = None,
  eps_prime: float | None = None,
  delta_prime: float | None = None,
  max_queries: int | None = None,
) -> np.ndarray:
  """Σ_{T ⊆ Ū, |T| ≤ r} Σ_i w_{|T|}·alpha_i·mean_d est(entry_j(T, i, d)) for every bundle j.

  Each value estimates local_g of SharpNoise^{C̄} f restricted to x_U at the
  bundle's centre without bias, when the oracle estimates are unbiased.
  """
  if not is_subset(C, U):
    raise DomainError('C must be a subset of U')
  if len(xs) != len(bundles):
    raise DomainError(f'{len(xs)} points but {len(bundles)} bundles')
  for x, bundle in zip(xs, bundles):
    if (
      bundle.center != int(x)
      or bundle.C != C
      or bundle.r != p.r
      or bundle.degree != mix.degree
      or not math.isclose(bundle.rho, mix.rho)
      or bundle.n != o.arity
      or bundle.draws != bundles[0].draws
    ):
      raise DomainError('bundle parameters do not match the estimator')
  if not bundles:
    raise DomainError('no bundles to estimate from')

  n = o.arity
  free = full_mask(n) & ~U
  offsets = bundles[0].offsets
  inside = (offsets & U) == 0
  weights = np.where(inside, ball_weights(popcount(free), p)[popcounts(offsets)], 0.0)
  coefficients = weights[:, None] * mix.alphas[None, :]

  ball = ball_size(popcount(free), p.r)
  accuracy = eps_prime if eps_prime is not None else default_accuracy(eps, mix, ball)
  failure = delta_prime if delta_prime is not None else min(0.5, default_accuracy(eps, mix, ball))
  cache = cache if cache is not None else BundleCache()
  entries = np.stack([bundle.entries for bundle in bundles])
  cache.fill(o, entries.reshape(-1), accuracy, failure, rng, max_queries)
  values = cache.lookup(entries.reshape(-1)).reshape(entries.shape).mean(axis=-1)
  return np.einsum('jbk,bk->j', values, coefficients)


def estimate_junta_corr(
  o: ValueOracle,
  U: CoordSet,
  C: CoordSet,
  xs,
  bundles: list[SampleBundle],
  p: LocalEstParams,
  mix: NoiseMixture,
  eps: float,
  rng: np.random.Generator,
  cache: BundleCache | None = None,
  eps_prime: float | None = None,
  delta_prime: float | None = None,
  max_queries: int | None = None,
) -> float:
  """Est' = (1/N) Σ_j |bundle_local_values_j|."""
  values = bundle_local_values(
    o, U, C, xs, bundles, p, mix, eps, rng,
    cache=cache, eps_prime=eps_prime, delta_prime=delta_prime, max_queries=max_queries,
  )
  return float(np.abs(values).mean())
