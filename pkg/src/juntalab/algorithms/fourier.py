"""Fourier analysis on the hypercube: transforms, averaging, noise, sampling.

All operations are exact and dense. Coordinates are 0-indexed bit positions; a
character chi_S is indexed by the bitmask of S.
"""

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from juntalab.errors import DomainError, EmptyDistributionError
from juntalab.models.boolfn import BooleanFunction, FourierSpectrum, check_arity
from juntalab.utils.bits import (
  CoordSet,
  bits_of,
  full_mask,
  popcount_table,
  submasks,
)


def _butterfly(table: np.ndarray, n: int) -> np.ndarray:
  """Unnormalised Walsh-Hadamard butterfly over a copy of *table*."""
  out = np.array(table, dtype=float)
  half = 1
  for _ in range(n):
    view = out.reshape(-1, 2, half)
    low = view[:, 0, :].copy()
    high = view[:, 1, :]
    view[:, 0, :] = low + high
    view[:, 1, :] = low - high
    half <<= 1
  return out


def wht(f: BooleanFunction) -> FourierSpectrum:
  """coeffs[S] = 2^-n Σ_x f(x) chi_S(x)."""
  check_arity(f.n)
  return FourierSpectrum(f.n, _butterfly(f.values, f.n) / f.size)


def inverse_wht(spec: FourierSpectrum, bound: float | None = None) -> BooleanFunction:
  values = _butterfly(spec.coeffs, spec.n)
  if bound is not None:
    # keep tiny round-off from tripping the bound check
    values = np.clip(values, -bound, bound)
  return BooleanFunction(spec.n, values, bound)


def _apply_multiplier(f: BooleanFunction, multiplier: np.ndarray) -> BooleanFunction:
  spec = wht(f)
  return inverse_wht(FourierSpectrum(f.n, spec.coeffs * multiplier), f.bound)


def average_over(f: BooleanFunction, coords: CoordSet) -> BooleanFunction:
  """f averaged over the coordinates in *coords*: drops every S meeting *coords*."""
  if coords == 0:
    return f
  keep = (np.arange(f.size, dtype=np.int64) & coords) == 0
  return _apply_multiplier(f, keep.astype(float))


def noise_operator(f: BooleanFunction, rho: float, coords: CoordSet) -> BooleanFunction:
  """T_rho on *coords*: coefficient S is scaled by rho^|S ∩ coords|."""
  if not 0.0 <= rho <= 1.0:
    raise DomainError(f'noise rate {rho} outside [0, 1]')
  if rho == 1.0 or coords == 0:
    return f
  weights = popcount_table(f.n)[np.arange(f.size) & coords]
  return _apply_multiplier(f, np.power(rho, weights))


def sample_noise_points(
  xs: np.ndarray, rho, coords: CoordSet, n: int, rng: np.random.Generator
) -> np.ndarray:
  """Draw y ~ N_rho(x) on *coords* for every x; *rho* may be a scalar or per-point.

  Coordinates outside *coords* are copied. Each coordinate inside is kept with
  probability rho and otherwise replaced by a uniform bit.
  """
  xs = np.asarray(xs, dtype=np.int64)
  if coords == 0 or xs.size == 0:
    return xs.copy()
  rho = np.asarray(rho, dtype=float)
  if np.any((rho < 0.0) | (rho > 1.0)):
    raise DomainError('noise rate outside [0, 1]')
  bits = 1 << np.arange(n, dtype=np.int64)
  in_coords = (bits & coords) != 0
  shape = xs.shape + (n,)
  resample = rng.random(shape) >= np.expand_dims(rho, -1)
  resample &= in_coords
  fresh = rng.integers(0, 2, size=shape, dtype=np.int64).astype(bool)
  flip_bits = resample & (fresh != ((xs[..., None] & bits) != 0))
  return xs ^ (flip_bits.astype(np.int64) @ bits)


def sample_noise_point(x: int, rho: float, coords: CoordSet, n: int, rng: np.random.Generator) -> int:
  return int(sample_noise_points(np.array([x]), rho, coords, n, rng)[0])


def spectral_sample(
  spec: FourierSpectrum, rng: np.random.Generator, size: int | None = None
) -> CoordSet | np.ndarray:
  """Draw S with probability f̂(S)² / Σ f̂² by inverse CDF over the table."""
  weights = np.square(spec.coeffs)
  total = float(weights.sum())
  if total <= 0.0:
    raise EmptyDistributionError('spectrum has no mass to sample')
  cdf = np.cumsum(weights) / total
  draws = np.searchsorted(cdf, rng.random(1 if size is None else size), side='right')
  draws = np.minimum(draws, spec.coeffs.size - 1).astype(np.int64)
  # never land on a zero-weight index through round-off at the top of the cdf
  zero = weights[draws] == 0.0
  if np.any(zero):
    draws[zero] = np.flatnonzero(weights)[-1]
  return int(draws[0]) if size is None else draws


def junta_corr_exact(f: BooleanFunction | FourierSpectrum, coords: CoordSet) -> float:
  """corr(f, J_T) = E_x |f averaged over the complement of T|, from a table or a spectrum."""
  if isinstance(f, FourierSpectrum):
    f = inverse_wht(f)
  elif not isinstance(f, BooleanFunction):
    raise DomainError(f'expected a BooleanFunction or FourierSpectrum, got {type(f).__name__}')
  return float(np.abs(average_over(f, full_mask(f.n) & ~coords).values).mean())


def correlation(f: BooleanFunction, g: BooleanFunction) -> float:
  return float(np.dot(f.values, g.values) / f.size)


def level_weights(spec: FourierSpectrum) -> np.ndarray:
  """W^{=i}[f] for i = 0..n."""
  return np.bincount(
    popcount_table(spec.n), weights=np.square(spec.coeffs), minlength=spec.n + 1
  )


def weight_at_or_above(spec: FourierSpectrum, level: int) -> float:
  if not 0 <= level <= spec.n + 1:
    raise DomainError(f'level {level} outside 0..{spec.n}')
  return float(level_weights(spec)[level:].sum())


def escaping_mass(spec: FourierSpectrum, coords: CoordSet, level: int) -> float:
  """Σ f̂(S)² over S with |S \\ coords| ≥ level."""
  outside = popcount_table(spec.n)[np.arange(spec.coeffs.size) & ~coords & full_mask(spec.n)]
  return float(np.square(spec.coeffs)[outside >= level].sum())


@dataclass(frozen=True, eq=False)
class Restriction:
  """f with the coordinates of `fixed` pinned; `coordinate_map[j]` is the original
  coordinate behind coordinate j of `function`."""

  function: BooleanFunction
  coordinate_map: tuple[int, ...]
  fixed: CoordSet


def restrict(f: BooleanFunction, coords: CoordSet, assignment: Mapping[int, int]) -> Restriction:
  """f_{U→y} on the n − |U| free coordinates.

  Args:
    assignment: coordinate -> ±1 for every coordinate of *coords*.
  """
  fixed_bits = 0
  for coord in bits_of(coords):
    if coord not in assignment:
      raise DomainError(f'assignment misses coordinate {coord}')
    value = assignment[coord]
    if value not in (1, -1):
      raise DomainError(f'coordinate {coord} assigned {value}, expected ±1')
    if value == -1:
      fixed_bits |= 1 << coord
  free = [i for i in range(f.n) if not coords >> i & 1]
  local = np.arange(1 << len(free), dtype=np.int64)
  original = np.full(local.shape, fixed_bits, dtype=np.int64)
  for j, coord in enumerate(free):
    original |= ((local >> j) & 1) << coord
  restricted = BooleanFunction(len(free), f.values[original], f.bound)
  return Restriction(restricted, tuple(free), coords)


def restricted_coefficient(spec: FourierSpectrum, subset: CoordSet, coords: CoordSet, assignment: Mapping[int, int]) -> float:
  """f̂_{U→y}(S) = Σ_{A ⊆ U} f̂(S ∪ A) chi_A(y), with S given in original coordinates."""
  total = 0.0
  for part in submasks(coords):
    sign = 1
    for coord in bits_of(part):
      sign *= assignment[coord]
    total += spec.coeffs[subset | part] * sign
  return total


def naive_coefficient(f: BooleanFunction, subset: CoordSet) -> float:
  """2^-n Σ_x f(x) chi_S(x) by direct summation."""
  points = np.arange(f.size, dtype=np.int64)
  chi = 1 - 2 * (np.bitwise_count(points & subset).astype(np.int64) & 1)
  return float(np.dot(f.values, chi) / f.size)
