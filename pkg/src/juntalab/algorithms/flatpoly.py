"""Chebyshev polynomials and flat polynomials.

A flat polynomial of degree r on [N] has p(0) = 0 and p(i) close to 1 for
i = 1..N. The local estimator only needs its binomial-basis coefficients
alpha_i, with p(x) = Σ_i alpha_i·C(x, i).
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from juntalab.errors import CapacityError, DataError, DomainError
from juntalab.services.job_log_handling import log_debug
from juntalab.utils.simplex import solve_lp

MAX_DEGREE = 40


def chebyshev_eval(k: int, x: float) -> float:
  """T_k(x) by the three-term recurrence T_{j+1} = 2x·T_j − T_{j−1}."""
  if k < 0:
    raise DomainError(f'Chebyshev degree must be nonnegative, got {k}')
  previous, current = 1.0, float(x)
  if k == 0:
    return previous
  for _ in range(k - 1):
    previous, current = current, 2.0 * x * current - previous
  return current


def _two_sum(a: float, b: float) -> tuple[float, float]:
  s = a + b
  z = s - a
  return s, (a - (s - z)) + (b - z)


def _split(a: float) -> tuple[float, float]:
  c = 134217729.0 * a  # 2^27 + 1
  high = c - (c - a)
  return high, a - high


def _two_product(a: float, b: float) -> tuple[float, float]:
  p = a * b
  ah, al = _split(a)
  bh, bl = _split(b)
  return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def compensated_horner(coeffs, x: float) -> float:
  """Evaluate Σ coeffs[j]·x^j with an error-free transformation of each step."""
  x = float(x)
  total = float(coeffs[-1])
  correction = 0.0
  for coefficient in reversed(coeffs[:-1]):
    product, product_error = _two_product(total, x)
    total, sum_error = _two_sum(product, float(coefficient))
    correction = correction * x + (product_error + sum_error)
  return total + correction


@dataclass(frozen=True, eq=False)
class FlatPolynomial:
  r: int
  N: int
  power_coeffs: np.ndarray
  binom_coeffs: np.ndarray = field(init=False)
  achieved_error: float = field(init=False)

  def __post_init__(self):
    coeffs = np.zeros(self.r + 1)
    given = np.asarray(self.power_coeffs, dtype=float)
    if given.size > self.r + 1:
      raise DomainError(f'{given.size} coefficients for degree {self.r}')
    coeffs[: given.size] = given
    coeffs[0] = 0.0
    coeffs.setflags(write=False)
    object.__setattr__(self, 'power_coeffs', coeffs)
    object.__setattr__(self, 'binom_coeffs', binomial_basis(self))
    error = max((abs(self(i) - 1.0) for i in range(1, self.N + 1)), default=0.0)
    object.__setattr__(self, 'achieved_error', float(error))

  def __call__(self, x: float) -> float:
    return compensated_horner(self.power_coeffs, x)

  def evaluate_binomial(self, x: int) -> float:
    return float(sum(alpha * math.comb(x, i) for i, alpha in enumerate(self.binom_coeffs, 1)))

  def to_dict(self) -> dict:
    return {
      'r': self.r,
      'N': self.N,
      'achieved_error': self.achieved_error,
      'power_coeffs': self.power_coeffs.tolist(),
      'binom_coeffs': self.binom_coeffs.tolist(),
    }

  @classmethod
  def from_dict(cls, data: dict) -> 'FlatPolynomial':
    try:
      return cls(int(data['r']), int(data['N']), np.asarray(data['power_coeffs'], dtype=float))
    except (KeyError, TypeError, ValueError) as e:
      raise DataError(f'malformed flat polynomial record: {e}') from e


def binomial_basis(p: FlatPolynomial) -> np.ndarray:
  """alpha_1..alpha_r with p(x) = Σ alpha_i·C(x, i): the forward differences of p at 0."""
  values = np.array([compensated_horner(p.power_coeffs, j) for j in range(p.r + 1)])
  alphas = np.empty(p.r)
  for i in range(1, p.r + 1):
    alphas[i - 1] = sum((-1) ** (i - j) * math.comb(i, j) * values[j] for j in range(i + 1))
  return alphas


def _basis_matrix(r: int, N: int) -> np.ndarray:
  """Column j holds B_j(i) = T_j(2i/N − 1) − T_j(−1) at i = 1..N (B_j(0) = 0)."""
  points = np.arange(1, N + 1)
  columns = []
  for degree in range(1, r + 1):
    basis = Chebyshev.basis(degree, domain=[0, N])
    columns.append(basis(points) - basis(0))
  return np.column_stack(columns)


def _power_coeffs(cheb: np.ndarray, N: int) -> np.ndarray:
  series = Chebyshev(np.concatenate([[0.0], cheb]), domain=[0, N])
  power = series.convert(kind=Polynomial).coef
  out = np.zeros(cheb.size + 1)
  out[: power.size] = power
  out[0] = 0.0
  return out


def build_flat_poly(r: int, N: int, backend: str = 'simplex') -> FlatPolynomial:
  """Degree-≤r polynomial with p(0) = 0 minimising max_{i ∈ [N]} |p(i) − 1|.

  Solved as a linear program over a shifted Chebyshev basis on [0, N], which keeps
  the constraint matrix bounded by 2; r = N is plain interpolation.
  """
  if not 1 <= r <= N:
    raise DomainError(f'need 1 ≤ r ≤ N, got r={r}, N={N}')
  if r > MAX_DEGREE:
    raise CapacityError(f'degree {r} above {MAX_DEGREE}')
  basis = _basis_matrix(r, N)
  if r == N:
    cheb = np.linalg.solve(basis, np.ones(N))
  else:
    # variables: r basis weights (free), then t ≥ 0
    c = np.zeros(r + 1)
    c[-1] = 1.0
    ones = np.ones((N, 1))
    a_ub = np.vstack([np.hstack([basis, -ones]), np.hstack([-basis, -ones])])
    b_ub = np.concatenate([np.ones(N), -np.ones(N)])
    bounds = [(None, None)] * r + [(0.0, None)]
    result = solve_lp(c, a_ub, b_ub, bounds=bounds, backend=backend)
    if not result.optimal:
      raise CapacityError(f'flat polynomial LP ended {result.status} for r={r}, N={N}')
    cheb = result.x[:r]
  p = FlatPolynomial(r, N, _power_coeffs(cheb, N))
  log_debug('flat polynomial built', r=r, N=N, error=f'{p.achieved_error:.3e}')
  return p


def write_golden(polynomials: list[FlatPolynomial], path: Path | str):
  Path(path).write_text(json.dumps([p.to_dict() for p in polynomials], indent=2))


def read_golden(path: Path | str) -> list[FlatPolynomial]:
  try:
    records = json.loads(Path(path).read_text())
  except json.JSONDecodeError as e:
    raise DataError(f'{path}: {e}') from e
  return [FlatPolynomial.from_dict(record) for record in records]
