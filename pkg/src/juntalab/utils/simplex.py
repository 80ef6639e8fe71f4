"""Small dense linear programs.

A self-contained two-phase simplex over a dense tableau, with upper bounds handled
implicitly (bounded-variable ratio test) and Bland's rule for both the entering and
the leaving choice. Problem sizes here are desk scale: at most a few hundred rows.

`solve_lp` accepts the usual inequality/equality/bounds form and can hand the
problem to scipy's HiGHS instead; `l1_fit` solves least-absolute-deviation
regression through its dual, which keeps the row count equal to the feature count.
"""

from dataclasses import dataclass, field

import numpy as np

from juntalab.errors import CapacityError, DomainError
from juntalab.services.job_log_handling import log_debug

BACKENDS = ('simplex', 'highs')


@dataclass
class LPResult:
  status: str
  x: np.ndarray
  fun: float
  duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
  iterations: int = 0

  @property
  def optimal(self) -> bool:
    return self.status == 'optimal'


class BoundedSimplex:
  """Minimise c·x subject to A x = b and 0 ≤ x ≤ upper (upper may be inf).

  `duals` in the result are the equality-row multipliers y with c − yA ≥ 0 on
  variables at their lower bound at the optimum.
  """

  def __init__(self, a, b, c, upper=None, tol: float = 1e-9, max_iterations: int = 50000):
    self.a = np.atleast_2d(np.asarray(a, dtype=float))
    self.b = np.asarray(b, dtype=float).reshape(-1)
    self.c = np.asarray(c, dtype=float).reshape(-1)
    rows, cols = self.a.shape
    if self.b.size != rows or self.c.size != cols:
      raise DomainError(f'inconsistent LP shapes: A {self.a.shape}, b {self.b.size}, c {self.c.size}')
    self.upper = (
      np.full(cols, np.inf) if upper is None else np.asarray(upper, dtype=float).reshape(-1)
    )
    if np.any(self.upper < 0):
      raise DomainError('upper bounds must be nonnegative')
    self.tol = tol
    self.max_iterations = max_iterations

  def solve(self) -> LPResult:
    rows, cols = self.a.shape
    sign = np.where(self.b < 0, -1.0, 1.0)
    a = self.a * sign[:, None]
    b = self.b * sign
    self._tableau = np.hstack([a, np.eye(rows)])
    self._upper = np.concatenate([self.upper, np.full(rows, np.inf)])
    self._basis = np.arange(cols, cols + rows)
    self._at_upper = np.zeros(cols + rows, dtype=bool)
    self._a = a
    self._b = b
    self._x_basic = b.copy()
    self._iterations = 0

    phase_one = np.concatenate([np.zeros(cols), np.ones(rows)])
    self._run(phase_one)
    self._refresh()
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if float(phase_one[self._basis] @ self._x_basic) > 1e-7 * scale:
      return LPResult('infeasible', np.zeros(cols), np.nan, iterations=self._iterations)

    # artificials may stay basic on redundant rows; pin them at zero
    self._upper[cols:] = 0.0
    self._x_basic[self._basis >= cols] = 0.0
    phase_two = np.concatenate([self.c, np.zeros(rows)])
    if not self._run(phase_two):
      return LPResult('unbounded', np.zeros(cols), -np.inf, iterations=self._iterations)
    self._refresh()

    x = np.where(self._at_upper, self._upper, 0.0)
    x[self._basis] = self._x_basic
    x = x[:cols]
    duals = (phase_two[self._basis] @ self._tableau[:, cols:]) * sign
    log_debug('simplex solved', rows=rows, cols=cols, iterations=self._iterations)
    return LPResult('optimal', x, float(self.c @ x), duals, self._iterations)

  def _refresh(self):
    """Recompute basic values from B^-1 to shed accumulated drift."""
    cols = self._a.shape[1]
    binv = self._tableau[:, cols:]
    structural_upper = self._at_upper[:cols]
    rhs = self._b - self._a[:, structural_upper] @ self._upper[:cols][structural_upper]
    self._x_basic = binv @ rhs

  def _run(self, cost: np.ndarray) -> bool:
    tol = self.tol
    tableau = self._tableau
    total = tableau.shape[1]
    while True:
      if self._iterations >= self.max_iterations:
        raise CapacityError(f'simplex iteration cap {self.max_iterations} reached')
      reduced = cost - cost[self._basis] @ tableau
      nonbasic = np.ones(total, dtype=bool)
      nonbasic[self._basis] = False
      can_increase = nonbasic & ~self._at_upper & (reduced < -tol) & (self._upper > 0)
      can_decrease = nonbasic & self._at_upper & (reduced > tol) & (self._upper > 0)
      eligible = np.flatnonzero(can_increase | can_decrease)
      if eligible.size == 0:
        return True
      entering = int(eligible[0])
      direction = 1.0 if can_increase[entering] else -1.0
      rate = -direction * tableau[:, entering]

      basic_upper = self._upper[self._basis]
      ratios = np.full(rate.size, np.inf)
      falling = rate < -tol
      rising = (rate > tol) & np.isfinite(basic_upper)
      ratios[falling] = self._x_basic[falling] / -rate[falling]
      ratios[rising] = (basic_upper[rising] - self._x_basic[rising]) / rate[rising]
      ratios = np.maximum(ratios, 0.0)
      step = float(ratios.min(initial=np.inf))
      flip = float(self._upper[entering])
      if not np.isfinite(step) and not np.isfinite(flip):
        return False

      self._iterations += 1
      if flip <= step:
        self._x_basic += rate * flip
        self._at_upper[entering] = not self._at_upper[entering]
        continue

      tied = np.flatnonzero(ratios <= step + tol)
      row = int(tied[np.argmin(self._basis[tied])])
      leaving = int(self._basis[row])
      self._x_basic += rate * step
      self._at_upper[leaving] = bool(rate[row] > 0)
      self._at_upper[entering] = False
      self._x_basic[row] = step if direction > 0 else self._upper[entering] - step

      pivot_row = tableau[row] / tableau[row, entering]
      tableau -= np.outer(tableau[:, entering], pivot_row)
      tableau[row] = pivot_row
      self._basis[row] = entering


def _standard_form(c, a_ub, b_ub, a_eq, b_eq, bounds):
  """Rewrite a general LP as min c'·z, A'z = b', 0 ≤ z ≤ u, with a map back to x."""
  c = np.asarray(c, dtype=float)
  n = c.size
  if bounds is None:
    bounds = [(0.0, None)] * n
  elif isinstance(bounds, tuple):
    bounds = [bounds] * n
  lows = np.array([-np.inf if lo is None else lo for lo, _ in bounds], dtype=float)
  highs = np.array([np.inf if hi is None else hi for _, hi in bounds], dtype=float)

  # x = shift + transform @ z
  columns = []
  uppers = []
  shift = np.zeros(n)
  for i in range(n):
    lo, hi = lows[i], highs[i]
    if np.isfinite(lo):
      shift[i] = lo
      columns.append((i, 1.0))
      uppers.append(hi - lo)
    elif np.isfinite(hi):
      shift[i] = hi
      columns.append((i, -1.0))
      uppers.append(np.inf)
    else:
      columns.append((i, 1.0))
      uppers.append(np.inf)
      columns.append((i, -1.0))
      uppers.append(np.inf)
  transform = np.zeros((n, len(columns)))
  for j, (i, coefficient) in enumerate(columns):
    transform[i, j] = coefficient

  blocks = []
  rhs = []
  slack_count = 0
  if a_ub is not None and len(a_ub):
    a_ub = np.atleast_2d(np.asarray(a_ub, dtype=float))
    blocks.append(('ub', a_ub @ transform))
    rhs.append(np.asarray(b_ub, dtype=float) - a_ub @ shift)
    slack_count = a_ub.shape[0]
  if a_eq is not None and len(a_eq):
    a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
    blocks.append(('eq', a_eq @ transform))
    rhs.append(np.asarray(b_eq, dtype=float) - a_eq @ shift)

  width = transform.shape[1] + slack_count
  rows = []
  for kind, block in blocks:
    padded = np.zeros((block.shape[0], width))
    padded[:, : transform.shape[1]] = block
    if kind == 'ub':
      padded[:, transform.shape[1] :] = np.eye(slack_count)
    rows.append(padded)
  a_std = np.vstack(rows) if rows else np.zeros((0, width))
  b_std = np.concatenate(rhs) if rhs else np.zeros(0)
  c_std = np.concatenate([c @ transform, np.zeros(slack_count)])
  upper = np.concatenate([np.array(uppers), np.full(slack_count, np.inf)])
  return a_std, b_std, c_std, upper, transform, shift


def solve_lp(
  c,
  a_ub=None,
  b_ub=None,
  a_eq=None,
  b_eq=None,
  bounds=None,
  backend: str = 'simplex',
  max_iterations: int = 50000,
) -> LPResult:
  """Minimise c·x under A_ub x ≤ b_ub, A_eq x = b_eq and per-variable bounds.

  Args:
    bounds: list of (low, high) pairs, None meaning unbounded; default x ≥ 0.
    backend: 'simplex' for the built-in solver, 'highs' for scipy.optimize.linprog.

  Returns:
    LPResult with status 'optimal', 'infeasible' or 'unbounded'.
  """
  if backend == 'highs':
    from scipy.optimize import linprog

    result = linprog(
      c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds or (0, None), method='highs'
    )
    status = {0: 'optimal', 2: 'infeasible', 3: 'unbounded'}.get(result.status, 'failed')
    if status == 'failed':
      raise CapacityError(f'highs stopped early: {result.message}')
    x = result.x if result.x is not None else np.zeros(len(c))
    fun = float(result.fun) if result.fun is not None else np.nan
    return LPResult(status, np.asarray(x), fun, iterations=int(result.nit))
  if backend != 'simplex':
    raise DomainError(f'unknown LP backend {backend!r}; expected one of {BACKENDS}')

  a_std, b_std, c_std, upper, transform, shift = _standard_form(c, a_ub, b_ub, a_eq, b_eq, bounds)
  result = BoundedSimplex(a_std, b_std, c_std, upper, max_iterations=max_iterations).solve()
  if not result.optimal:
    return result
  z = result.x[: transform.shape[1]]
  x = shift + transform @ z
  return LPResult('optimal', x, float(np.asarray(c, dtype=float) @ x), result.duals, result.iterations)


def l1_fit(features: np.ndarray, targets: np.ndarray, backend: str = 'simplex') -> tuple[np.ndarray, float]:
  """Coefficients minimising Σ_j |features[j]·w − targets[j]|.

  The built-in path solves the dual  max y·u  s.t.  featuresᵀu = 0, −1 ≤ u ≤ 1
  (shifted to 0 ≤ u + 1 ≤ 2) and reads w off the equality multipliers.

  Returns:
    (w, total absolute deviation)
  """
  features = np.atleast_2d(np.asarray(features, dtype=float))
  targets = np.asarray(targets, dtype=float).reshape(-1)
  samples, width = features.shape
  if samples != targets.size:
    raise DomainError(f'{samples} feature rows but {targets.size} targets')

  if backend == 'highs':
    # primal: variables (w, e); e_j ≥ ±(features w − y)_j
    c = np.concatenate([np.zeros(width), np.ones(samples)])
    eye = np.eye(samples)
    a_ub = np.vstack([np.hstack([features, -eye]), np.hstack([-features, -eye])])
    b_ub = np.concatenate([targets, -targets])
    bounds = [(None, None)] * width + [(0, None)] * samples
    result = solve_lp(c, a_ub, b_ub, bounds=bounds, backend='highs')
    weights = result.x[:width]
  else:
    a = features.T
    b = a @ np.ones(samples)
    result = BoundedSimplex(a, b, -targets, np.full(samples, 2.0)).solve()
    if not result.optimal:
      raise CapacityError(f'L1 regression dual ended {result.status}')
    weights = -result.duals
  loss = float(np.abs(features @ weights - targets).sum())
  return weights, loss
