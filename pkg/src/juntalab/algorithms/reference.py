"""Exact answers by enumeration, for checking the estimators on small instances."""

import numpy as np

from juntalab.algorithms.fourier import junta_corr_exact
from juntalab.errors import CapacityError, DomainError
from juntalab.models.boolfn import BooleanFunction
from juntalab.models.conjunction import Conjunction, LabeledDataset
from juntalab.utils.bits import CoordSet, full_mask, k_subsets

MAX_CONJUNCTION_ARITY = 14


def exact_junta_corr_k(f: BooleanFunction, k: int) -> tuple[float, CoordSet]:
  """max over |T| = k of corr(f, J_T); the first maximiser in lexicographic order wins."""
  if not 0 <= k <= f.n:
    raise DomainError(f'k={k} outside [0, {f.n}]')
  best, best_set = -np.inf, 0
  for T in k_subsets(full_mask(f.n), k):
    value = junta_corr_exact(f, T)
    if value > best + 1e-12:
      best, best_set = value, T
  return float(best), best_set


def exact_dist_junta(f: BooleanFunction, k: int) -> float:
  if not f.sign_valued:
    raise DomainError('distance to the nearest junta needs a sign-valued function')
  return (1.0 - exact_junta_corr_k(f, k)[0]) / 2.0


def exact_opt_conjunction(data: LabeledDataset) -> tuple[float, Conjunction]:
  """Smallest empirical error over all conjunctions, TRUE and FALSE included.

  Depth-first over literal sets in coordinate order, each conjunction visited once.
  Positive examples already rejected by a partial conjunction stay rejected by every
  extension, which bounds the branch from below.
  """
  n = data.n
  if n > MAX_CONJUNCTION_ARITY:
    raise CapacityError(f'conjunction enumeration over n={n} above {MAX_CONJUNCTION_ARITY}')
  if not len(data):
    return 0.0, Conjunction.true()

  def bitset(selected: np.ndarray) -> int:
    return sum(1 << int(j) for j in np.flatnonzero(selected))

  everyone = (1 << len(data)) - 1
  positives = bitset(data.labels == 1)
  negatives = everyone & ~positives
  clear = [bitset((data.points >> i & 1) == 0) for i in range(n)]
  best = [(positives & everyone).bit_count() + 1, None]

  def visit(start: int, alive: int, pos: CoordSet, neg: CoordSet):
    mistakes = (alive & negatives).bit_count() + (positives & ~alive).bit_count()
    if mistakes < best[0]:
      best[0], best[1] = mistakes, (pos, neg)
    for i in range(start, n):
      for literal_alive, literal_pos, literal_neg in (
        (alive & clear[i], pos | 1 << i, neg),
        (alive & ~clear[i] & everyone, pos, neg | 1 << i),
      ):
        if (positives & ~literal_alive).bit_count() < best[0]:
          visit(i + 1, literal_alive, literal_pos, literal_neg)

  visit(0, everyone, 0, 0)
  mistakes, literals = best
  if positives.bit_count() < mistakes:
    return positives.bit_count() / len(data), Conjunction.false()
  pos, neg = literals
  conjunction = Conjunction.true() if pos == neg == 0 else Conjunction(pos, neg)
  return mistakes / len(data), conjunction
