"""Dense functions on the hypercube and their Fourier spectra.

Index convention: entry i of `values` is the value at the point whose coordinate j
is -1 exactly when bit j of i is set (see juntalab.utils.bits).
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from juntalab.errors import CapacityError, DataError, DomainError
from juntalab.utils.bits import sign_matrix

MAX_ARITY = 24
PACKED_MAGIC = b'BFN1'
BOUND_TOLERANCE = 1e-9


def check_arity(n: int):
  if not 0 <= n <= MAX_ARITY:
    raise CapacityError(f'arity {n} outside 0..{MAX_ARITY}')


@dataclass(frozen=True, eq=False)
class BooleanFunction:
  n: int
  values: np.ndarray
  bound: float | None = None
  sign_valued: bool = field(init=False)

  def __post_init__(self):
    check_arity(self.n)
    values = np.array(self.values, dtype=float)
    if values.shape != (1 << self.n,):
      raise DomainError(f'expected {1 << self.n} values for arity {self.n}, got {values.shape}')
    values.setflags(write=False)
    peak = float(np.abs(values).max(initial=0.0))
    bound = peak if self.bound is None else float(self.bound)
    if peak > bound + BOUND_TOLERANCE:
      raise DomainError(f'value {peak} exceeds bound {bound}')
    object.__setattr__(self, 'values', values)
    object.__setattr__(self, 'bound', max(bound, 0.0))
    object.__setattr__(self, 'sign_valued', bool(np.all(np.abs(values) == 1.0)))

  def __call__(self, x: int) -> float:
    return float(self.values[x])

  @property
  def size(self) -> int:
    return 1 << self.n

  def mean(self) -> float:
    return float(self.values.mean())

  def variance(self) -> float:
    return float(self.values.var())

  def with_bound(self, bound: float) -> 'BooleanFunction':
    return BooleanFunction(self.n, self.values, bound)

  @classmethod
  def constant(cls, n: int, value: float) -> 'BooleanFunction':
    return cls(n, np.full(1 << n, float(value)), abs(float(value)))

  @classmethod
  def character(cls, n: int, subset: int) -> 'BooleanFunction':
    points = np.arange(1 << n, dtype=np.int64)
    weights = np.bitwise_count(points & subset).astype(np.int64)
    return cls(n, 1.0 - 2.0 * (weights & 1), 1.0)

  @classmethod
  def from_callable(cls, n: int, fn: Callable[[np.ndarray], float], bound: float | None = None):
    """Tabulate *fn*, which receives the ±1 vector of each point."""
    rows = sign_matrix(np.arange(1 << n), n)
    return cls(n, np.array([fn(row) for row in rows], dtype=float), bound)

  @classmethod
  def majority(cls, n: int) -> 'BooleanFunction':
    if n % 2 == 0:
      raise DomainError('majority needs an odd arity')
    rows = sign_matrix(np.arange(1 << n), n)
    return cls(n, np.sign(rows.sum(axis=1)).astype(float), 1.0)

  @classmethod
  def random_sign(cls, n: int, rng: np.random.Generator) -> 'BooleanFunction':
    return cls(n, rng.choice([-1.0, 1.0], size=1 << n), 1.0)

  @classmethod
  def random_bounded(cls, n: int, rng: np.random.Generator) -> 'BooleanFunction':
    return cls(n, rng.uniform(-1.0, 1.0, size=1 << n), 1.0)

  def to_dict(self) -> dict:
    return {'n': self.n, 'sign_valued': self.sign_valued, 'values': self.values.tolist()}

  @classmethod
  def from_dict(cls, data: dict) -> 'BooleanFunction':
    try:
      function = cls(int(data['n']), np.asarray(data['values'], dtype=float))
    except (KeyError, TypeError, ValueError) as e:
      raise DataError(f'malformed truth table: {e}') from e
    if data.get('sign_valued') and not function.sign_valued:
      raise DataError('table flagged sign_valued has values outside {-1, +1}')
    return function

  def write_json(self, path: Path | str):
    Path(path).write_text(json.dumps(self.to_dict()))

  @classmethod
  def read_json(cls, path: Path | str) -> 'BooleanFunction':
    try:
      return cls.from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as e:
      raise DataError(f'{path}: {e}') from e

  def to_packed(self) -> bytes:
    """Header b'BFN1' + little-endian u32 n, then one bit per point (1 means -1)."""
    if not self.sign_valued:
      raise DomainError('packed format holds sign-valued tables only')
    bits = np.packbits(self.values < 0, bitorder='little')
    return PACKED_MAGIC + struct.pack('<I', self.n) + bits.tobytes()

  @classmethod
  def from_packed(cls, payload: bytes) -> 'BooleanFunction':
    if len(payload) < 8 or payload[:4] != PACKED_MAGIC:
      raise DataError('missing BFN1 header')
    (n,) = struct.unpack('<I', payload[4:8])
    check_arity(n)
    body = np.frombuffer(payload[8:], dtype=np.uint8)
    bits = np.unpackbits(body, bitorder='little')
    if bits.size < (1 << n):
      raise DataError(f'packed table truncated: {bits.size} bits for arity {n}')
    return cls(n, 1.0 - 2.0 * bits[: 1 << n], 1.0)

  def write_packed(self, path: Path | str):
    Path(path).write_bytes(self.to_packed())

  @classmethod
  def read_packed(cls, path: Path | str) -> 'BooleanFunction':
    return cls.from_packed(Path(path).read_bytes())


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
  n: int
  coeffs: np.ndarray

  def __post_init__(self):
    check_arity(self.n)
    coeffs = np.array(self.coeffs, dtype=float)
    if coeffs.shape != (1 << self.n,):
      raise DomainError(f'expected {1 << self.n} coefficients, got {coeffs.shape}')
    coeffs.setflags(write=False)
    object.__setattr__(self, 'coeffs', coeffs)

  def __getitem__(self, subset: int) -> float:
    return float(self.coeffs[subset])

  def total_weight(self) -> float:
    return float(np.square(self.coeffs).sum())

  def variance(self) -> float:
    return self.total_weight() - float(self.coeffs[0]) ** 2
