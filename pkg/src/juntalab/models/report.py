import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from juntalab.errors import DataError
from juntalab.utils.bits import CoordSet


@dataclass(frozen=True, order=True)
class RefinePair:
  C: CoordSet
  I: CoordSet

  def to_dict(self) -> dict:
    return {'C': self.C, 'I': self.I}

  @classmethod
  def from_dict(cls, data: dict) -> 'RefinePair':
    try:
      return cls(int(data['C']), int(data['I']))
    except (KeyError, TypeError, ValueError) as e:
      raise DataError(f'malformed refine pair: {e}') from e


@dataclass
class TesterReport:
  """Outcome of one tester run.

  gamma is the estimated k-junta correlation and dist = (1 − gamma)/2 the distance
  estimate. `candidates` holds one entry per evaluated (C, I, U); `caps` records
  every desk cap that shaped the run.
  """

  gamma: float = 0.0
  best_set: CoordSet = 0
  query_count: int = 0
  aborted: bool = False
  caps: dict = field(default_factory=dict)
  candidates: list[dict] = field(default_factory=list)
  diagnostics: list[dict] = field(default_factory=list)

  @property
  def dist(self) -> float:
    return (1.0 - self.gamma) / 2.0

  def record(self, U: CoordSet, estimate: float, C: CoordSet = 0, I: CoordSet = 0):
    self.candidates.append({'C': C, 'I': I, 'U': U, 'estimate': float(estimate)})

  def offer(self, U: CoordSet, estimate: float):
    if estimate > self.gamma:
      self.gamma = float(estimate)
      self.best_set = U

  def clamp(self) -> 'TesterReport':
    self.gamma = min(1.0, max(0.0, self.gamma))
    return self

  def merge(self, other: 'TesterReport') -> 'TesterReport':
    winner = self if self.gamma >= other.gamma else other
    return TesterReport(
      gamma=winner.gamma,
      best_set=winner.best_set,
      query_count=self.query_count + other.query_count,
      aborted=self.aborted or other.aborted,
      caps={**self.caps, **other.caps},
      candidates=self.candidates + other.candidates,
      diagnostics=self.diagnostics + other.diagnostics,
    )

  def to_dict(self) -> dict:
    return {**asdict(self), 'dist': self.dist}

  @classmethod
  def from_dict(cls, data: dict) -> 'TesterReport':
    try:
      return cls(
        gamma=float(data['gamma']),
        best_set=int(data['best_set']),
        query_count=int(data.get('query_count', 0)),
        aborted=bool(data.get('aborted', False)),
        caps=dict(data.get('caps', {})),
        candidates=list(data.get('candidates', [])),
        diagnostics=list(data.get('diagnostics', [])),
      )
    except (KeyError, TypeError, ValueError) as e:
      raise DataError(f'malformed tester report: {e}') from e

  def write_json(self, path: Path | str):
    Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
