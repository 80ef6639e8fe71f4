"""Structured run records, kept apart from the text log.

JSONL for per-step records (refine passes, tester candidates, experiment runs),
CSV for the lambda tables and experiment summaries.
"""

import csv
import json
import os
from pathlib import Path
from typing import Iterable

from juntalab.services.job_log_handling import log_debug


class RunLog:
  """Collects records in memory and, when given a path, appends them as JSON lines."""

  def __init__(self, path: Path | str | None = None):
    self.path = Path(path) if path is not None else None
    self.records: list[dict] = []
    if self.path is not None:
      self.path.parent.mkdir(parents=True, exist_ok=True)
      self.path.write_text('')

  def write(self, record: dict):
    self.records.append(record)
    if self.path is not None:
      with self.path.open('a') as handle:
        handle.write(json.dumps(record, sort_keys=True) + '\n')

  def __len__(self):
    return len(self.records)


def read_jsonl(path: Path | str) -> list[dict]:
  with Path(path).open() as handle:
    return [json.loads(line) for line in handle if line.strip()]


def write_lambda_table(path: Path | str, table: dict[int, float]):
  """One row per candidate set: its bitmask and the estimated normalized influence."""
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  with path.open('w', newline='') as handle:
    writer = csv.writer(handle)
    writer.writerow(['U', 'lambda'])
    for subset, value in sorted(table.items()):
      writer.writerow([subset, repr(float(value))])
  log_debug('lambda table written', path=str(path), rows=len(table))


def write_csv(path: Path | str, rows: Iterable[dict], columns: list[str]):
  """Write *rows* to *path* through a temporary file, so readers never see a partial file."""
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  scratch = path.with_suffix(path.suffix + '.tmp')
  with scratch.open('w', newline='') as handle:
    writer = csv.DictWriter(handle, fieldnames=columns, extrasaction='ignore')
    writer.writeheader()
    for row in rows:
      writer.writerow(row)
  os.replace(scratch, path)
