"""
Tests for seeded stream handling.
"""

import numpy as np

from juntalab.utils.rng import child_rng, derive_seed, make_rng, split


class TestStreams:
  def test_make_rng_passes_generators_through(self):
    rng = np.random.default_rng(1)
    assert make_rng(rng) is rng

  def test_same_seed_same_stream(self):
    assert make_rng(7).integers(0, 1000, 5).tolist() == make_rng(7).integers(0, 1000, 5).tolist()

  def test_child_streams_depend_on_key_only(self):
    a = child_rng(11, 3, 0).random(4)
    b = child_rng(11, 3, 0).random(4)
    c = child_rng(11, 3, 1).random(4)
    assert a.tolist() == b.tolist()
    assert a.tolist() != c.tolist()

  def test_split_is_reproducible(self):
    first = [g.random() for g in split(make_rng(5), 3)]
    second = [g.random() for g in split(make_rng(5), 3)]
    assert first == second
    assert len(set(first)) == 3

  def test_derive_seed_is_nonnegative(self):
    assert derive_seed(make_rng(2)) >= 0
