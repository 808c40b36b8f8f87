"""Named-stream determinism checks."""

from __future__ import annotations

import numpy as np

from pathlab.rng import stream


def test_same_key_same_draws():
    a = stream(7, "unit", 3).standard_normal(16)
    b = stream(7, "unit", 3).standard_normal(16)
    np.testing.assert_array_equal(a, b)


def test_keys_separate_streams():
    base = stream(7, "unit", 3).standard_normal(8)
    assert not np.array_equal(base, stream(8, "unit", 3).standard_normal(8))
    assert not np.array_equal(base, stream(7, "other", 3).standard_normal(8))
    assert not np.array_equal(base, stream(7, "unit", 4).standard_normal(8))


def test_streams_do_not_share_state():
    # drawing from one stream must not advance another, whatever the
    # interleaving
    ref1 = stream(1, "a", 0).standard_normal(4)
    ref2 = stream(1, "a", 1).standard_normal(4)
    s1 = stream(1, "a", 0)
    s2 = stream(1, "a", 1)
    got1, got2 = [], []
    for _ in range(4):
        got1.append(s1.standard_normal())
        got2.append(s2.standard_normal())
    np.testing.assert_array_equal(ref1, got1)
    np.testing.assert_array_equal(ref2, got2)
