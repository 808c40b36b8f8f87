"""Tensor algebra tests against brute-force word-level oracles."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from pathlab import tensor
from pathlab.errors import DepthExceeded, DimensionMismatch
from pathlab.tensor import TensorSeries, Word


def all_words(depth, dim):
    for k in range(depth + 1):
        yield from (Word(w) for w in itertools.product(range(dim), repeat=k))


def random_series(rng, depth, dim):
    levels = tuple(rng.standard_normal(dim**k) for k in range(depth + 1))
    return TensorSeries(depth, dim, levels)


def concat_oracle(a, b):
    """Word-by-word convolution: coeff(w) = sum over splits of a(u)*b(v)."""
    out = tensor.zero(a.depth, a.dim)
    levels = [lvl.copy() for lvl in out.levels]
    for w in all_words(a.depth, a.dim):
        total = 0.0
        for cut in range(len(w) + 1):
            u, v = w.letters[:cut], w.letters[cut:]
            total += a.coeff(u) * b.coeff(v)
        levels[len(w)][tensor.word_index(w.letters, a.dim)] = total
    return TensorSeries(a.depth, a.dim, tuple(levels))


def shuffle_oracle(w1, w2):
    """Enumerate interleavings by choosing the positions of w1's letters."""
    n1, n2 = len(w1), len(w2)
    counts = {}
    for pos in itertools.combinations(range(n1 + n2), n1):
        word = [None] * (n1 + n2)
        it1, it2 = iter(w1), iter(w2)
        for i in range(n1 + n2):
            word[i] = next(it1) if i in pos else next(it2)
        key = tuple(word)
        counts[key] = counts.get(key, 0) + 1
    return counts


def test_word_index_roundtrip():
    for dim in (2, 3, 4):
        for length in range(0, 4):
            for idx in range(dim**length):
                w = tensor.index_word(idx, length, dim)
                assert tensor.word_index(w.letters, dim) == idx
                assert len(w) == length


def test_word_parse_and_str():
    w = Word((0, 2, 1))
    assert str(w) == "0,2,1"
    assert Word.parse("0,2,1") == w
    assert Word.parse("") == Word(())


def test_flat_dim_closed_form():
    # ((d+1)^(N+1) - 1) / d with dim = d + 1
    assert tensor.flat_dim(3, 2) == 15
    assert tensor.flat_dim(3, 3) == 40
    assert tensor.flat_dim(5, 4) == (4**6 - 1) // 3
    offs = tensor.level_offsets(3, 2)
    assert offs == [0, 1, 3, 7, 15]


def test_unit_and_zero():
    u = tensor.unit(3, 2)
    assert u.coeff(()) == 1.0
    assert u.coeff("1") == 0.0
    z = tensor.zero(2, 3)
    assert all(np.all(lvl == 0) for lvl in z.levels)


def test_coeff_raises_beyond_depth():
    u = tensor.unit(2, 2)
    with pytest.raises(DepthExceeded):
        u.coeff("1,1,1")


def test_concat_product_matches_word_oracle():
    rng = np.random.default_rng(11)
    for dim in (2, 3):
        for _ in range(5):
            a = random_series(rng, 3, dim)
            b = random_series(rng, 3, dim)
            got = tensor.concat_product(a, b)
            want = concat_oracle(a, b)
            for gl, wl in zip(got.levels, want.levels):
                np.testing.assert_allclose(gl, wl, rtol=0, atol=1e-12)


def test_concat_unit_is_identity():
    rng = np.random.default_rng(3)
    a = random_series(rng, 4, 2)
    u = tensor.unit(4, 2)
    left = tensor.concat_product(u, a)
    right = tensor.concat_product(a, u)
    for la, lb, lc in zip(left.levels, right.levels, a.levels):
        np.testing.assert_allclose(la, lc, atol=1e-15)
        np.testing.assert_allclose(lb, lc, atol=1e-15)


def test_concat_associative():
    rng = np.random.default_rng(7)
    a, b, c = (random_series(rng, 3, 2) for _ in range(3))
    ab_c = tensor.concat_product(tensor.concat_product(a, b), c)
    a_bc = tensor.concat_product(a, tensor.concat_product(b, c))
    for l1, l2 in zip(ab_c.levels, a_bc.levels):
        np.testing.assert_allclose(l1, l2, atol=1e-10)


def test_exp_level1_coefficients():
    v = np.array([0.7, -1.3, 0.4])
    e = tensor.exp_level1(v, 4)
    rng = np.random.default_rng(0)
    for k in range(5):
        for _ in range(4):
            w = tuple(rng.integers(0, 3, size=k))
            want = np.prod([v[l] for l in w]) / math.factorial(k)
            assert e.coeff(w) == pytest.approx(want, abs=1e-14)


def test_exp_zero_vector_is_unit():
    e = tensor.exp_level1(np.zeros(2), 3)
    u = tensor.unit(3, 2)
    for le, lu in zip(e.levels, u.levels):
        np.testing.assert_array_equal(le, lu)


def test_shuffle_product_matches_interleaving_oracle():
    rng = np.random.default_rng(23)
    for _ in range(20):
        n1 = int(rng.integers(0, 4))
        n2 = int(rng.integers(0, 4))
        w1 = tuple(int(x) for x in rng.integers(0, 3, size=n1))
        w2 = tuple(int(x) for x in rng.integers(0, 3, size=n2))
        got = tensor.shuffle_product(Word(w1), Word(w2))
        want = shuffle_oracle(w1, w2)
        assert {w.letters: c for w, c in got.items()} == want


def test_shuffle_multiplicities_sum_to_binomial():
    w1 = Word((0, 1, 1))
    w2 = Word((2, 0))
    got = tensor.shuffle_product(w1, w2)
    assert sum(got.values()) == math.comb(5, 2)


def test_shuffle_identity_on_group_like():
    # on exponentials of level-1 vectors, pointwise products of word
    # coefficients factor through the shuffle product
    rng = np.random.default_rng(5)
    depth, dim = 4, 3
    for _ in range(50):
        v = rng.standard_normal(dim)
        g = tensor.exp_level1(v, depth)
        for _ in range(4):
            n1 = int(rng.integers(0, 3))
            n2 = int(rng.integers(0, depth + 1 - n1))
            w1 = tuple(int(x) for x in rng.integers(0, dim, size=n1))
            w2 = tuple(int(x) for x in rng.integers(0, dim, size=n2))
            lhs = g.coeff(w1) * g.coeff(w2)
            rhs = sum(
                mult * g.coeff(w.letters)
                for w, mult in tensor.shuffle_product(Word(w1), Word(w2)).items()
            )
            assert lhs == pytest.approx(rhs, abs=1e-10)


def test_inner_product_is_flat_dot():
    rng = np.random.default_rng(9)
    a = random_series(rng, 3, 2)
    b = random_series(rng, 3, 2)
    want = float(tensor.flatten(a) @ tensor.flatten(b))
    assert tensor.inner_product(a, b) == pytest.approx(want, rel=1e-14)


def test_flatten_unflatten_roundtrip():
    rng = np.random.default_rng(2)
    a = random_series(rng, 3, 3)
    back = tensor.unflatten(tensor.flatten(a), 3, 3)
    for l1, l2 in zip(a.levels, back.levels):
        np.testing.assert_array_equal(l1, l2)


def test_flatten_order_is_level_major_lex():
    a = tensor.zero(2, 2)
    levels = [lvl.copy() for lvl in a.levels]
    levels[1][tensor.word_index((1,), 2)] = 5.0
    levels[2][tensor.word_index((0, 1), 2)] = 7.0
    s = TensorSeries(2, 2, tuple(levels))
    flat = tensor.flatten(s)
    assert flat[0] == 0.0
    assert flat[1 + 1] == 5.0
    # level-2 block starts at offset 3; word (0,1) sits at index 1 within it
    assert flat[3 + 1] == 7.0


def test_basis_letter():
    e = tensor.basis_letter(1, 3, 3)
    assert e.coeff("1") == 1.0
    assert np.sum(np.abs(tensor.flatten(e))) == 1.0


def test_series_json_roundtrip():
    rng = np.random.default_rng(4)
    a = random_series(rng, 2, 3)
    back = tensor.series_from_json(tensor.series_to_json(a))
    assert back.depth == a.depth and back.dim == a.dim
    for l1, l2 in zip(a.levels, back.levels):
        np.testing.assert_array_equal(l1, l2)


def test_series_dict_drops_zeros():
    u = tensor.unit(2, 2)
    d = tensor.series_to_dict(u)
    assert d["coeffs"] == {"": 1.0}


def test_add_scale_operators():
    rng = np.random.default_rng(6)
    a = random_series(rng, 2, 2)
    b = random_series(rng, 2, 2)
    s = a + b
    for ls, la, lb in zip(s.levels, a.levels, b.levels):
        np.testing.assert_allclose(ls, la + lb, atol=1e-15)
    m = a * 2.5
    for lm, la in zip(m.levels, a.levels):
        np.testing.assert_allclose(lm, 2.5 * la, atol=1e-15)
    d = a - b
    for ld, la, lb in zip(d.levels, a.levels, b.levels):
        np.testing.assert_allclose(ld, la - lb, atol=1e-15)


def test_incompatible_shapes_raise():
    rng = np.random.default_rng(1)
    a = random_series(rng, 2, 2)
    b = random_series(rng, 2, 3)
    with pytest.raises(DimensionMismatch):
        tensor.concat_product(a, b)


def test_levels_are_write_protected():
    u = tensor.unit(2, 2)
    with pytest.raises(ValueError):
        u.levels[0][0] = 2.0


# ---------------------------------------------------------------------------
# batched layer


def test_batch_concat_matches_rowwise():
    rng = np.random.default_rng(31)
    n, depth, dim = 5, 3, 2
    sa = [random_series(rng, depth, dim) for _ in range(n)]
    sb = [random_series(rng, depth, dim) for _ in range(n)]
    batched = tensor.batch_concat(
        tensor.batch_from_series(sa), tensor.batch_from_series(sb)
    )
    for i in range(n):
        want = tensor.concat_product(sa[i], sb[i])
        got = tensor.batch_row(batched, i, dim)
        for l1, l2 in zip(got.levels, want.levels):
            np.testing.assert_allclose(l1, l2, atol=1e-12)


def test_batch_exp_matches_scalar_exp():
    rng = np.random.default_rng(32)
    incs = rng.standard_normal((6, 3))
    batched = tensor.batch_exp_level1(incs, 3)
    for i in range(6):
        want = tensor.exp_level1(incs[i], 3)
        got = tensor.batch_row(batched, i, 3)
        for l1, l2 in zip(got.levels, want.levels):
            np.testing.assert_allclose(l1, l2, atol=1e-13)


def test_batch_extend_and_flatten():
    rng = np.random.default_rng(33)
    n, depth, dim = 4, 3, 2
    levels = tensor.batch_unit(n, depth, dim)
    incs = rng.standard_normal((n, dim))
    levels = tensor.batch_extend(levels, incs)
    flats = tensor.batch_flatten(levels)
    assert flats.shape == (n, tensor.flat_dim(depth, dim))
    for i in range(n):
        want = tensor.flatten(tensor.exp_level1(incs[i], depth))
        np.testing.assert_allclose(flats[i], want, atol=1e-13)


def test_batch_concat_fixed():
    rng = np.random.default_rng(34)
    n, depth, dim = 3, 3, 2
    sa = [random_series(rng, depth, dim) for _ in range(n)]
    b = random_series(rng, depth, dim)
    got = tensor.batch_concat_fixed(tensor.batch_from_series(sa), b)
    for i in range(n):
        want = tensor.concat_product(sa[i], b)
        row = tensor.batch_row(got, i, dim)
        for l1, l2 in zip(row.levels, want.levels):
            np.testing.assert_allclose(l1, l2, atol=1e-12)


def test_batch_mean():
    rng = np.random.default_rng(35)
    sa = [random_series(rng, 2, 2) for _ in range(5)]
    mean = tensor.batch_mean(tensor.batch_from_series(sa), 2)
    for k, lvl in enumerate(mean.levels):
        want = np.mean([s.levels[k] for s in sa], axis=0)
        np.testing.assert_allclose(lvl, want, atol=1e-14)
