import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import gf2_rank_ints, span_ints
from stabent.f2core import (
    BinMatrix,
    BitVec,
    RowReducer,
    in_rowspan,
    kernel_basis,
    pack_bits,
    rank,
    rank_bits,
    rref,
    rref_with_transform,
    solve,
    unpack_bits,
)


def to_ints(bits):
    return [int("".join("1" if b else "0" for b in row[::-1]) or "0", 2) for row in bits]


def matrices(max_rows=9, max_cols=140):
    return st.tuples(st.integers(0, max_rows), st.integers(1, max_cols)).flatmap(
        lambda rc: arrays(bool, rc)
    )


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(int) @ b.astype(int)) % 2 == 1


@given(arrays(bool, st.tuples(st.integers(0, 5), st.integers(0, 200))))
def test_pack_roundtrip(bits):
    assert np.array_equal(unpack_bits(pack_bits(bits), bits.shape[-1]), bits)


def test_bitvec_basics():
    v = BitVec.from_indices([0, 64, 99], 100)
    assert v.indices() == [0, 64, 99]
    assert v.weight() == 3 and v[64] == 1 and v[1] == 0
    w = BitVec.from_indices([64], 100)
    assert (v ^ w).indices() == [0, 99]
    assert v.dot(w) == 1
    assert not BitVec.zeros(7).any()
    assert hash(v) == hash(BitVec.from_bits(v.to_bits()))


@given(matrices())
def test_rank_matches_xor_basis(bits):
    assert rank(BinMatrix.from_bits(bits, bits.shape[1])) == gf2_rank_ints(to_ints(bits))
    assert rank_bits(bits) == gf2_rank_ints(to_ints(bits))


@given(matrices(max_cols=70))
def test_rank_transpose_invariant(bits):
    m = BinMatrix.from_bits(bits, bits.shape[1])
    assert rank(m) == rank(m.transpose())


@given(matrices())
def test_rref_shape_and_transform(bits):
    m = BinMatrix.from_bits(bits, bits.shape[1])
    r, rk, piv = rref(m)
    rb = r.to_bits()
    assert not rb[rk:].any()
    for i, p in enumerate(piv):
        col = rb[:, p]
        assert col[i] and col.sum() == 1
        assert not rb[i, :p].any()
    r2, t, _ = rref_with_transform(m)
    if bits.shape[0]:
        assert np.array_equal(mul(t.to_bits(), bits), r2.to_bits())


@given(matrices(max_cols=12))
def test_kernel_rank_nullity(bits):
    m = BinMatrix.from_bits(bits, bits.shape[1])
    k = kernel_basis(m)
    assert k.n_rows + rank(m) == bits.shape[1]
    if k.n_rows:
        assert not mul(bits, k.to_bits().T).any()
        assert rank(k) == k.n_rows


@given(matrices(max_rows=6, max_cols=10), st.integers(0, 2**10 - 1))
def test_in_rowspan_against_enumeration(bits, code):
    n = bits.shape[1]
    v = np.array([(code >> i) & 1 for i in range(n)], bool)
    m = BinMatrix.from_bits(bits, n)
    ok, combo = in_rowspan(BitVec.from_bits(v), m)
    assert ok == (to_ints([v])[0] in span_ints(to_ints(bits)))
    if ok:
        sel = combo.to_bits()
        assert np.array_equal(np.bitwise_xor.reduce(bits[sel], axis=0) if sel.any() else np.zeros(n, bool), v)


@given(matrices(max_rows=6, max_cols=80), arrays(bool, st.tuples(st.integers(1, 6), st.just(80))))
def test_row_reducer_canonical(bits, probes):
    bits = bits[:, :80] if bits.shape[1] >= 80 else np.pad(bits, ((0, 0), (0, 80 - bits.shape[1])))
    red = RowReducer(BinMatrix.from_bits(bits, 80))
    res = red.reduce(pack_bits(probes))
    # shifting a probe by a span element leaves its residue unchanged
    if bits.shape[0]:
        shifted = probes ^ bits[0]
        assert np.array_equal(red.reduce(pack_bits(shifted)), res)
    for row, r in zip(probes, res):
        member = to_ints([row])[0] in span_ints(to_ints(bits)) if bits.shape[0] <= 6 else None
        assert member == (not r.any())


@given(matrices(max_rows=8, max_cols=8), st.integers(0, 255))
def test_solve(bits, code):
    rows, cols = bits.shape
    rhs = np.array([(code >> i) & 1 for i in range(rows)], bool)
    x = solve(BinMatrix.from_bits(bits, cols), BitVec.from_bits(rhs))
    solvable = any(
        np.array_equal(mul(bits, np.array([(c >> i) & 1 for i in range(cols)], bool)[:, None])[:, 0], rhs)
        for c in range(2**cols)
    ) if rows else True
    assert (x is not None) == solvable
    if x is not None and rows:
        assert np.array_equal(mul(bits, x.to_bits()[:, None])[:, 0], rhs)


def test_matvec_and_combine():
    bits = np.array([[1, 0, 1], [0, 1, 1]], bool)
    m = BinMatrix.from_bits(bits)
    assert m.matvec(BitVec.from_bits([1, 1, 0])).indices() == [0, 1]
    assert m.combine(BitVec.from_bits([1, 1])).indices() == [0, 1]
    assert m.vstack(m).n_rows == 4


def test_length_mismatch():
    with pytest.raises(ValueError):
        in_rowspan(BitVec.zeros(3), BinMatrix.zeros(2, 4))
    with pytest.raises(ValueError):
        solve(BinMatrix.zeros(2, 4), BitVec.zeros(3))
