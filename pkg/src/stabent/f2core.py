"""Bit-packed linear algebra over GF(2).

Rows are stored as little-endian ``uint64`` words: bit ``c`` of a row lives in
word ``c // 64`` at position ``c % 64``.  Row operations are word-parallel XORs.
"""

from __future__ import annotations

import numpy as np

WORD = 64


def _n_words(n_bits: int) -> int:
    return max(1, (n_bits + WORD - 1) // WORD)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean array of shape ``(..., n)`` into ``uint64`` words.

    Args:
        bits: array of 0/1 values, last axis is the bit index.

    Returns:
        Array of shape ``(..., ceil(n / 64))`` and dtype ``uint64``.
    """
    bits = np.asarray(bits, dtype=bool)
    n = bits.shape[-1]
    nw = _n_words(n)
    pad = nw * WORD - n
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), dtype=bool)], axis=-1)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`."""
    words = np.ascontiguousarray(np.asarray(words, dtype=np.uint64))
    as_bytes = words.view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, count=n, bitorder="little").astype(bool)


class BitVec:
    """Fixed-length binary vector."""

    __slots__ = ("words", "length")

    def __init__(self, words: np.ndarray, length: int):
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (_n_words(length),):
            raise ValueError("word count does not match length")
        self.words = words
        self.length = int(length)

    @classmethod
    def from_bits(cls, bits) -> "BitVec":
        bits = np.asarray(bits, dtype=bool).ravel()
        return cls(pack_bits(bits), bits.size)

    @classmethod
    def zeros(cls, length: int) -> "BitVec":
        return cls(np.zeros(_n_words(length), dtype=np.uint64), length)

    @classmethod
    def from_indices(cls, indices, length: int) -> "BitVec":
        bits = np.zeros(length, dtype=bool)
        bits[list(indices)] = True
        return cls.from_bits(bits)

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.length)

    def indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.to_bits())]

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return int((self.words[i // WORD] >> np.uint64(i % WORD)) & np.uint64(1))

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVec(self.words ^ other.words, self.length)

    def dot(self, other: "BitVec") -> int:
        if self.length != other.length:
            raise ValueError("length mismatch")
        return popcount(self.words & other.words) & 1

    def weight(self) -> int:
        return popcount(self.words)

    def any(self) -> bool:
        return bool(self.words.any())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVec)
            and self.length == other.length
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.length, self.words.tobytes()))

    def __repr__(self) -> str:
        return "BitVec(" + "".join("1" if b else "0" for b in self.to_bits()) + ")"


def popcount(words: np.ndarray) -> int:
    return int(np.unpackbits(np.ascontiguousarray(words, dtype=np.uint64).view(np.uint8)).sum())


class BinMatrix:
    """Binary matrix with bit-packed rows.

    ``data`` holds one row per entry of the first axis.  Instances are treated
    as values; functions in this module never modify their inputs.
    """

    __slots__ = ("data", "n_cols")

    def __init__(self, data: np.ndarray, n_cols: int):
        data = np.asarray(data, dtype=np.uint64)
        if data.ndim != 2 or data.shape[1] != _n_words(n_cols):
            raise ValueError("data must have shape (rows, ceil(n_cols/64))")
        self.data = data
        self.n_cols = int(n_cols)

    @classmethod
    def from_bits(cls, bits, n_cols: int | None = None) -> "BinMatrix":
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim == 1 and n_cols is not None and bits.size == 0:
            bits = bits.reshape(0, n_cols)
        if bits.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(pack_bits(bits), bits.shape[1])

    @classmethod
    def from_rows(cls, rows: list[BitVec], n_cols: int | None = None) -> "BinMatrix":
        if not rows:
            if n_cols is None:
                raise ValueError("n_cols needed for an empty matrix")
            return cls.zeros(0, n_cols)
        n_cols = rows[0].length if n_cols is None else n_cols
        if any(r.length != n_cols for r in rows):
            raise ValueError("rows must share one length")
        return cls(np.stack([r.words for r in rows]), n_cols)

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "BinMatrix":
        return cls(np.zeros((n_rows, _n_words(n_cols)), dtype=np.uint64), n_cols)

    @classmethod
    def identity(cls, n: int) -> "BinMatrix":
        return cls.from_bits(np.eye(n, dtype=bool))

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def rows(self) -> list[BitVec]:
        return [BitVec(self.data[i].copy(), self.n_cols) for i in range(self.n_rows)]

    def row(self, i: int) -> BitVec:
        return BitVec(self.data[i].copy(), self.n_cols)

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.data, self.n_cols).reshape(self.n_rows, self.n_cols)

    def transpose(self) -> "BinMatrix":
        return BinMatrix.from_bits(self.to_bits().T.copy())

    def matvec(self, v: BitVec) -> BitVec:
        """Return ``m @ v`` over GF(2) as a vector indexed by rows."""
        if v.length != self.n_cols:
            raise ValueError("length mismatch")
        prod = self.data & v.words[None, :]
        bits = np.unpackbits(prod.view(np.uint8), axis=1).sum(axis=1) & 1
        return BitVec.from_bits(bits.astype(bool))

    def combine(self, coeffs: BitVec) -> BitVec:
        """Return the XOR of the rows selected by ``coeffs``."""
        if coeffs.length != self.n_rows:
            raise ValueError("length mismatch")
        sel = coeffs.to_bits()
        out = np.bitwise_xor.reduce(self.data[sel], axis=0) if sel.any() else np.zeros(
            self.data.shape[1], dtype=np.uint64
        )
        return BitVec(out, self.n_cols)

    def vstack(self, other: "BinMatrix") -> "BinMatrix":
        if other.n_cols != self.n_cols:
            raise ValueError("column mismatch")
        return BinMatrix(np.concatenate([self.data, other.data]), self.n_cols)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinMatrix)
            and self.shape == other.shape
            and bool(np.array_equal(self.data, other.data))
        )

    def __repr__(self) -> str:
        body = "\n".join("".join("1" if b else "0" for b in r) for r in self.to_bits())
        return f"BinMatrix({self.n_rows}x{self.n_cols})\n{body}"


def _column(data: np.ndarray, col: int) -> np.ndarray:
    return ((data[:, col // WORD] >> np.uint64(col % WORD)) & np.uint64(1)).astype(bool)


def _eliminate(data: np.ndarray, n_cols: int, track: np.ndarray | None = None):
    """In-place Gauss-Jordan elimination; returns pivot columns."""
    n_rows = data.shape[0]
    pivots: list[int] = []
    r = 0
    for col in range(n_cols):
        if r == n_rows:
            break
        colbits = _column(data, col)
        hits = np.flatnonzero(colbits[r:])
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            data[[r, p]] = data[[p, r]]
            if track is not None:
                track[[r, p]] = track[[p, r]]
            colbits[[r, p]] = colbits[[p, r]]
        colbits[r] = False
        if colbits.any():
            data[colbits] ^= data[r]
            if track is not None:
                track[colbits] ^= track[r]
        pivots.append(col)
        r += 1
    return pivots


def rref(m: BinMatrix) -> tuple[BinMatrix, int, list[int]]:
    """Reduced row-echelon form.

    Args:
        m: input matrix (left untouched).

    Returns:
        ``(r, rank, pivot_cols)`` where ``r`` has the same shape as ``m``, its
        first ``rank`` rows are nonzero with leading ones at ``pivot_cols`` and
        all other entries of the pivot columns are zero.
    """
    data = m.data.copy()
    pivots = _eliminate(data, m.n_cols)
    return BinMatrix(data, m.n_cols), len(pivots), pivots


def rref_with_transform(m: BinMatrix) -> tuple[BinMatrix, BinMatrix, list[int]]:
    """Like :func:`rref` but also returns ``T`` with ``T @ m == r``."""
    data = m.data.copy()
    track = BinMatrix.identity(m.n_rows).data.copy() if m.n_rows else np.zeros((0, 1), np.uint64)
    pivots = _eliminate(data, m.n_cols, track)
    return BinMatrix(data, m.n_cols), BinMatrix(track, m.n_rows), pivots


def rank(m: BinMatrix) -> int:
    return len(_eliminate(m.data.copy(), m.n_cols))


def rank_bits(bits: np.ndarray) -> int:
    """Rank of a boolean matrix, skipping the BinMatrix wrapper."""
    bits = np.asarray(bits, dtype=bool)
    if bits.size == 0:
        return 0
    return len(_eliminate(pack_bits(bits), bits.shape[1]))


def kernel_basis(m: BinMatrix) -> BinMatrix:
    """Basis of the right null space ``{v : m v = 0}``.

    The basis has one vector per free column, built from the reduced form, so
    the result is deterministic for a given input.
    """
    r, rk, pivots = rref(m)
    n = m.n_cols
    free = [c for c in range(n) if c not in set(pivots)]
    if not free:
        return BinMatrix.zeros(0, n)
    rbits = r.to_bits()[:rk]
    out = np.zeros((len(free), n), dtype=bool)
    for k, f in enumerate(free):
        out[k, f] = True
        for i, p in enumerate(pivots):
            if rbits[i, f]:
                out[k, p] = True
    return BinMatrix.from_bits(out)


def in_rowspan(v: BitVec, m: BinMatrix) -> tuple[bool, BitVec | None]:
    """Test whether ``v`` is a combination of the rows of ``m``.

    Returns:
        ``(True, combo)`` where ``combo`` is a BitVec over row indices whose
        selected rows XOR to ``v``; ``(False, None)`` otherwise.
    """
    if v.length != m.n_cols:
        raise ValueError("length mismatch")
    r, t, pivots = rref_with_transform(m)
    resid = v.words.copy()
    combo = np.zeros(_n_words(m.n_rows), dtype=np.uint64)
    for i, p in enumerate(pivots):
        if (resid[p // WORD] >> np.uint64(p % WORD)) & np.uint64(1):
            resid ^= r.data[i]
            combo ^= t.data[i]
    if resid.any():
        return False, None
    return True, BitVec(combo, m.n_rows)


class RowReducer:
    """Reusable reduced basis for batched membership tests.

    Building it costs one elimination; :meth:`reduce` then strips the span
    from any number of packed vectors at once.
    """

    def __init__(self, m: BinMatrix):
        r, rk, pivots = rref(m)
        self.basis = r.data[:rk].copy()
        self.pivots = pivots
        self.n_cols = m.n_cols

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, words: np.ndarray) -> np.ndarray:
        """Return canonical residues of packed rows modulo the span."""
        out = np.array(words, dtype=np.uint64, copy=True)
        if out.ndim == 1:
            out = out[None, :]
        for i, p in enumerate(self.pivots):
            hit = _column(out, p)
            if hit.any():
                out[hit] ^= self.basis[i]
        return out

    def contains(self, words: np.ndarray) -> np.ndarray:
        return ~self.reduce(words).any(axis=1)


def solve(m: BinMatrix, rhs: BitVec) -> BitVec | None:
    """Find one ``x`` with ``m x = rhs`` or return ``None``."""
    if rhs.length != m.n_rows:
        raise ValueError("length mismatch")
    aug = np.concatenate([m.to_bits(), rhs.to_bits()[:, None]], axis=1)
    r, rk, pivots = rref(BinMatrix.from_bits(aug))
    if m.n_cols in pivots:
        return None
    rb = r.to_bits()
    x = np.zeros(m.n_cols, dtype=bool)
    for i, p in enumerate(pivots):
        x[p] = rb[i, m.n_cols]
    return BitVec.from_bits(x)
