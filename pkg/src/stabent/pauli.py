"""Signed Pauli operators in symplectic form.

A Pauli on ``n`` qubits is stored as two boolean vectors ``x``, ``z`` and a
phase exponent.  Each qubit carries the letter I, X, Z or Y for
``(x, z) = (0,0), (1,0), (0,1), (1,1)``, with ``Y = i X Z``, and the operator
is ``i**phase`` times the tensor product of letters.  Hermitian Paulis
therefore have ``phase in {0, 2}``: ``+XIZY`` has phase 0, ``-XX`` phase 2.
"""

from __future__ import annotations

import re

import numpy as np

from .f2core import BitVec

_LETTERS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_PREFIX = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_PREFIX_OUT = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def phase_of_product(x1, z1, x2, z2) -> np.ndarray:
    """Exponent of ``i`` picked up by ``letter(x1,z1) @ letter(x2,z2)``.

    Works elementwise on integer arrays; callers sum over qubits.
    """
    x1 = np.asarray(x1, dtype=np.int64)
    z1 = np.asarray(z1, dtype=np.int64)
    x2 = np.asarray(x2, dtype=np.int64)
    z2 = np.asarray(z2, dtype=np.int64)
    return np.where(
        x1 & z1,
        z2 - x2,
        np.where(x1, z2 * (2 * x2 - 1), np.where(z1, x2 * (1 - 2 * z2), 0)),
    )


class Pauli:
    """Immutable signed Pauli operator."""

    __slots__ = ("x", "z", "phase")

    def __init__(self, x, z, phase: int = 0):
        x = np.array(x, dtype=bool).ravel()
        z = np.array(z, dtype=bool).ravel()
        if x.shape != z.shape:
            raise ValueError("x and z must have equal length")
        x.setflags(write=False)
        z.setflags(write=False)
        self.x = x
        self.z = z
        self.phase = int(phase) % 4

    # constructors ---------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "Pauli":
        return cls(np.zeros(n, bool), np.zeros(n, bool))

    @classmethod
    def single(cls, n: int, letter: str, site: int, sign: int = 1) -> "Pauli":
        x = np.zeros(n, bool)
        z = np.zeros(n, bool)
        x[site], z[site] = _LETTERS[letter]
        return cls(x, z, 0 if sign > 0 else 2)

    @classmethod
    def from_letters(cls, letters: dict[int, str], n: int, phase: int = 0) -> "Pauli":
        x = np.zeros(n, bool)
        z = np.zeros(n, bool)
        for q, a in letters.items():
            x[q], z[q] = _LETTERS[a]
        return cls(x, z, phase)

    @classmethod
    def from_symplectic(cls, v, phase: int = 0) -> "Pauli":
        bits = v.to_bits() if isinstance(v, BitVec) else np.asarray(v, dtype=bool)
        n = bits.size // 2
        return cls(bits[:n], bits[n:], phase)

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "Pauli":
        """Parse ``"+XIZY"``, ``"-iXZ"`` or sparse ``"X0 Z2 Y3"`` text.

        The sparse form needs ``n`` unless it is implied by the largest index;
        it may start with a sign token such as ``"-"`` or ``"-i"``.
        """
        s = text.strip()
        m = re.fullmatch(r"([+-]?i?)\s*([IXYZ]+)", s)
        if m and (n is None or len(m.group(2)) == n):
            x = np.array([_LETTERS[c][0] for c in m.group(2)], bool)
            z = np.array([_LETTERS[c][1] for c in m.group(2)], bool)
            return cls(x, z, _PREFIX[m.group(1)])
        m = re.fullmatch(r"([+-]?i?)\s*I", s)
        if m and n is not None:
            return cls(np.zeros(n, bool), np.zeros(n, bool), _PREFIX[m.group(1)])
        m = re.fullmatch(r"([+-]?i?)\s*((?:[IXYZ]\d+\s*)*)", s)
        if not m:
            raise ValueError(f"cannot parse Pauli {text!r}")
        terms = re.findall(r"([IXYZ])(\d+)", m.group(2))
        top = max((int(q) for _, q in terms), default=-1) + 1
        if n is None:
            n = top
        if top > n:
            raise ValueError(f"site index out of range in {text!r}")
        letters: dict[int, str] = {}
        x = np.zeros(n, bool)
        z = np.zeros(n, bool)
        for a, q in terms:
            q = int(q)
            if q in letters:
                raise ValueError(f"site {q} repeated in {text!r}")
            letters[q] = a
            x[q], z[q] = _LETTERS[a]
        return cls(x, z, _PREFIX[m.group(1)])

    # views ----------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.x.size

    @property
    def sign(self) -> int:
        """``+1`` or ``-1`` for Hermitian Paulis."""
        if self.phase % 2:
            raise ValueError("non-Hermitian Pauli has no real sign")
        return 1 if self.phase == 0 else -1

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def symplectic(self) -> BitVec:
        return BitVec.from_bits(np.concatenate([self.x, self.z]))

    def support(self) -> list[int]:
        return [int(q) for q in np.flatnonzero(self.x | self.z)]

    def weight(self) -> int:
        return int((self.x | self.z).sum())

    def letters(self) -> str:
        out = np.full(self.n, "I")
        out[self.x & ~self.z] = "X"
        out[~self.x & self.z] = "Z"
        out[self.x & self.z] = "Y"
        return "".join(out)

    def __str__(self) -> str:
        return _PREFIX_OUT[self.phase] + self.letters()

    def sparse(self) -> str:
        body = " ".join(f"{a}{q}" for q, a in enumerate(self.letters()) if a != "I")
        pre = _PREFIX_OUT[self.phase]
        pre = "" if pre == "+" else pre + " "
        return pre + (body or "I")

    def __repr__(self) -> str:
        return f"Pauli({str(self)!r})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Pauli)
            and self.phase == other.phase
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.phase, self.x.tobytes(), self.z.tobytes()))

    def equal_up_to_sign(self, other: "Pauli") -> bool:
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    def with_phase(self, phase: int) -> "Pauli":
        return Pauli(self.x, self.z, phase)

    def negate(self) -> "Pauli":
        return Pauli(self.x, self.z, self.phase + 2)

    def __mul__(self, other: "Pauli") -> "Pauli":
        return multiply(self, other)


def _check(a: Pauli, b: Pauli) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")


def multiply(a: Pauli, b: Pauli) -> Pauli:
    """Exact operator product ``a @ b``."""
    _check(a, b)
    g = int(phase_of_product(a.x, a.z, b.x, b.z).sum())
    return Pauli(a.x ^ b.x, a.z ^ b.z, a.phase + b.phase + g)


def symplectic_form(a: Pauli, b: Pauli) -> int:
    _check(a, b)
    return int((np.count_nonzero(a.x & b.z) + np.count_nonzero(a.z & b.x)) & 1)


def commutes(a: Pauli, b: Pauli) -> bool:
    return symplectic_form(a, b) == 0


def hermitian_product(a: Pauli, b: Pauli) -> Pauli:
    """``a b`` if the factors commute, else ``i a b``; Hermitian in/out."""
    p = multiply(a, b)
    return p if commutes(a, b) else Pauli(p.x, p.z, p.phase + 1)


def restrict_to(p: Pauli, region) -> Pauli:
    """Zero every qubit outside ``region`` and drop the phase.

    Args:
        p: Pauli to restrict.
        region: boolean mask of length ``n`` or an iterable of qubit indices.
    """
    mask = region_mask(region, p.n)
    return Pauli(p.x & mask, p.z & mask, 0)


def region_mask(region, n: int) -> np.ndarray:
    arr = np.asarray(region)
    if arr.dtype == bool and arr.shape == (n,):
        return arr.copy()
    mask = np.zeros(n, bool)
    idx = np.asarray(list(region), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError("region index out of range")
    mask[idx] = True
    return mask


def product(paulis, n: int) -> Pauli:
    out = Pauli.identity(n)
    for p in paulis:
        out = multiply(out, p)
    return out
