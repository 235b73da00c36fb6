"""Clifford synthesis by sequential reduction of tracked Paulis.

A :class:`Frame` holds a list of Hermitian Paulis and a circuit.  Every gate
pushed onto the frame conjugates all tracked Paulis, so the routines below can
steer chosen rows onto single-qubit targets while watching the others.
"""

from __future__ import annotations

import numpy as np

from .circuit import CliffordCircuit, conjugate_rows
from .f2core import BinMatrix, BitVec, kernel_basis, rank_bits, solve
from .pauli import Pauli, hermitian_product, symplectic_form


class Frame:
    def __init__(self, paulis: list[Pauli], n: int):
        for p in paulis:
            if not p.is_hermitian():
                raise ValueError(f"{p} is not Hermitian")
        self.n = n
        self.xs = np.array([p.x for p in paulis], dtype=bool).reshape(len(paulis), n)
        self.zs = np.array([p.z for p in paulis], dtype=bool).reshape(len(paulis), n)
        self.r = np.array([p.phase == 2 for p in paulis], dtype=bool)
        self.circuit = CliffordCircuit(n)

    def gate(self, name: str, *sites: int) -> None:
        conjugate_rows(self.xs, self.zs, self.r, name, sites)
        self.circuit.append(name, *sites)

    def pauli(self, i: int) -> Pauli:
        return Pauli(self.xs[i], self.zs[i], 2 if self.r[i] else 0)

    def _to_x(self, row: int, k: int) -> None:
        """Turn row ``row`` into ``+-X_k`` using gates on qubits ``>= k``."""
        x, z = self.xs[row], self.zs[row]
        for j in range(k, self.n):
            if z[j] and not x[j]:
                self.gate("H", j)
            elif z[j] and x[j]:
                self.gate("S", j)
        sup = [j for j in range(k, self.n) if x[j]]
        if not sup:
            raise ValueError("row acts trivially on the remaining qubits")
        if k not in sup:
            self.gate("SWAP", k, sup[0])
        for j in range(k + 1, self.n):
            if x[j]:
                self.gate("CNOT", k, j)

    def to_z(self, row: int, k: int) -> None:
        """Map row to ``+Z_k``; earlier qubits may only carry Z on this row."""
        self._to_x(row, k)
        self.gate("H", k)
        for j in range(k):
            if self.zs[row, j]:
                self.gate("CNOT", j, k)
        if self.r[row]:
            self.gate("X", k)

    def pair_to_xz(self, ra: int, rb: int, k: int) -> None:
        """Map an anticommuting pair trivial on qubits ``< k`` to ``(+X_k, +Z_k)``."""
        self._to_x(ra, k)
        x, z = self.xs[rb], self.zs[rb]
        for j in range(k + 1, self.n):
            if x[j] and not z[j]:
                self.gate("H", j)
            elif x[j] and z[j]:
                self.gate("S", j)
                self.gate("H", j)
        for j in range(k + 1, self.n):
            if z[j]:
                self.gate("CNOT", j, k)
        if x[k]:
            self.gate("H", k)
            self.gate("S", k)
            self.gate("H", k)
        if self.r[ra]:
            self.gate("Z", k)
        if self.r[rb]:
            self.gate("X", k)


def gram(paulis: list[Pauli]) -> np.ndarray:
    k = len(paulis)
    out = np.zeros((k, k), dtype=np.uint8)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = symplectic_form(paulis[i], paulis[j])
    return out


def gram_schmidt(paulis: list[Pauli], form=None):
    """Symplectic Gram-Schmidt in input order.

    Args:
        paulis: Hermitian Paulis.
        form: optional ``form(a, b)`` symplectic product used for decisions;
            defaults to the full product.  Multiplications always act on the
            full operators via :func:`hermitian_product`.

    Returns:
        ``(pairs, lone, ops)``.  ``ops`` replays the same decisions on another
        list with an identical Gram matrix (see :func:`replay`).
    """
    form = form or symplectic_form
    pairs, lone, ops = [], [], []
    pool = list(range(len(paulis)))
    cur = list(paulis)
    while pool:
        u = pool.pop(0)
        partner = next((w for w in pool if form(cur[u], cur[w])), None)
        if partner is None:
            lone.append(u)
            continue
        w = partner
        pool.remove(w)
        pairs.append((u, w))
        for v in pool:
            a = form(cur[v], cur[w])
            b = form(cur[v], cur[u])
            if a:
                cur[v] = hermitian_product(cur[v], cur[u])
                ops.append((v, u))
            if b:
                cur[v] = hermitian_product(cur[v], cur[w])
                ops.append((v, w))
    return [(cur[u], cur[w]) for u, w in pairs], [cur[u] for u in lone], (pairs, lone, ops)


def replay(paulis: list[Pauli], record):
    pairs, lone, ops = record
    cur = list(paulis)
    for v, u in ops:
        cur[v] = hermitian_product(cur[v], cur[u])
    return [(cur[u], cur[w]) for u, w in pairs], [cur[u] for u in lone]


def _omega_rows(paulis: list[Pauli]) -> np.ndarray:
    # row i dotted with a symplectic vector v gives <p_i, v>
    return np.array([np.concatenate([p.z, p.x]) for p in paulis], dtype=bool)


def _partner(basis: list[Pauli], target: int, n: int) -> Pauli:
    m = BinMatrix.from_bits(_omega_rows(basis))
    rhs = np.zeros(len(basis), dtype=bool)
    rhs[target] = True
    sol = solve(m, BitVec.from_bits(rhs))
    if sol is None:
        raise ValueError("no symplectic partner exists")
    return Pauli.from_symplectic(sol.to_bits())


def complete_basis(pairs: list[tuple[Pauli, Pauli]], lone: list[Pauli], n: int):
    """Extend to ``n`` symplectic pairs; ``lone`` items get partners in order."""
    out = list(pairs)
    partners: list[Pauli] = []
    fixed = [p for ab in pairs for p in ab] + list(lone)
    for i, c in enumerate(lone):
        d = _partner(fixed + partners, 2 * len(pairs) + i, n)
        partners.append(d)
        out.append((c, d))
    flat = [p for ab in out for p in ab]
    while len(out) < n:
        m = BinMatrix.from_bits(_omega_rows(flat)) if flat else BinMatrix.zeros(0, 2 * n)
        u = Pauli.from_symplectic(kernel_basis(m).row(0).to_bits())
        w = _partner(flat + [u], len(flat), n)
        out.append((u, w))
        flat += [u, w]
    return out


def reduce_basis(pairs: list[tuple[Pauli, Pauli]], n: int) -> CliffordCircuit:
    """Circuit mapping pair ``k`` to ``(+X_k, +Z_k)`` for every ``k``."""
    frame = Frame([p for ab in pairs for p in ab], n)
    for k in range(len(pairs)):
        frame.pair_to_xz(2 * k, 2 * k + 1, k)
    return frame.circuit


def is_independent(paulis: list[Pauli], n: int) -> bool:
    if not paulis:
        return True
    bits = np.array([np.concatenate([p.x, p.z]) for p in paulis], dtype=bool)
    return rank_bits(bits) == len(paulis)
