"""Independent reference implementations used only by the tests."""

from fractions import Fraction
from itertools import product

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j])
LETTER = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_dense(text):
    """Matrix of a signed Pauli string like '-iXZY' (qubit 0 leftmost)."""
    coef = 1
    if text.startswith("-"):
        coef, text = -1, text[1:]
    elif text.startswith("+"):
        text = text[1:]
    if text.startswith("i"):
        coef, text = coef * 1j, text[1:]
    return coef * kron_all([LETTER[c] for c in text])


def gate_dense(name, sites, n):
    """Full ``2^n`` matrix of a named Clifford gate, built from basis-state action."""
    dim = 2**n
    u = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        vec = {tuple(bits): 1.0 + 0j}
        if name in ("H", "S", "X", "Y", "Z"):
            m = {"H": H, "S": S, "X": X, "Y": Y, "Z": Z}[name]
            (q,) = sites
            new = {}
            for b, a in vec.items():
                for out in (0, 1):
                    amp = m[out, b[q]]
                    if amp:
                        nb = list(b)
                        nb[q] = out
                        new[tuple(nb)] = new.get(tuple(nb), 0) + a * amp
            vec = new
        else:
            a_, b_ = sites
            (b, amp), = vec.items()
            nb = list(b)
            if name == "CNOT" and b[a_]:
                nb[b_] ^= 1
            elif name == "CZ" and b[a_] and b[b_]:
                amp = -amp
            elif name == "SWAP":
                nb[a_], nb[b_] = b[b_], b[a_]
            vec = {tuple(nb): amp}
        for b, a in vec.items():
            row = int("".join(map(str, b)), 2)
            u[row, col] += a
    return u


def circuit_dense(gates, n):
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = gate_dense(g.name, g.sites, n) @ u
    return u


def gf2_rank_ints(rows):
    """Rank of integer bitmask rows by the xor-basis method."""
    basis = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


def span_ints(rows):
    out = {0}
    for r in rows:
        out |= {s ^ r for s in out}
    return out


def single_qubit_clifford_classes():
    """The 24 one-qubit Cliffords mod phase, keyed by signed images of X and Z."""
    gens = {"H": H, "S": S}
    seen = {}
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for u in frontier:
            key = conj_key(u)
            if key in seen:
                continue
            seen[key] = u
            for g in gens.values():
                nxt.append(g @ u)
        frontier = nxt
    return seen


def conj_key(u):
    def image(p):
        m = u @ p @ u.conj().T
        for sign, s in ((1, "+"), (-1, "-")):
            for name, q in (("X", X), ("Y", Y), ("Z", Z)):
                if np.allclose(m, sign * q):
                    return s + name
        raise AssertionError("not a Clifford")

    return image(X), image(Z)


def exact_stationary(n, p_t, p_m):
    """Birth-death stationary law with exact rational arithmetic."""
    p_t, p_m = Fraction(p_t), Fraction(p_m)

    def f(v):
        return 1 - Fraction(2 ** (n + v) - 1, 4**n - 1)

    plus = [p_t * f(v) for v in range(n + 1)]
    minus = [p_m * (1 - f(v)) * (1 - Fraction(1, 2**v)) for v in range(n + 1)]
    w = [Fraction(1)]
    for v in range(1, n + 1):
        w.append(w[-1] * plus[v - 1] / minus[v])
    z = sum(w)
    return [x / z for x in w]


def group_elements(gens_text, n):
    """All ``2^k`` signed products of generators, as dense matrices."""
    mats = [pauli_dense(g) for g in gens_text]
    out = []
    for bits in product((0, 1), repeat=len(mats)):
        m = np.eye(2**n, dtype=complex)
        for b, g in zip(bits, mats):
            if b:
                m = m @ g
        out.append(m)
    return out
