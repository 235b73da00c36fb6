"""Dense statevector backend used as ground truth at small ``n``.

Basis index convention: qubit 0 is the most significant bit, so a state
reshaped to ``(2,) * n`` has qubit ``j`` on axis ``j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, CliffordCircuit, Gate, MeasureZ, NonClifford
from .pauli import Pauli
from .tableau import Bipartition, StabTableau, local_count, stabilizer_entanglement

DEFAULT_CAP = 14
ENUM_CAP = 10
DENSITY_CAP = 10
EIG_CLIP = 1e-12
RANK_TOL = 1e-10

_SQ2 = 1 / math.sqrt(2)
GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], complex) * _SQ2,
    "S": np.diag([1, 1j]),
    "X": np.array([[0, 1], [1, 0]], complex),
    "Y": np.array([[0, -1j], [1j, 0]], complex),
    "Z": np.diag([1, -1]).astype(complex),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "TDG": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], complex),
}


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fix."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


class DenseState:
    """Unit-norm statevector on ``n`` qubits."""

    __slots__ = ("amps", "n")

    def __init__(self, amps, n: int | None = None):
        amps = np.asarray(amps, dtype=complex).ravel()
        n = int(round(math.log2(amps.size))) if n is None else n
        if amps.size != 2**n:
            raise ValueError("amplitude count must be 2**n")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1) > 1e-10:
            raise ValueError(f"state norm {norm} is not 1")
        self.amps = amps
        self.n = n

    @classmethod
    def zero(cls, n: int) -> "DenseState":
        a = np.zeros(2**n, complex)
        a[0] = 1
        return cls(a, n)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.n)

    def fidelity(self, other: "DenseState") -> float:
        return float(abs(np.vdot(self.amps, other.amps)) ** 2)


@dataclass
class MixedState:
    rho: np.ndarray
    n: int
    trace_distance: float = 0.0


@dataclass
class RegionSet:
    """Regions ``A``, ``B``, ``C`` for ``S_AB + S_BC - S_B - S_ABC``."""

    a: list[int]
    b: list[int]
    c: list[int] = field(default_factory=list)

    def validate(self, n: int) -> None:
        sets = [set(self.a), set(self.b), set(self.c)]
        if any(s & t for i, s in enumerate(sets) for t in sets[i + 1 :]):
            raise ValueError("regions must be disjoint")
        if any(q < 0 or q >= n for s in sets for q in s):
            raise ValueError("region index out of range")


# --------------------------------------------------------------------------
# simulation


def apply_matrix(psi: np.ndarray, n: int, u: np.ndarray, sites) -> np.ndarray:
    sites = list(sites)
    t = psi.reshape((2,) * n)
    t = np.moveaxis(t, sites, range(len(sites)))
    shape = t.shape
    t = (u @ t.reshape(2 ** len(sites), -1)).reshape(shape)
    return np.moveaxis(t, range(len(sites)), sites).reshape(-1)


def _op_matrix(op, rng) -> np.ndarray:
    if isinstance(op, Gate):
        return GATE_MATRICES[op.name]
    if op.label == "RZ":
        return rz(op.theta)
    if op.label in ("T", "TDG"):
        return GATE_MATRICES[op.label]
    if op.label == "HAAR":
        if op.matrix is not None:
            return np.asarray(op.matrix, complex)
        if rng is None:
            raise ValueError("HAAR gate without matrix needs an rng")
        return haar_unitary(2 ** len(op.sites), rng)
    raise ValueError(f"unknown non-Clifford label {op.label!r}")


def simulate_dense(c, rng=None, cap: int = DEFAULT_CAP, initial: DenseState | None = None) -> DenseState:
    """Run a :class:`Circuit` or :class:`CliffordCircuit` from ``|0...0>``."""
    if c.n > cap:
        raise ValueError(f"n={c.n} exceeds dense cap {cap}")
    n = c.n
    psi = (initial.amps.copy() if initial is not None else DenseState.zero(n).amps)
    ops = c.gates if isinstance(c, CliffordCircuit) else c.ops
    for op in ops:
        if isinstance(op, MeasureZ):
            if rng is None:
                raise ValueError("measurement needs an rng")
            t = psi.reshape(2**op.site, 2, -1)
            p0 = float(np.vdot(t[:, 0], t[:, 0]).real)
            keep = 0 if rng.random() < p0 else 1
            t = t.copy()
            t[:, 1 - keep] = 0
            psi = t.reshape(-1)
            psi /= np.linalg.norm(psi)
            continue
        psi = apply_matrix(psi, n, _op_matrix(op, rng), op.sites)
    return DenseState(psi, n)


def dense_from_tableau(t: StabTableau) -> DenseState:
    """A state stabilized by ``t`` (the unique one when ``|S| = n``)."""
    from .tableau import nullity_distillation, stabilizer_completion

    full = stabilizer_completion(t)
    u = nullity_distillation(full)
    return simulate_dense(u.inverse())


# --------------------------------------------------------------------------
# Pauli action


def _ints(p: Pauli) -> tuple[int, int]:
    n = p.n
    w = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    return int((p.x * w).sum()), int((p.z * w).sum())


def _parity(a: np.ndarray) -> np.ndarray:
    # bitwise_count returns uint8; widen before any signed arithmetic
    return (np.bitwise_count(a) & 1).astype(np.int64)


def apply_pauli(amps: np.ndarray, p: Pauli) -> np.ndarray:
    xi, zi = _ints(p)
    idx = np.arange(amps.size, dtype=np.int64)
    src = idx ^ xi
    coef = 1j ** ((p.phase + int((p.x & p.z).sum())) % 4)
    signs = 1 - 2 * _parity(src & zi)
    return coef * signs * amps[src]


def pauli_matrix(p: Pauli) -> np.ndarray:
    """Dense matrix of ``p`` (small ``n`` only)."""
    letters = {"I": np.eye(2), "X": GATE_MATRICES["X"], "Y": GATE_MATRICES["Y"], "Z": GATE_MATRICES["Z"]}
    m = np.array([[1.0 + 0j]])
    for a in p.letters():
        m = np.kron(m, letters[a])
    return (1j**p.phase) * m


def expectation(s, p: Pauli) -> float:
    """Exact ``tr(P rho)`` for a :class:`DenseState` or :class:`MixedState`."""
    if isinstance(s, MixedState):
        xi, zi = _ints(p)
        idx = np.arange(2**s.n, dtype=np.int64)
        src = idx ^ xi
        coef = 1j ** ((p.phase + int((p.x & p.z).sum())) % 4)
        signs = 1 - 2 * _parity(src & zi)
        val = coef * (signs * s.rho[src, idx]).sum()
        return float(val.real)
    return float(np.vdot(s.amps, apply_pauli(s.amps, p)).real)


def sample_pauli(s, p: Pauli, rng) -> int:
    """Single-shot ``+-1`` outcome of measuring Hermitian ``p``."""
    e = expectation(s, p)
    return 1 if rng.random() < (1 + e) / 2 else -1


def all_pauli_expectations(s: DenseState) -> np.ndarray:
    """Table ``E[x, z] = <psi| P(x,z) |psi>`` for all ``4**n`` unsigned Paulis.

    ``x``, ``z`` are integers in the basis-index bit order; ``P`` is the
    Hermitian letter-form Pauli.  Uses one Walsh-Hadamard transform per
    ``x`` row, ``O(n 4**n)`` overall.
    """
    n = s.n
    if n > ENUM_CAP:
        raise ValueError(f"n={n} exceeds enumeration cap {ENUM_CAP}")
    N = 2**n
    k = np.arange(N, dtype=np.int64)
    psi = s.amps
    v = np.conj(psi[k[None, :] ^ k[:, None]]) * psi[None, :]
    for j in range(n):
        v = v.reshape(N, 2**j, 2, N >> (j + 1))
        a = v[:, :, 0, :].copy()
        b = v[:, :, 1, :]
        v[:, :, 0, :] += b
        v[:, :, 1, :] = a - b
    v = v.reshape(N, N)
    phase = 1j ** (np.bitwise_count(k[:, None] & k[None, :]) % 4)
    return (phase * v).real


def _pauli_from_ints(xi: int, zi: int, n: int, phase: int = 0) -> Pauli:
    bits = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    return Pauli((xi & bits) != 0, (zi & bits) != 0, phase)


def _stabilizer_entries(table: np.ndarray, tol: float = 1e-9):
    xs, zs = np.nonzero(np.abs(np.abs(table) - 1) < tol)
    keep = (xs != 0) | (zs != 0)
    return xs[keep], zs[keep], table[xs[keep], zs[keep]]


def extract_stabilizer_group(s: DenseState, table: np.ndarray | None = None) -> StabTableau:
    """Independent generators of ``{P : P psi = psi}`` found by enumeration.

    Candidates are scanned by increasing weight, then by index, and kept
    when independent of those already chosen.
    """
    n = s.n
    table = all_pauli_expectations(s) if table is None else table
    xs, zs, vals = _stabilizer_entries(table)
    weight = np.bitwise_count(xs | zs)
    order = np.lexsort((zs, xs, weight))
    basis: dict[int, int] = {}
    gens: list[Pauli] = []
    for i in order:
        vec = (int(xs[i]) << n) | int(zs[i])
        v = vec
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
        if v:
            gens.append(_pauli_from_ints(int(xs[i]), int(zs[i]), n, 0 if vals[i] > 0 else 2))
            if len(gens) == n:
                break
    return StabTableau(n, gens)


def extract_doped_decomposition(s: DenseState, tol: float = 1e-12):
    """Coset representatives ``h_i`` and ``c_i = tr(h_i psi)`` of the state.

    Each coset of the stabilizer group inside the Pauli support is labelled
    by its canonical residue modulo the group's rowspan; that residue, with
    a ``+`` sign, is the representative.
    """
    from .doped import DopedState
    from .f2core import RowReducer, pack_bits

    n = s.n
    table = all_pauli_expectations(s)
    tab = extract_stabilizer_group(s, table)
    xs, zs = np.nonzero(np.abs(table) > tol)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    bits = np.concatenate([(xs[:, None] >> shifts) & 1, (zs[:, None] >> shifts) & 1], axis=1).astype(bool)
    red = RowReducer(tab.matrix()).reduce(pack_bits(bits))
    uniq, first = np.unique(red, axis=0, return_index=True)
    from .f2core import unpack_bits

    reps = unpack_bits(uniq, 2 * n).reshape(len(uniq), 2 * n)
    w = 1 << shifts
    rx = (reps[:, :n] * w).sum(axis=1)
    rz = (reps[:, n:] * w).sum(axis=1)
    coeffs = table[rx, rz]
    order = np.lexsort((rz, rx, np.bitwise_count(rx | rz)))
    return DopedState.from_arrays(tab, reps[order], coeffs[order])


# --------------------------------------------------------------------------
# entropies


def entropy_from_probs(p, alpha) -> float:
    p = np.asarray(p, dtype=float)
    if alpha == 0:
        return math.log2(int((p > RANK_TOL).sum()))
    p = p[p > EIG_CLIP]
    p = p / p.sum()
    if alpha == 1:
        return float(-(p * np.log2(p)).sum())
    if alpha == math.inf:
        return float(-math.log2(p.max()))
    return float(math.log2((p**alpha).sum()) / (1 - alpha))


def schmidt_probs(s: DenseState, sites) -> np.ndarray:
    sites = sorted(sites)
    if not sites or len(sites) == s.n:
        return np.array([1.0])
    rest = [q for q in range(s.n) if q not in set(sites)]
    m = np.transpose(s.tensor(), sites + rest).reshape(2 ** len(sites), -1)
    sv = np.linalg.svd(m, compute_uv=False)
    return sv**2


def reduced_density(s, sites) -> np.ndarray:
    sites = sorted(sites)
    n = s.n
    rest = [q for q in range(n) if q not in set(sites)]
    if isinstance(s, MixedState):
        t = s.rho.reshape((2,) * (2 * n))
        t = np.transpose(t, sites + rest + [n + q for q in sites] + [n + q for q in rest])
        da, db = 2 ** len(sites), 2 ** len(rest)
        t = t.reshape(da, db, da, db)
        return np.einsum("ajbj->ab", t)
    m = np.transpose(s.tensor(), sites + rest).reshape(2 ** len(sites), -1)
    return m @ m.conj().T


def region_entropy(s, sites, alpha=1) -> float:
    if isinstance(s, MixedState):
        ev = np.linalg.eigvalsh(reduced_density(s, sites))
        return entropy_from_probs(np.clip(ev, 0, None), alpha)
    return entropy_from_probs(schmidt_probs(s, sites), alpha)


def renyi_entropy_dense(s, cut: Bipartition, alpha=2) -> float:
    """``S_alpha`` of the A-marginal in bits from its exact spectrum."""
    return region_entropy(s, cut.a_sites, alpha)


# --------------------------------------------------------------------------
# noise


def density(s: DenseState) -> np.ndarray:
    return np.outer(s.amps, s.amps.conj())


def depolarize(s: DenseState, q: float) -> MixedState:
    """``(1-q) |psi><psi| + q I/2^n`` with its exact trace distance to ``psi``."""
    if s.n > DENSITY_CAP:
        raise ValueError(f"n={s.n} exceeds density cap {DENSITY_CAP}")
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    psi = density(s)
    rho = (1 - q) * psi + q * np.eye(2**s.n) / 2**s.n
    dist = 0.5 * float(np.abs(np.linalg.eigvalsh(rho - psi)).sum())
    return MixedState(rho, s.n, dist)


def projector_expectation(s, t: StabTableau) -> float:
    """``tr(Pi rho)`` with ``Pi`` the projector onto the stabilized space."""
    from itertools import product as iproduct

    gens = t.gens
    total = 0.0
    for bits in iproduct((0, 1), repeat=len(gens)):
        total += expectation(s, t.product_of(np.array(bits, bool)))
    return total / 2 ** len(gens)


# --------------------------------------------------------------------------
# topological combination


def topo_entropy(s, regions: RegionSet, alpha=1) -> float:
    """``S_AB + S_BC - S_B - S_ABC`` in bits."""
    regions.validate(s.n)
    a, b, c = regions.a, regions.b, regions.c

    def ent(sites):
        return region_entropy(s, sites, alpha) if sites else 0.0

    return ent(a + b) + ent(b + c) - ent(b) - ent(a + b + c)


def topo_entropy_stabilizer(t: StabTableau, regions: RegionSet) -> float:
    """Same combination with ``n_X - |S_X|`` per region (exact when ``nu = 0``)."""
    regions.validate(t.n)
    a, b, c = regions.a, regions.b, regions.c

    def ent(sites):
        if not sites:
            return 0
        return len(set(sites)) - local_count(t, sites)

    return float(ent(a + b) + ent(b + c) - ent(b) - ent(a + b + c))


def ghz_regions(n: int) -> RegionSet:
    """Region convention giving 2 for GHZ: ``A``, ``C`` halves, ``B`` empty."""
    return RegionSet(list(range(n // 2)), [], list(range(n // 2, n)))


def toric_code_tableau(l1: int, l2: int, logicals: bool = True) -> StabTableau:
    """Star (Z) and plaquette (X) generators on an ``l1 x l2`` periodic lattice.

    Qubits sit on edges: horizontal edge ``(i, j)`` -> ``i*l2 + j``, vertical
    edge ``(i, j)`` -> ``l1*l2 + i*l2 + j``.  One star and one plaquette are
    dropped (they are products of the others).  With ``logicals`` the two
    non-contractible Z loops are added, giving a full-rank code state.
    """
    if l1 < 2 or l2 < 2:
        raise ValueError("lattice sides must be >= 2")
    L = l1 * l2
    n = 2 * L

    def h(i, j):
        return (i % l1) * l2 + (j % l2)

    def v(i, j):
        return L + (i % l1) * l2 + (j % l2)

    def op(letter, edges):
        x = np.zeros(n, bool)
        z = np.zeros(n, bool)
        for e in edges:
            if letter == "X":
                x[e] ^= True
            else:
                z[e] ^= True
        return Pauli(x, z)

    stars = [op("Z", [h(i, j), h(i, j - 1), v(i, j), v(i - 1, j)]) for i in range(l1) for j in range(l2)]
    plaqs = [op("X", [h(i, j), h(i + 1, j), v(i, j), v(i, j + 1)]) for i in range(l1) for j in range(l2)]
    gens = stars[:-1] + plaqs[:-1]
    if logicals:
        gens.append(op("Z", [v(0, j) for j in range(l2)]))
        gens.append(op("Z", [h(i, 0) for i in range(l1)]))
    return StabTableau(n, gens)
