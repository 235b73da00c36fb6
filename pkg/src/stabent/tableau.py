"""Stabilizer groups as generator tableaus.

A :class:`StabTableau` stores ``k <= n`` independent commuting Hermitian
Paulis as boolean ``xs``/``zs`` matrices plus a sign vector.  The state it
describes is any state fixed by all generators; ``nu = n - k`` counts the
missing generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _synth
from .circuit import CliffordCircuit, Gate, conjugate_rows
from .f2core import BinMatrix, BitVec, in_rowspan, kernel_basis, rank_bits
from .pauli import Pauli, phase_of_product, region_mask, restrict_to, symplectic_form


# --------------------------------------------------------------------------
# cuts


class Bipartition:
    """Qubit subset ``A`` of an ``n``-qubit register; ``B`` is the complement."""

    __slots__ = ("a_mask",)

    def __init__(self, a_sites, n: int):
        self.a_mask = region_mask(a_sites, n)
        self.a_mask.setflags(write=False)

    @classmethod
    def half(cls, n: int) -> "Bipartition":
        return cls(range(n // 2), n)

    @classmethod
    def parse(cls, text: str, n: int) -> "Bipartition":
        """Parse ``"half"``, ``"0,1,2|rest"`` or ``"0,1|2,3"``."""
        text = text.strip()
        if text == "half":
            return cls.half(n)
        if "|" not in text:
            raise ValueError(f"cut {text!r} needs a '|' separator")
        left, right = (s.strip() for s in text.split("|", 1))
        a = _parse_sites(left, n)
        if right == "rest":
            return cls(a, n)
        b = _parse_sites(right, n)
        if set(a) & set(b) or len(a) + len(b) != n:
            raise ValueError(f"cut {text!r} must split all {n} qubits into two disjoint sets")
        return cls(a, n)

    @property
    def n(self) -> int:
        return self.a_mask.size

    @property
    def b_mask(self) -> np.ndarray:
        return ~self.a_mask

    @property
    def a_sites(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.a_mask)]

    @property
    def b_sites(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(~self.a_mask)]

    @property
    def n_a(self) -> int:
        return int(self.a_mask.sum())

    @property
    def n_b(self) -> int:
        return self.n - self.n_a

    def mask(self, side: str) -> np.ndarray:
        if side not in ("A", "B"):
            raise ValueError("side must be 'A' or 'B'")
        return self.a_mask.copy() if side == "A" else self.b_mask

    def swapped(self) -> "Bipartition":
        return Bipartition(self.b_mask, self.n)

    def to_text(self) -> str:
        return ",".join(map(str, self.a_sites)) + "|" + ",".join(map(str, self.b_sites))

    def __repr__(self) -> str:
        return f"Bipartition({self.to_text()})"


def _parse_sites(text: str, n: int) -> list[int]:
    sites = [int(s) for s in text.split(",") if s.strip()]
    if any(not 0 <= s < n for s in sites) or len(set(sites)) != len(sites):
        raise ValueError(f"bad site list {text!r} for n={n}")
    return sites


def parse_parts(text: str, n: int) -> list[np.ndarray]:
    """Parse ``"0,1|2,3|4,5"`` into disjoint masks covering all qubits."""
    parts = [_parse_sites(chunk, n) for chunk in text.split("|")]
    seen = [s for p in parts for s in p]
    if len(seen) != len(set(seen)) or len(seen) != n or any(not p for p in parts):
        raise ValueError(f"parts {text!r} must partition all {n} qubits")
    return [region_mask(p, n) for p in parts]


# --------------------------------------------------------------------------
# tableau


class StabTableau:
    """Independent commuting set of signed Paulis on ``n`` qubits."""

    __slots__ = ("n", "xs", "zs", "r")

    def __init__(self, n: int, gens: list[Pauli] | None = None, *, check: bool = True):
        gens = list(gens or [])
        self.n = int(n)
        k = len(gens)
        self.xs = np.array([g.x for g in gens], dtype=bool).reshape(k, self.n)
        self.zs = np.array([g.z for g in gens], dtype=bool).reshape(k, self.n)
        if any(g.n != self.n for g in gens):
            raise ValueError("generator length differs from n")
        if any(not g.is_hermitian() for g in gens):
            raise ValueError("generators must be Hermitian")
        self.r = np.array([g.phase == 2 for g in gens], dtype=bool)
        if check:
            self.validate()

    @classmethod
    def _raw(cls, n, xs, zs, r) -> "StabTableau":
        t = cls.__new__(cls)
        t.n = n
        t.xs, t.zs, t.r = xs, zs, r
        return t

    @classmethod
    def zero_state(cls, n: int) -> "StabTableau":
        return cls._raw(n, np.zeros((n, n), bool), np.eye(n, dtype=bool), np.zeros(n, bool))

    @classmethod
    def parse(cls, text: str) -> "StabTableau":
        """Read ``n=<int>`` followed by one signed Pauli per line."""
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines or not lines[0].lower().startswith("n="):
            raise ValueError("tableau text must start with 'n=<int>'")
        n = int(lines[0][2:])
        return cls(n, [Pauli.parse(ln, n) for ln in lines[1:]])

    def to_text(self) -> str:
        return f"n={self.n}\n" + "".join(str(g) + "\n" for g in self.gens)

    def copy(self) -> "StabTableau":
        return StabTableau._raw(self.n, self.xs.copy(), self.zs.copy(), self.r.copy())

    @property
    def size(self) -> int:
        return self.xs.shape[0]

    @property
    def nu(self) -> int:
        return self.n - self.size

    @property
    def gens(self) -> list[Pauli]:
        return [self.gen(i) for i in range(self.size)]

    def gen(self, i: int) -> Pauli:
        return Pauli(self.xs[i], self.zs[i], 2 if self.r[i] else 0)

    def symplectic_bits(self) -> np.ndarray:
        return np.concatenate([self.xs, self.zs], axis=1)

    def matrix(self) -> BinMatrix:
        return BinMatrix.from_bits(self.symplectic_bits().reshape(self.size, 2 * self.n))

    def restricted_bits(self, mask: np.ndarray) -> np.ndarray:
        return np.concatenate([self.xs[:, mask], self.zs[:, mask]], axis=1)

    def validate(self) -> None:
        k = self.size
        if k > self.n:
            raise ValueError("more generators than qubits")
        xi = self.xs.astype(np.int64)
        zi = self.zs.astype(np.int64)
        form = (xi @ zi.T + zi @ xi.T) & 1
        bad = np.argwhere(form)
        if bad.size:
            i, j = bad[0]
            raise ValueError(f"generators {i} and {j} anticommute")
        if rank_bits(self.symplectic_bits()) != k:
            raise ValueError("generators are not independent")

    def __repr__(self) -> str:
        return f"StabTableau(n={self.n}, |S|={self.size})"

    # group membership ----------------------------------------------------
    def product_of(self, combo) -> Pauli:
        """Exact product of the generators selected by a row-index BitVec or mask."""
        sel = combo.to_bits() if isinstance(combo, BitVec) else np.asarray(combo, bool)
        return _rows_product(self.xs[sel], self.zs[sel], self.r[sel], self.n)

    def find(self, p: Pauli) -> Pauli | None:
        """Return the signed group element equal to ``p`` up to sign, or None."""
        ok, combo = in_rowspan(p.symplectic(), self.matrix())
        if not ok:
            return None
        return self.product_of(combo)

    def same_group(self, other: "StabTableau") -> bool:
        """Equal rowspan and equal signs on every generator."""
        if self.n != other.n or self.size != other.size:
            return False
        for g in other.gens:
            h = self.find(g)
            if h is None or h.phase != g.phase:
                return False
        return True


def _rows_product(xs, zs, r, n: int) -> Pauli:
    x = np.zeros(n, bool)
    z = np.zeros(n, bool)
    phase = 0
    for i in range(xs.shape[0]):
        phase += int(phase_of_product(x, z, xs[i], zs[i]).sum()) + (2 if r[i] else 0)
        x ^= xs[i]
        z ^= zs[i]
    return Pauli(x, z, phase)


def tableau_from_frame(n: int, xs, zs, r) -> StabTableau:
    return StabTableau._raw(n, np.array(xs, bool), np.array(zs, bool), np.array(r, bool))


# --------------------------------------------------------------------------
# dynamics on tableaus


def apply_gate(t: StabTableau, gate: str, sites) -> StabTableau:
    """Conjugate every generator by a Clifford gate."""
    sites = tuple(int(s) for s in sites)
    g = Gate(gate, sites)
    if any(not 0 <= s < t.n for s in sites):
        raise ValueError(f"site out of range for n={t.n}")
    out = t.copy()
    conjugate_rows(out.xs, out.zs, out.r, g.name, g.sites)
    return out


def apply_circuit(t: StabTableau, circuit: CliffordCircuit) -> StabTableau:
    if circuit.n != t.n:
        raise ValueError("circuit and tableau sizes differ")
    out = t.copy()
    for g in circuit.gates:
        conjugate_rows(out.xs, out.zs, out.r, g.name, g.sites)
    return out


def measure_z(t: StabTableau, site: int, rng=None, outcome: int | None = None):
    """Measure ``Z_site``.

    Args:
        t: tableau.
        site: qubit index.
        rng: numpy Generator used for random outcomes.
        outcome: force ``+1``/``-1`` instead of drawing (only honoured when
            the outcome is not already determined).

    Returns:
        ``(tableau, outcome, was_random)``.
    """
    if not 0 <= site < t.n:
        raise ValueError("site out of range")
    zp = Pauli.single(t.n, "Z", site)
    anti = np.flatnonzero(t.xs[:, site])

    def draw() -> int:
        if outcome is not None:
            if outcome not in (1, -1):
                raise ValueError("outcome must be +1 or -1")
            return outcome
        if rng is None:
            raise ValueError("rng or forced outcome required")
        return 1 if rng.random() < 0.5 else -1

    if anti.size == 0:
        hit = t.find(zp)
        if hit is not None:
            return t.copy(), hit.sign, False
        m = draw()
        out = StabTableau._raw(
            t.n,
            np.vstack([t.xs, zp.x[None]]),
            np.vstack([t.zs, zp.z[None]]),
            np.append(t.r, m < 0),
        )
        return out, m, True

    out = t.copy()
    j = int(anti[0])
    for i in anti[1:]:
        p = _rows_product(out.xs[[i, j]], out.zs[[i, j]], out.r[[i, j]], t.n)
        out.xs[i], out.zs[i], out.r[i] = p.x, p.z, p.phase == 2
    m = draw()
    out.xs[j] = zp.x
    out.zs[j] = zp.z
    out.r[j] = m < 0
    return out, m, True


def local_combinations(t: StabTableau, mask: np.ndarray) -> BinMatrix:
    """Generator combinations whose product acts trivially outside ``mask``."""
    outside = t.restricted_bits(~mask)
    return kernel_basis(BinMatrix.from_bits(outside.T.copy().reshape(outside.shape[1], t.size)))


def local_generators(t: StabTableau, cut: Bipartition, side: str = "A") -> list[Pauli]:
    """Generators of the subgroup supported inside ``side`` of the cut."""
    mask = cut.mask(side)
    combos = local_combinations(t, mask)
    return [t.product_of(c) for c in combos.rows]


def local_generators_mask(t: StabTableau, mask) -> list[Pauli]:
    mask = region_mask(mask, t.n)
    return [t.product_of(c) for c in local_combinations(t, mask).rows]


def local_count(t: StabTableau, mask) -> int:
    """``|S_X|``: number of independent generators supported on ``mask``."""
    mask = region_mask(mask, t.n)
    return t.size - rank_bits(t.restricted_bits(~mask))


def stabilizer_entanglement(t: StabTableau, cut: Bipartition) -> Fraction:
    """``(|S| - |S_A| - |S_B|) / 2`` as an exact fraction."""
    if cut.n != t.n:
        raise ValueError("cut size differs from tableau")
    if t.size == 0:
        return Fraction(0)
    ra = rank_bits(t.restricted_bits(cut.a_mask))
    rb = rank_bits(t.restricted_bits(cut.b_mask))
    return Fraction(ra + rb - t.size, 2)


def discard(t: StabTableau, sites) -> StabTableau:
    """Trace out ``sites``: keep group elements trivial there, drop the columns."""
    drop = region_mask(sites, t.n)
    keep = ~drop
    gens = local_generators_mask(t, keep)
    n2 = int(keep.sum())
    return StabTableau._raw(
        n2,
        np.array([g.x[keep] for g in gens], bool).reshape(len(gens), n2),
        np.array([g.z[keep] for g in gens], bool).reshape(len(gens), n2),
        np.array([g.phase == 2 for g in gens], bool),
    )


def add_ancilla(t: StabTableau, position: int | None = None) -> StabTableau:
    """Append a fresh ``|0>`` qubit (new ``+Z`` generator) at ``position``."""
    pos = t.n if position is None else position
    xs = np.insert(t.xs, pos, False, axis=1)
    zs = np.insert(t.zs, pos, False, axis=1)
    newx = np.zeros((1, t.n + 1), bool)
    newz = np.zeros((1, t.n + 1), bool)
    newz[0, pos] = True
    return StabTableau._raw(t.n + 1, np.vstack([xs, newx]), np.vstack([zs, newz]), np.append(t.r, False))


# --------------------------------------------------------------------------
# canonical form across a cut


@dataclass
class CanonicalSplit:
    s_a: list[Pauli]
    s_b: list[Pauli]
    pairs: list[tuple[Pauli, Pauli]]
    unpaired: list[Pauli]

    @property
    def m(self) -> int:
        return len(self.pairs)

    def all_generators(self) -> list[Pauli]:
        return self.s_a + self.s_b + [p for ab in self.pairs for p in ab] + self.unpaired


def canonical_pairing(t: StabTableau, cut: Bipartition) -> CanonicalSplit:
    """Split the group into local parts and spanning symplectic pairs.

    Spanning generators are the input generators (in order) that complete the
    local subgroups to a basis.  Symplectic Gram-Schmidt on their
    A-restrictions then pairs each candidate with its first anticommuting
    partner; leftovers are reported as unpaired.
    """
    ca = local_combinations(t, cut.a_mask)
    cb = local_combinations(t, cut.b_mask)
    s_a = [t.product_of(c) for c in ca.rows]
    s_b = [t.product_of(c) for c in cb.rows]
    span_bits = np.vstack([ca.to_bits(), cb.to_bits()]).reshape(ca.n_rows + cb.n_rows, t.size)
    base_rank = rank_bits(span_bits) if span_bits.size else 0
    spanning: list[Pauli] = []
    for i in range(t.size):
        e = np.zeros((1, t.size), bool)
        e[0, i] = True
        trial = np.vstack([span_bits, e])
        if rank_bits(trial) > base_rank:
            span_bits = trial
            base_rank += 1
            spanning.append(t.gen(i))
    a = cut.a_mask

    def form_a(p: Pauli, q: Pauli) -> int:
        return symplectic_form(restrict_to(p, a), restrict_to(q, a))

    pairs, lone, _ = _synth.gram_schmidt(spanning, form_a)
    return CanonicalSplit(s_a, s_b, pairs, lone)


# --------------------------------------------------------------------------
# compression


def nullity_distillation(t: StabTableau) -> CliffordCircuit:
    """Clifford ``U`` with ``U g_i U^dagger = +Z_i`` for every generator ``g_i``.

    Generator ``i`` is steered onto qubit ``i`` with gates on qubits ``>= i``
    plus CNOTs controlled by earlier (already ``Z``) qubits.
    """
    frame = _synth.Frame(t.gens, t.n)
    for i in range(t.size):
        frame.to_z(i, i)
    return frame.circuit


def stabilizer_completion(t: StabTableau) -> StabTableau:
    """Extend to ``n`` commuting independent generators containing ``t``."""
    if t.size == t.n:
        return t.copy()
    u = nullity_distillation(t)
    inv = u.inverse()
    from .circuit import conjugate_pauli

    extra = [conjugate_pauli(Pauli.single(t.n, "Z", q), inv) for q in range(t.size, t.n)]
    return StabTableau(t.n, t.gens + extra)


def random_tableau(n: int, rng, size: int | None = None) -> StabTableau:
    """Uniformly random stabilizer state tableau, optionally truncated to ``size`` generators."""
    from .dynamics import random_clifford

    u = random_clifford(n, rng)
    full = apply_circuit(StabTableau.zero_state(n), u)
    if size is None or size >= n:
        return full
    keep = np.sort(rng.choice(n, size=size, replace=False))
    return StabTableau._raw(n, full.xs[keep], full.zs[keep], full.r[keep])
