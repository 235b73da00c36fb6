"""Gate lists and their text format, plus the Clifford conjugation kernel.

Text format, one operation per line (``#`` starts a comment)::

    H 0
    CNOT 0 1
    T 2
    RZ 0.7853981633974483 3
    HAAR 0 1
    M 4
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

CLIFFORD_1Q = ("H", "S", "X", "Y", "Z")
CLIFFORD_2Q = ("CNOT", "CZ", "SWAP")
CLIFFORD_GATES = CLIFFORD_1Q + CLIFFORD_2Q
DIAGONAL_LABELS = ("T", "TDG", "RZ")


@dataclass(frozen=True)
class Gate:
    name: str
    sites: tuple[int, ...]

    def __post_init__(self):
        if self.name not in CLIFFORD_GATES:
            raise ValueError(f"unknown Clifford gate {self.name!r}")
        want = 1 if self.name in CLIFFORD_1Q else 2
        if len(self.sites) != want:
            raise ValueError(f"{self.name} takes {want} site(s)")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError(f"{self.name} sites must be distinct")

    def to_text(self) -> str:
        return " ".join([self.name, *map(str, self.sites)])


@dataclass(frozen=True)
class NonClifford:
    """Non-Clifford gate placeholder.

    ``label`` is ``"T"``, ``"TDG"``, ``"RZ"`` (with ``theta``) or ``"HAAR"``.
    A ``HAAR`` op may carry a fixed unitary in ``matrix``; without one the
    dense simulator draws it from its rng.
    """

    sites: tuple[int, ...]
    label: str
    theta: float | None = None
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def diagonal(self) -> bool:
        return self.label in DIAGONAL_LABELS

    def to_text(self) -> str:
        if self.label == "RZ":
            return f"RZ {self.theta!r} " + " ".join(map(str, self.sites))
        return " ".join([self.label, *map(str, self.sites)])


@dataclass(frozen=True)
class MeasureZ:
    site: int

    def to_text(self) -> str:
        return f"M {self.site}"


Op = Union[Gate, NonClifford, MeasureZ]


def _inverse_gate(g: Gate) -> list[Gate]:
    if g.name == "S":
        return [Gate("S", g.sites), Gate("Z", g.sites)]
    return [g]


class CliffordCircuit:
    """Ordered list of Clifford gates on ``n`` qubits."""

    def __init__(self, n: int, gates: list[Gate] | None = None):
        self.n = int(n)
        self.gates: list[Gate] = []
        for g in gates or []:
            self.append(g)

    def append(self, g: Gate | str, *sites: int) -> "CliffordCircuit":
        if isinstance(g, str):
            g = Gate(g, tuple(int(s) for s in sites))
        if any(not 0 <= s < self.n for s in g.sites):
            raise ValueError(f"site out of range in {g.to_text()} for n={self.n}")
        self.gates.append(g)
        return self

    def extend(self, other: "CliffordCircuit") -> "CliffordCircuit":
        for g in other.gates:
            self.append(g)
        return self

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def inverse(self) -> "CliffordCircuit":
        out = CliffordCircuit(self.n)
        for g in reversed(self.gates):
            for h in _inverse_gate(g):
                out.append(h)
        return out

    def then(self, other: "CliffordCircuit") -> "CliffordCircuit":
        """Circuit applying ``self`` first and ``other`` second."""
        return CliffordCircuit(self.n, list(self.gates)).extend(other)

    def remap(self, qubits, n: int) -> "CliffordCircuit":
        """Relabel local qubit ``i`` as ``qubits[i]`` inside an ``n``-qubit register."""
        qubits = list(qubits)
        return CliffordCircuit(n, [Gate(g.name, tuple(qubits[s] for s in g.sites)) for g in self.gates])

    def to_circuit(self) -> "Circuit":
        return Circuit(self.n, list(self.gates))

    def to_text(self) -> str:
        return "".join(g.to_text() + "\n" for g in self.gates)

    def __repr__(self) -> str:
        return f"CliffordCircuit(n={self.n}, gates={len(self.gates)})"


class Circuit:
    """General circuit: Clifford gates, non-Clifford placeholders, Z measurements."""

    def __init__(self, n: int, ops: list[Op] | None = None):
        self.n = int(n)
        self.ops: list[Op] = []
        for op in ops or []:
            self.append(op)

    def append(self, op: Op) -> "Circuit":
        sites = (op.site,) if isinstance(op, MeasureZ) else op.sites
        if any(not 0 <= s < self.n for s in sites):
            raise ValueError(f"site out of range in {op.to_text()} for n={self.n}")
        if isinstance(op, NonClifford) and len(set(op.sites)) != len(op.sites):
            raise ValueError("non-Clifford sites must be distinct")
        self.ops.append(op)
        return self

    def extend(self, ops) -> "Circuit":
        for op in ops:
            self.append(op)
        return self

    @property
    def t_count(self) -> int:
        return sum(isinstance(op, NonClifford) for op in self.ops)

    @property
    def locality(self) -> int:
        return max((len(op.sites) for op in self.ops if isinstance(op, NonClifford)), default=0)

    def has_measurements(self) -> bool:
        return any(isinstance(op, MeasureZ) for op in self.ops)

    def to_text(self) -> str:
        return "".join(op.to_text() + "\n" for op in self.ops)

    def __repr__(self) -> str:
        return f"Circuit(n={self.n}, ops={len(self.ops)}, t={self.t_count})"


def parse_op(line: str) -> Op:
    parts = line.split()
    name = parts[0].upper()
    try:
        if name in CLIFFORD_GATES:
            return Gate(name, tuple(int(s) for s in parts[1:]))
        if name == "M":
            if len(parts) != 2:
                raise ValueError
            return MeasureZ(int(parts[1]))
        if name == "RZ":
            return NonClifford(tuple(int(s) for s in parts[2:]), "RZ", float(parts[1]))
        if name in ("T", "TDG", "HAAR"):
            sites = tuple(int(s) for s in parts[1:])
            if not sites or (name != "HAAR" and len(sites) != 1):
                raise ValueError
            return NonClifford(sites, name)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"malformed operation {line!r}") from exc
    raise ValueError(f"unknown operation {line!r}")


def parse_circuit(text: str, n: int | None = None) -> Circuit:
    """Parse circuit text; ``n`` defaults to one past the largest site used.

    A leading ``n=<int>`` line fixes the register size.
    """
    ops = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("n="):
            n = int(line[2:])
            continue
        ops.append(parse_op(line))
    if n is None:
        sites = [s for op in ops for s in ((op.site,) if isinstance(op, MeasureZ) else op.sites)]
        n = max(sites, default=-1) + 1
    return Circuit(n, ops)


def parse_clifford(text: str, n: int) -> CliffordCircuit:
    c = parse_circuit(text, n)
    out = CliffordCircuit(c.n)
    for op in c.ops:
        if not isinstance(op, Gate):
            raise ValueError(f"not a Clifford gate: {op.to_text()}")
        out.append(op)
    return out


def conjugate_rows(xs: np.ndarray, zs: np.ndarray, r: np.ndarray, name: str, sites) -> None:
    """Apply ``P -> U P U^dagger`` in place to every row.

    ``xs``, ``zs`` are boolean ``(rows, n)`` arrays in letter convention and
    ``r`` a boolean sign vector (``True`` means a ``-`` sign).
    """
    if name == "H":
        (a,) = sites
        r ^= xs[:, a] & zs[:, a]
        tmp = xs[:, a].copy()
        xs[:, a] = zs[:, a]
        zs[:, a] = tmp
    elif name == "S":
        (a,) = sites
        r ^= xs[:, a] & zs[:, a]
        zs[:, a] ^= xs[:, a]
    elif name == "X":
        (a,) = sites
        r ^= zs[:, a]
    elif name == "Z":
        (a,) = sites
        r ^= xs[:, a]
    elif name == "Y":
        (a,) = sites
        r ^= xs[:, a] ^ zs[:, a]
    elif name == "CNOT":
        a, b = sites
        r ^= xs[:, a] & zs[:, b] & ~(xs[:, b] ^ zs[:, a])
        xs[:, b] ^= xs[:, a]
        zs[:, a] ^= zs[:, b]
    elif name == "CZ":
        a, b = sites
        conjugate_rows(xs, zs, r, "H", (b,))
        conjugate_rows(xs, zs, r, "CNOT", (a, b))
        conjugate_rows(xs, zs, r, "H", (b,))
    elif name == "SWAP":
        a, b = sites
        xs[:, [a, b]] = xs[:, [b, a]]
        zs[:, [a, b]] = zs[:, [b, a]]
    else:
        raise ValueError(f"unknown Clifford gate {name!r}")


def conjugate_pauli(p, circuit: CliffordCircuit):
    """Return ``U p U^dagger`` for the unitary ``U`` the circuit implements."""
    from .pauli import Pauli

    if not p.is_hermitian():
        base = conjugate_pauli(Pauli(p.x, p.z, p.phase - 1), circuit)
        return Pauli(base.x, base.z, base.phase + 1)
    xs = p.x[None, :].copy()
    zs = p.z[None, :].copy()
    r = np.array([p.phase == 2])
    for g in circuit.gates:
        conjugate_rows(xs, zs, r, g.name, g.sites)
    return Pauli(xs[0], zs[0], 2 if r[0] else 0)
