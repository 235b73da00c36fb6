"""Doped states: a stabilizer tableau plus explicit coset data.

A pure state with stabilizer group ``G`` (``|G| = 2^{n-nu}``) expands as

    psi = 2^{-n} sum_i c_i h_i sum_{g in G} g,     c_i = tr(h_i psi),

over Pauli coset representatives ``h_i`` (``h_0 = I``).  The 2-Renyi entropy
of a bipartition only needs the tableau and the ``(h_i, c_i)`` list.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .f2core import BinMatrix, RowReducer, pack_bits
from .pauli import Pauli
from .tableau import Bipartition, StabTableau, local_count, stabilizer_entanglement


class DopedState:
    """Tableau of rank ``n - nu`` with coset list ``[(h_i, c_i)]``.

    Large coset lists are better built with :meth:`from_arrays`, which keeps
    the representatives as a bit matrix and only materializes Paulis on
    access to :attr:`cosets`.
    """

    def __init__(self, tab: StabTableau, cosets, *, check: bool = True, pure: bool = True):
        cosets = [(h, float(c)) for h, c in cosets]
        self.tab = tab
        self.pure = pure
        self._list = cosets
        self._bits = np.array([np.concatenate([h.x, h.z]) for h, _ in cosets], dtype=bool).reshape(
            len(cosets), 2 * tab.n
        )
        self._coeffs = np.array([c for _, c in cosets], dtype=float)
        self._freeze()
        if check:
            self.validate()

    @classmethod
    def from_arrays(cls, tab: StabTableau, bits, coeffs, *, check: bool = True, pure: bool = True) -> "DopedState":
        """Build from ``(k, 2n)`` representative rows (x | z, sign +) and coefficients."""
        obj = cls.__new__(cls)
        obj.tab = tab
        obj.pure = pure
        obj._list = None
        obj._bits = np.array(bits, dtype=bool).reshape(-1, 2 * tab.n)
        obj._coeffs = np.array(coeffs, dtype=float).reshape(-1)
        if len(obj._bits) != len(obj._coeffs):
            raise ValueError("bits and coeffs differ in length")
        obj._freeze()
        if check:
            obj.validate()
        return obj

    def _freeze(self) -> None:
        self._bits.setflags(write=False)
        self._coeffs.setflags(write=False)

    @property
    def n(self) -> int:
        return self.tab.n

    @property
    def nu(self) -> int:
        return self.tab.nu

    @property
    def cosets(self) -> list[tuple[Pauli, float]]:
        if self._list is None:
            n = self.n
            self._list = [
                (Pauli(row[:n], row[n:]), float(c)) for row, c in zip(self._bits, self._coeffs)
            ]
        return self._list

    def __len__(self) -> int:
        return len(self._coeffs)

    def coset_bits(self) -> np.ndarray:
        """``(k, 2n)`` symplectic rows of the representatives."""
        return self._bits

    def packed_bits(self) -> np.ndarray:
        if getattr(self, "_packed", None) is None:
            self._packed = pack_bits(self._bits)
        return self._packed

    def coeffs(self) -> np.ndarray:
        return self._coeffs

    def coeff_squares(self) -> np.ndarray:
        return self._coeffs * self._coeffs

    def validate(self, tol: float = 1e-9) -> None:
        k = len(self)
        if k == 0:
            raise ValueError("coset list is empty")
        if self._bits[0].any() or abs(self._coeffs[0] - 1) > tol:
            raise ValueError("first coset must be (I, 1)")
        if k > 4**self.nu:
            raise ValueError(f"{k} cosets exceed 4^nu = {4 ** self.nu}")
        if np.any(self._coeffs == 0):
            raise ValueError("coset coefficients must be nonzero")
        red = RowReducer(self.tab.matrix()).reduce(pack_bits(self._bits))
        if len(np.unique(red, axis=0)) != k:
            raise ValueError("two representatives share a coset")
        if self.pure:
            total = math.fsum(self.coeff_squares())
            if abs(total - 2**self.nu) > 1e-9 * 2**self.nu:
                raise ValueError(f"sum c^2 = {total}, expected 2^nu = {2 ** self.nu}")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "generators": [str(g) for g in self.tab.gens],
            "cosets": [{"pauli": str(h), "coeff": c} for h, c in self.cosets],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data) -> "DopedState":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["n"])
        tab = StabTableau(n, [Pauli.parse(g, n) for g in data["generators"]])
        cosets = [(Pauli.parse(c["pauli"], n), float(c["coeff"])) for c in data["cosets"]]
        return cls(tab, cosets)


def t_plus_state() -> DopedState:
    """``T|+>``: no stabilizers, cosets ``I, X, Y`` with ``1, 1/sqrt2, 1/sqrt2``."""
    r = 1 / math.sqrt(2)
    return DopedState(StabTableau(1, []), [(Pauli.parse("I"), 1.0), (Pauli.parse("X"), r), (Pauli.parse("Y"), r)])


def renyi2_exact(s: DopedState, cut: Bipartition) -> float:
    """Exact ``S_2`` of the A-marginal in bits.

    ``S_2 = (n_A - |S_A|) - log2(sum_i delta_i c_i^2)`` where ``delta_i = 1``
    iff the B-part of ``h_i`` lies in the rowspan of the B-restricted tableau.
    """
    if cut.n != s.n:
        raise ValueError("cut size differs from state")
    t = s.tab
    n_a = cut.n_a
    s_a = local_count(t, cut.a_mask)
    # zero the A columns instead of slicing, so the packed rows are reused per cut
    keep = np.concatenate([cut.b_mask, cut.b_mask])
    hb = s.packed_bits() & pack_bits(keep)
    tb = t.symplectic_bits().reshape(t.size, 2 * s.n) & keep
    delta = RowReducer(BinMatrix.from_bits(tb)).contains(hb)
    c2 = s.coeff_squares()
    total = math.fsum(c2[delta])
    if not total >= 1 - 1e-12:
        raise AssertionError(f"coset sum {total} < 1: sign or membership bug")
    return float(n_a - s_a - math.log2(total))


def entropy_interval(obj, cut: Bipartition, alpha_class: str = "all") -> tuple[float, float]:
    """Bounds on ``S_alpha`` from ``E`` and ``nu``.

    Args:
        obj: StabTableau or DopedState.
        cut: bipartition.
        alpha_class: ``"all"`` gives ``[E - 3nu/2, E + nu/2]``; ``"le2"`` (von
            Neumann and every ``alpha <= 2``) gives ``[E - nu/2, E + nu/2]``.

    The lower end is clipped at 0.
    """
    t = obj.tab if isinstance(obj, DopedState) else obj
    e = float(stabilizer_entanglement(t, cut))
    nu = t.nu
    if alpha_class == "all":
        lo, hi = e - 1.5 * nu, e + 0.5 * nu
    elif alpha_class in ("le2", "vn"):
        lo, hi = e - 0.5 * nu, e + 0.5 * nu
    else:
        raise ValueError("alpha_class must be 'all' or 'le2'")
    return max(0.0, lo), hi


def local_interval(t: StabTableau, cut: Bipartition) -> tuple[float, float]:
    """``[n_A - |S_A| - 2 nu, n_A - |S_A|]`` clipped at 0, valid for every alpha."""
    z = cut.n_a - local_count(t, cut.a_mask)
    return float(max(0, z - 2 * t.nu)), float(z)


@dataclass
class PhaseResult:
    phase: str
    nu: int
    e: Fraction
    ratio: float
    theta: float

    def to_json(self) -> dict:
        return {
            "phase": self.phase,
            "nu": {"value": self.nu, "unit": "qubits"},
            "E": {"value": float(self.e), "unit": "ebits"},
            "nu_over_E": {"value": self.ratio, "unit": "ratio"},
            "theta": {"value": self.theta, "unit": "ratio"},
        }


def _classify(nu: int, e: Fraction, theta: float) -> PhaseResult:
    if e < 0:
        raise ValueError("E must be >= 0")
    if e == 0:
        if nu == 0:
            warnings.warn("unentangled stabilizer state across the cut; reported as MD", stacklevel=3)
        return PhaseResult("MD", nu, e, math.inf if nu else math.nan, theta)
    phase = "ED" if nu <= theta * e else "MD"
    return PhaseResult(phase, nu, e, nu / float(e), theta)


def phase_classify(t: StabTableau, cut: Bipartition, theta: float = 1.0) -> PhaseResult:
    """Entanglement- vs magic-dominated via the finite-size rule ``nu <= theta E``."""
    return _classify(t.nu, stabilizer_entanglement(t, cut), theta)


def phase_property_test(learned: StabTableau, cut: Bipartition, theta: float = 1.0) -> str:
    """Decision on a learned group ``G``: ED iff ``n - log2|G| <= theta E(G)``."""
    return _classify(learned.n - learned.size, stabilizer_entanglement(learned, cut), theta).phase
