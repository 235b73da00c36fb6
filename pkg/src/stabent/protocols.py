"""Entanglement manipulation: distillation, GHZ counting, dilution, witnessing, cooling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _synth
from .circuit import CliffordCircuit
from .pauli import Pauli, region_mask, restrict_to, symplectic_form
from .tableau import (
    Bipartition,
    CanonicalSplit,
    StabTableau,
    apply_circuit,
    canonical_pairing,
    discard,
    local_combinations,
    local_generators_mask,
    nullity_distillation,
    stabilizer_completion,
    stabilizer_entanglement,
)
from .f2core import rank_bits


class RelationMismatch(ValueError):
    """Source and target sets have different commutation relations."""


class InfeasiblePlan(ValueError):
    """A requested plan cannot meet its guarantees."""


# --------------------------------------------------------------------------
# Clifford from Pauli images


def clifford_from_pauli_images(constraints, n: int | None = None) -> CliffordCircuit:
    """Clifford circuit ``U`` with ``U s U^dagger = t`` for every ``(s, t)``.

    Both sides are reduced by the same symplectic Gram-Schmidt decisions (they
    depend only on the shared commutation pattern), completed to full
    symplectic bases, and each basis is steered to the standard
    ``(X_k, Z_k)`` frame.  ``U`` is the source reduction followed by the
    inverse target reduction.

    Raises:
        RelationMismatch: if some pair of constraints commutes on one side and
            anticommutes on the other.
        ValueError: for dependent, non-Hermitian or mis-sized inputs.
    """
    constraints = list(constraints)
    if n is None:
        if not constraints:
            raise ValueError("n required for an empty constraint list")
        n = constraints[0][0].n
    src = [s for s, _ in constraints]
    tgt = [t for _, t in constraints]
    for p in src + tgt:
        if p.n != n:
            raise ValueError("constraint length differs from n")
        if not p.is_hermitian():
            raise ValueError(f"{p} is not Hermitian")
    for i in range(len(src)):
        for j in range(i + 1, len(src)):
            if symplectic_form(src[i], src[j]) != symplectic_form(tgt[i], tgt[j]):
                raise RelationMismatch(
                    f"constraints {i} and {j}: sources {src[i]}, {src[j]} vs targets {tgt[i]}, {tgt[j]}"
                )
    if not _synth.is_independent(src, n) or not _synth.is_independent(tgt, n):
        raise ValueError("sources and targets must each be independent")
    for s, t in constraints:
        if s.is_identity() or t.is_identity():
            raise ValueError("identity cannot be a constraint")
    pairs_s, lone_s, record = _synth.gram_schmidt(src)
    pairs_t, lone_t = _synth.replay(tgt, record)
    basis_s = _synth.complete_basis(pairs_s, lone_s, n)
    basis_t = _synth.complete_basis(pairs_t, lone_t, n)
    v_s = _synth.reduce_basis(basis_s, n)
    v_t = _synth.reduce_basis(basis_t, n)
    return v_s.then(v_t.inverse())


# --------------------------------------------------------------------------
# bipartite distillation


@dataclass
class DistillationResult:
    """Local circuits ``u_a``, ``u_b`` (global qubit labels) and Bell-pair sites."""

    u_a: CliffordCircuit
    u_b: CliffordCircuit
    m_plus: int
    pair_sites: list[tuple[int, int]]
    guarantee: int
    split: CanonicalSplit = field(repr=False)

    def circuit(self) -> CliffordCircuit:
        return self.u_a.then(self.u_b)

    def to_json(self) -> dict:
        return {
            "m_plus": {"value": self.m_plus, "unit": "ebits"},
            "guaranteed_min": {"value": self.guarantee, "unit": "ebits"},
            "pair_sites": [list(p) for p in self.pair_sites],
            "u_a": self.u_a.to_text().splitlines(),
            "u_b": self.u_b.to_text().splitlines(),
            "unpaired": {"value": len(self.split.unpaired), "unit": "generators"},
        }


def _local_clifford(constraints, sites: list[int], n: int) -> CliffordCircuit:
    if not constraints:
        return CliffordCircuit(n)
    local = clifford_from_pauli_images(constraints, len(sites))
    return local.remap(sites, n)


def distillation_guarantee(t: StabTableau, cut: Bipartition, s0_bound: float | None = None) -> int:
    """``floor(E - nu/2 - S0/2)`` with ``S0`` defaulting to ``n - |S| - nu`` (= 0)."""
    nu = t.nu
    if s0_bound is None:
        s0_bound = t.n - t.size - nu
    e = stabilizer_entanglement(t, cut)
    return math.floor(Fraction(e) - Fraction(nu, 2) - Fraction(s0_bound).limit_denominator() / 2)


def synthesize_bipartite_distillation(
    t: StabTableau, cut: Bipartition, s0_bound: float | None = None
) -> DistillationResult:
    """Local Cliffords turning every spanning symplectic pair into a Bell pair.

    Pair ``i`` ``(g, g')`` of the canonical split is sent to
    ``X_{A_i} X_{B_i}`` and ``Z_{A_i} Z_{B_i}``, with ``A_i``, ``B_i`` the
    ``i``-th qubits of each side in increasing order.
    """
    split = canonical_pairing(t, cut)
    a_sites, b_sites = cut.a_sites, cut.b_sites
    am, bm = cut.a_mask, cut.b_mask
    ca, cb = [], []
    for i, (g, gb) in enumerate(split.pairs):
        for p, letter in ((g, "X"), (gb, "Z")):
            pa = Pauli(p.x[am], p.z[am])
            pb = Pauli(p.x[bm], p.z[bm])
            ca.append((pa, Pauli.single(len(a_sites), letter, i, p.sign)))
            cb.append((pb, Pauli.single(len(b_sites), letter, i)))
    m = len(split.pairs)
    return DistillationResult(
        u_a=_local_clifford(ca, a_sites, t.n),
        u_b=_local_clifford(cb, b_sites, t.n),
        m_plus=m,
        pair_sites=[(a_sites[i], b_sites[i]) for i in range(m)],
        guarantee=distillation_guarantee(t, cut, s0_bound),
        split=split,
    )


# --------------------------------------------------------------------------
# multipartite GHZ counting


@dataclass
class GHZCount:
    p: int
    e_multi: int
    s_loc: int
    bell: dict[str, int] | None
    stripped: int
    completion: StabTableau = field(repr=False)

    def to_json(self) -> dict:
        out = {
            "ghz": {"value": self.p, "unit": "GHZ states"},
            "E_multi": {"value": self.e_multi, "unit": "generators"},
            "S_loc": {"value": self.s_loc, "unit": "generators"},
            "stripped_local": {"value": self.stripped, "unit": "qubits"},
            "completion": [str(g) for g in self.completion.gens],
        }
        if self.bell is not None:
            out["bell"] = {k: {"value": v, "unit": "ebits"} for k, v in self.bell.items()}
        return out


def strip_local(t: StabTableau, parts: list[np.ndarray]):
    """Compress generators living inside one part onto ``|0>`` qubits and drop them.

    Returns the reduced tableau, the reduced part masks, and the number of
    qubits removed.
    """
    masks = [region_mask(p, t.n) for p in parts]
    keep = np.ones(t.n, bool)
    cur = t
    for mask in masks:
        gens = local_generators_mask(cur, mask)
        if not gens:
            continue
        sites = [int(q) for q in np.flatnonzero(mask)]
        local = StabTableau(len(sites), [Pauli(g.x[mask], g.z[mask], g.phase) for g in gens])
        u = nullity_distillation(local).remap(sites, cur.n)
        cur = apply_circuit(cur, u)
        keep[sites[: len(gens)]] = False
    dropped = int((~keep).sum())
    if dropped:
        cur = discard(cur, np.flatnonzero(~keep))
    return cur, [m[keep] for m in masks], dropped


def _subgroup_rank(t: StabTableau, masks) -> int:
    blocks = [local_combinations(t, m) for m in masks]
    blocks = [b.to_bits().reshape(b.n_rows, t.size) for b in blocks]
    stacked = np.vstack(blocks) if blocks else np.zeros((0, t.size), bool)
    return rank_bits(stacked) if stacked.size else 0


def ghz_distillable_count(t: StabTableau, parts) -> GHZCount:
    """GHZ count ``p = |S| - |S_loc| - nu`` for a ``k``-partition.

    ``S_loc`` generates every group element acting trivially on at least one
    part.  For ``k = 3`` the Bell count between parties ``Y`` and ``Z`` is
    ``floor((|S| - |S_X| - p)/2 - nu)`` clipped at 0, where ``S_X`` generates
    the elements trivial on ``Y`` or on ``Z``.
    """
    parts = [region_mask(p, t.n) for p in parts]
    if len(parts) < 2:
        raise ValueError("need at least two parts")
    cover = np.sum(parts, axis=0)
    if (cover != 1).any():
        raise ValueError("parts must partition the qubits")
    nu = t.nu
    red, masks, dropped = strip_local(t, parts)
    comps = [~m for m in masks]
    s_loc = _subgroup_rank(red, comps)
    e_multi = red.size - s_loc
    p = max(0, e_multi - nu)
    bell = None
    if len(parts) == 3:
        names = "ABC"
        bell = {}
        for x in range(3):
            y, z = [i for i in range(3) if i != x]
            s_x = _subgroup_rank(red, [comps[y], comps[z]])
            val = math.floor(Fraction(red.size - s_x - p, 2) - nu)
            bell[names[y] + names[z]] = max(0, val)
    return GHZCount(p, e_multi, s_loc, bell, dropped, stabilizer_completion(t))


# --------------------------------------------------------------------------
# dilution


@dataclass
class DilutionPlan:
    ebits: int
    cc_bits: int
    teleport_qubits: int
    inverse_circuits: tuple[CliffordCircuit, CliffordCircuit, CliffordCircuit, CliffordCircuit]
    m_plus: int
    e: Fraction
    nu: int
    teleport_from: str
    remainder_sites: list[int]

    def forward(self) -> CliffordCircuit:
        """``U_A U_B`` then ``V_A V_B``: maps the state to its resource form."""
        u_a, u_b, v_a, v_b = self.inverse_circuits
        return u_a.then(u_b).then(v_a).then(v_b)

    def reconstruction(self) -> CliffordCircuit:
        """Inverse of :meth:`forward`: rebuilds the state from the resources."""
        return self.forward().inverse()

    def to_json(self) -> dict:
        return {
            "ebits": {"value": self.ebits, "unit": "ebits"},
            "cc_bits": {"value": self.cc_bits, "unit": "bits"},
            "teleport_qubits": {"value": self.teleport_qubits, "unit": "qubits"},
            "m_plus": {"value": self.m_plus, "unit": "ebits"},
            "E": {"value": float(self.e), "unit": "ebits"},
            "nu": {"value": self.nu, "unit": "qubits"},
            "teleport_from": self.teleport_from,
            "reconstruction": self.reconstruction().to_text().splitlines(),
        }


def _side_compressor(t: StabTableau, mask: np.ndarray) -> tuple[CliffordCircuit, int]:
    gens = local_generators_mask(t, mask)
    sites = [int(q) for q in np.flatnonzero(mask)]
    if not gens:
        return CliffordCircuit(t.n), 0
    local = StabTableau(len(sites), [Pauli(g.x[mask], g.z[mask], g.phase) for g in gens])
    return nullity_distillation(local).remap(sites, t.n), len(gens)


def dilution_plan(t: StabTableau, cut: Bipartition) -> DilutionPlan:
    """Resource count and circuits to rebuild a pure state from ebits.

    After distillation the state is ``M`` Bell pairs times a remainder on
    ``A''``, ``B''``.  Per-side compressors ``V_A''``, ``V_B''`` push local
    stabilizers onto ``|0>`` qubits; what is left (``q_A`` and ``q_B`` qubits)
    is prepared on the side holding more of it and the smaller share is
    teleported, costing one ebit and two classical bits per qubit.
    """
    dist = synthesize_bipartite_distillation(t, cut)
    after = apply_circuit(t, dist.circuit())
    paired = np.zeros(t.n, bool)
    for a, b in dist.pair_sites:
        paired[[a, b]] = True
    rest_a = cut.a_mask & ~paired
    rest_b = cut.b_mask & ~paired
    v_a, k_a = _side_compressor(after, rest_a)
    after = apply_circuit(after, v_a)
    v_b, k_b = _side_compressor(after, rest_b)
    q_a = int(rest_a.sum()) - k_a
    q_b = int(rest_b.sum()) - k_b
    tele = min(q_a, q_b)
    a_left = [q for q in np.flatnonzero(rest_a)][k_a:]
    b_left = [q for q in np.flatnonzero(rest_b)][k_b:]
    plan = DilutionPlan(
        ebits=dist.m_plus + tele,
        cc_bits=2 * tele,
        teleport_qubits=tele,
        inverse_circuits=(dist.u_a, dist.u_b, v_a, v_b),
        m_plus=dist.m_plus,
        e=stabilizer_entanglement(t, cut),
        nu=t.nu,
        teleport_from="B" if q_a <= q_b else "A",
        remainder_sites=[int(q) for q in a_left + b_left],
    )
    if not plan.ebits <= plan.e + Fraction(plan.nu, 2):
        raise AssertionError("ebit bound violated")
    if not plan.teleport_qubits <= plan.nu:
        raise AssertionError("teleport bound violated")
    return plan


def reversibility_ratio(m_plus: int, m_minus: int) -> float:
    return m_plus / m_minus if m_minus else math.nan


def reversibility_floor(e, nu: int) -> float:
    """``1 - (3 nu + 2) / (2 E)``."""
    return 1 - (3 * nu + 2) / (2 * float(e))


# --------------------------------------------------------------------------
# witness


@dataclass
class WitnessPlan:
    m_of_b: int
    e_level: float
    threshold: float
    n_shots: int
    gap: float
    eps: float
    delta: float
    nu: int

    def to_json(self) -> dict:
        return {
            "M": {"value": self.m_of_b, "unit": "ebits"},
            "E_level": {"value": self.e_level, "unit": "ebits"},
            "threshold": {"value": self.threshold, "unit": "probability"},
            "n_shots": {"value": self.n_shots, "unit": "shots"},
            "gap": {"value": self.gap, "unit": "probability"},
            "eps": {"value": self.eps, "unit": "trace distance"},
            "delta": {"value": self.delta, "unit": "probability"},
            "nu": {"value": self.nu, "unit": "qubits"},
        }


def hoeffding_shots(gap: float, delta: float) -> int:
    """``ceil(2 ln(2/delta) / gap^2)``."""
    return math.ceil(2 * math.log(2 / delta) / gap**2)


def witness_level(t: StabTableau, parts) -> int:
    """``min_i floor(E(A_i|B_i) - nu/2)``."""
    parts = [parts] if isinstance(parts, Bipartition) else list(parts)
    if not parts:
        raise ValueError("need at least one bipartition")
    return min(math.floor(stabilizer_entanglement(t, c) - Fraction(t.nu, 2)) for c in parts)


def witness_plan(t: StabTableau, parts, e_level: float = 0.0, eps: float = 0.0, delta: float = 0.05) -> WitnessPlan:
    """Threshold and shot count for the projector witness.

    ``threshold = 2^{-M + E}`` and the shot count uses the gap
    ``1 - (eps + threshold)``; at ``E = 0`` this is ``1 - (eps + 2^{-M})``.

    Raises:
        InfeasiblePlan: when the gap is not positive.
    """
    if eps < 0 or not 0 < delta < 1:
        raise ValueError("need eps >= 0 and 0 < delta < 1")
    m = witness_level(t, parts)
    threshold = 2.0 ** (-m + e_level)
    gap = 1 - (eps + threshold)
    if gap <= 0:
        raise InfeasiblePlan(f"eps + 2^(-M+E) = {eps + threshold:.6g} >= 1 (M={m})")
    return WitnessPlan(m, e_level, threshold, hoeffding_shots(gap, delta), gap, eps, delta, t.nu)


@dataclass
class WitnessResult:
    pi_hat: float
    verdict: str
    score: float
    threshold: float
    n_shots: int

    def to_json(self) -> dict:
        return {
            "pi_hat": {"value": self.pi_hat, "unit": "probability"},
            "score": {"value": self.score, "unit": "probability"},
            "threshold": {"value": self.threshold, "unit": "probability"},
            "n_shots": {"value": self.n_shots, "unit": "shots"},
            "verdict": self.verdict,
        }


def witness_estimate(state, t: StabTableau, n_shots: int, rng, threshold: float | None = None) -> WitnessResult:
    """Estimate ``tr(Pi rho)`` from single-shot measurements of random group elements.

    Each shot draws ``P = prod g_i^{x_i}`` with fair coins ``x_i`` and records
    one ``+-1`` outcome.  ``score = threshold - pi_hat``; negative means the
    witness fires (``pi_hat > threshold``).  ``threshold`` defaults to
    ``2^{-|S|}``, the value for the maximally mixed state.
    """
    from .oracle import sample_pauli

    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    if threshold is None:
        threshold = 2.0 ** (-t.size)
    total = 0
    for _ in range(n_shots):
        bits = rng.integers(0, 2, t.size).astype(bool)
        total += sample_pauli(state, t.product_of(bits), rng)
    pi_hat = total / n_shots
    return WitnessResult(pi_hat, "entangled" if pi_hat > threshold else "inconclusive", threshold - pi_hat, threshold, n_shots)


# --------------------------------------------------------------------------
# cooling


@dataclass
class CoolingResult:
    circuit: CliffordCircuit
    ratio: float
    remainder_sites: list[int]
    post_e: Fraction
    post: StabTableau = field(repr=False)

    def to_json(self) -> dict:
        return {
            "ratio": {"value": self.ratio, "unit": "ratio"},
            "post_E": {"value": float(self.post_e), "unit": "ebits"},
            "remainder_sites": self.remainder_sites,
            "circuit": self.circuit.to_text().splitlines(),
        }


def entanglement_cool(t: StabTableau, cut: Bipartition) -> CoolingResult:
    """Compress onto ``|0>`` qubits and move the ``nu``-qubit core to one side.

    Raises:
        InfeasiblePlan: if ``nu > n/2``, where the core need not fit one side.
    """
    nu = t.nu
    if 2 * nu > t.n:
        raise InfeasiblePlan(f"nu = {nu} exceeds n/2 = {t.n / 2}")
    circ = nullity_distillation(t)
    side = cut.a_sites if cut.n_a >= cut.n_b else cut.b_sites
    core = list(range(t.size, t.n))
    where = {q: q for q in range(t.n)}  # logical qubit -> physical position
    at = {q: q for q in range(t.n)}  # physical position -> logical qubit
    for k, q in enumerate(core):
        dst = side[k]
        src = where[q]
        if src != dst:
            circ.append("SWAP", src, dst)
            other = at[dst]
            where[q], where[other] = dst, src
            at[dst], at[src] = q, other
    post = apply_circuit(t, circ)
    e = stabilizer_entanglement(post, cut)
    if e != 0:
        raise AssertionError("cooling left entanglement across the cut")
    return CoolingResult(circ, 0.0, sorted(where[q] for q in core), e, post)
