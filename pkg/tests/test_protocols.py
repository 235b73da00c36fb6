import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import all_cuts, doped_instance, random_cut
from oracles import circuit_dense, gf2_rank_ints, pauli_dense
from stabent.circuit import CliffordCircuit, conjugate_pauli
from stabent.dynamics import random_clifford
from stabent.oracle import (
    DenseState,
    dense_from_tableau,
    depolarize,
    projector_expectation,
    reduced_density,
    renyi_entropy_dense,
    simulate_dense,
)
from stabent.pauli import Pauli
from stabent.protocols import (
    InfeasiblePlan,
    RelationMismatch,
    clifford_from_pauli_images,
    dilution_plan,
    entanglement_cool,
    ghz_distillable_count,
    hoeffding_shots,
    reversibility_floor,
    synthesize_bipartite_distillation,
    witness_estimate,
    witness_plan,
)
from stabent.tableau import Bipartition, StabTableau, apply_circuit, random_tableau, stabilizer_entanglement

seeds = st.integers(0, 2**32 - 1)
PHI = np.array([1, 0, 0, 1]) / math.sqrt(2)


def tab(*gens):
    return StabTableau(len(gens[0].lstrip("+-")), [Pauli.parse(g) for g in gens])


# --- Clifford from images ---------------------------------------------------


def test_single_hadamard():
    c = clifford_from_pauli_images([(Pauli.parse("Z"), Pauli.parse("X"))])
    assert conjugate_pauli(Pauli.parse("Z"), c) == Pauli.parse("X")
    u = circuit_dense(list(c), 1)
    assert np.allclose(u @ pauli_dense("Z") @ u.conj().T, pauli_dense("X"))


def test_relation_mismatch():
    with pytest.raises(RelationMismatch, match="constraints 0 and 1"):
        clifford_from_pauli_images(
            [(Pauli.parse("XX"), Pauli.parse("XI")), (Pauli.parse("ZZ"), Pauli.parse("ZI"))]
        )


def test_dependent_sources_rejected():
    with pytest.raises(ValueError):
        clifford_from_pauli_images(
            [(Pauli.parse("XX"), Pauli.parse("XI")), (Pauli.parse("XX"), Pauli.parse("IX"))]
        )


@given(seeds)
def test_random_constraints_dense(seed):
    rng = np.random.default_rng(seed)
    n = 4
    u = random_clifford(n, rng)
    src = list(random_tableau(n, rng).gens)[: int(rng.integers(1, n + 1))]
    # add one anticommuting partner so the set is not purely commuting
    src.append(Pauli.single(n, "X", 0) if not src[0].x[0] and src[0].z[0] else Pauli.single(n, "Z", 0))
    from stabent._synth import is_independent

    if not is_independent(src, n):
        src = src[:-1]
    cons = [(s, conjugate_pauli(s, u)) for s in src]
    v = clifford_from_pauli_images(cons, n)
    m = circuit_dense(list(v), n)
    for s, t in cons:
        ds = (1j ** s.phase) * pauli_dense(s.letters())
        dt = (1j ** t.phase) * pauli_dense(t.letters())
        assert np.allclose(m @ ds @ m.conj().T, dt)


# --- distillation -----------------------------------------------------------


def test_bell_distillation():
    bell = tab("XX", "ZZ")
    res = synthesize_bipartite_distillation(bell, Bipartition([0], 2))
    assert res.m_plus == 1 and res.pair_sites == [(0, 1)]
    out = apply_circuit(bell, res.circuit())
    assert out.same_group(bell)


@given(seeds)
def test_pure_stabilizer_distills_exactly_e(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    t = random_tableau(n, rng)
    cut = random_cut(n, rng)
    res = synthesize_bipartite_distillation(t, cut)
    assert res.m_plus == stabilizer_entanglement(t, cut)
    out = apply_circuit(t, res.circuit())
    for a, b in res.pair_sites:
        for letter in "XZ":
            assert out.find(Pauli.from_letters({a: letter, b: letter}, n)) == Pauli.from_letters({a: letter, b: letter}, n)


def test_doped_8_qubit_pairs_dense():
    rng = np.random.default_rng(8)
    for _ in range(20):
        _, psi, t = doped_instance(8, 2, rng)
        if t.nu == 2:
            break
    assert t.nu == 2
    cut = Bipartition.half(8)
    res = synthesize_bipartite_distillation(t, cut)
    assert res.m_plus >= math.floor(stabilizer_entanglement(t, cut) - 1)
    out = simulate_dense(res.circuit(), initial=psi)
    for a, b in res.pair_sites:
        assert np.real(PHI @ reduced_density(out, [a, b]) @ PHI) == pytest.approx(1, abs=1e-9)


@given(seeds)
def test_distillation_bounds(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    _, psi, t = doped_instance(n, int(rng.integers(0, 3)), rng)
    cut = random_cut(n, rng)
    e = stabilizer_entanglement(t, cut)
    res = synthesize_bipartite_distillation(t, cut)
    assert res.guarantee <= res.m_plus <= e
    assert res.m_plus == len(res.pair_sites)
    assert res.guarantee == math.floor(e - Fraction(t.nu, 2))


def test_s0_bound_reduces_guarantee():
    t = tab("XX", "ZZ")
    res = synthesize_bipartite_distillation(t, Bipartition([0], 2), s0_bound=2)
    assert res.guarantee == 0 and res.m_plus == 1


def test_distillation_json_units():
    j = synthesize_bipartite_distillation(tab("XX", "ZZ"), Bipartition([0], 2)).to_json()
    assert j["m_plus"] == {"value": 1, "unit": "ebits"}


# --- GHZ counting -------------------------------------------------------------


def exhaustive_e_multi(t, parts):
    """``|S| - rank`` of group elements trivial on at least one part, by enumeration."""
    n = t.n
    rows = [(int("".join(map(str, g.x.astype(int))), 2) << n) | int("".join(map(str, g.z.astype(int))), 2) for g in t.gens]
    elems = {0}
    for r in rows:
        elems |= {e ^ r for e in elems}
    local = []
    for e in elems:
        x, z = e >> n, e & ((1 << n) - 1)
        for part in parts:
            pm = sum(1 << (n - 1 - q) for q in part)
            if not (x & pm) and not (z & pm):
                local.append(e)
                break
    return t.size - gf2_rank_ints(local)


def test_ghz3_counts():
    ghz = tab("XXX", "ZZI", "IZZ")
    res = ghz_distillable_count(ghz, [[0], [1], [2]])
    assert res.e_multi == exhaustive_e_multi(ghz, [[0], [1], [2]]) == 1
    assert res.p == 1
    assert res.bell == {"BC": 0, "AC": 0, "AB": 0}


def test_ghz_plus_bell():
    # GHZ on 0,2,4 and a Bell pair between 1 and 3; parts A={0,1}, B={2,3}, C={4}
    t = tab("XIXIX", "ZIZII", "IIZIZ", "IXIXI", "IZIZI")
    parts = [[0, 1], [2, 3], [4]]
    res = ghz_distillable_count(t, parts)
    assert res.p == 1 == exhaustive_e_multi(t, parts)
    assert res.bell == {"BC": 0, "AC": 0, "AB": 1}


def test_product_state_zero():
    res = ghz_distillable_count(StabTableau.zero_state(3), [[0], [1], [2]])
    assert res.p == 0


def test_local_generators_stripped():
    # Bell pair inside part A plus GHZ across parts
    t = tab("XXIII", "ZZIII", "IIXXX", "IIZZI", "IIIZZ")
    res = ghz_distillable_count(t, [[0, 1, 2], [3], [4]])
    assert res.stripped == 2 and res.p == 1


@given(seeds)
def test_ghz_count_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    t = random_tableau(n, rng)
    labels = rng.integers(0, 3, n)
    labels[:3] = [0, 1, 2]
    parts = [[q for q in range(n) if labels[q] == k] for k in range(3)]
    res = ghz_distillable_count(t, parts)
    assert res.p == max(0, exhaustive_e_multi(t, parts))


def test_parts_must_partition():
    with pytest.raises(ValueError):
        ghz_distillable_count(StabTableau.zero_state(3), [[0], [1]])


# --- dilution ---------------------------------------------------------------


def test_dilution_bell():
    plan = dilution_plan(tab("XX", "ZZ"), Bipartition([0], 2))
    assert (plan.ebits, plan.cc_bits, plan.teleport_qubits) == (1, 0, 0)


@given(seeds)
def test_dilution_stabilizer_exact(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    t = random_tableau(n, rng)
    cut = random_cut(n, rng)
    plan = dilution_plan(t, cut)
    assert plan.ebits == stabilizer_entanglement(t, cut) and plan.cc_bits == 0


def test_dilution_doped_round_trip_dense():
    rng = np.random.default_rng(21)
    for _ in range(30):
        _, psi, t = doped_instance(8, 2, rng)
        if t.nu == 2:
            break
    assert t.nu == 2
    cut = Bipartition.half(8)
    plan = dilution_plan(t, cut)
    e = stabilizer_entanglement(t, cut)
    assert plan.ebits <= e + 1 and plan.teleport_qubits <= 2
    resource = simulate_dense(plan.forward(), initial=psi)
    back = simulate_dense(plan.reconstruction(), initial=resource)
    assert abs(np.vdot(back.amps, psi.amps)) == pytest.approx(1, abs=1e-9)
    # resource form: Bell pairs on the pair sites
    res = synthesize_bipartite_distillation(t, cut)
    for a, b in res.pair_sites:
        assert np.real(PHI @ reduced_density(resource, [a, b]) @ PHI) == pytest.approx(1, abs=1e-9)


@given(seeds)
def test_dilution_tableau_round_trip(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    _, _, t = doped_instance(n, int(rng.integers(0, 3)), rng)
    cut = random_cut(n, rng)
    plan = dilution_plan(t, cut)
    assert apply_circuit(apply_circuit(t, plan.forward()), plan.reconstruction()).same_group(t)
    assert plan.ebits <= plan.e + Fraction(t.nu, 2)
    assert plan.teleport_qubits <= t.nu
    assert plan.cc_bits == 2 * plan.teleport_qubits


def test_reversibility_floor_form():
    assert reversibility_floor(8, 2) == pytest.approx(1 - 8 / 16)


# --- witness ----------------------------------------------------------------


def test_hoeffding_example():
    assert hoeffding_shots(1 - (0.1 + 2**-4), 0.01) == 16


def test_witness_plan_levels():
    bell4 = tab("XXII", "ZZII", "IIXX", "IIZZ")
    cut = Bipartition([0, 2], 4)
    plan = witness_plan(bell4, [cut], eps=0.1, delta=0.01)
    assert plan.m_of_b == 2 and plan.threshold == 0.25
    assert plan.n_shots == hoeffding_shots(1 - 0.35, 0.01)
    with pytest.raises(InfeasiblePlan):
        witness_plan(bell4, [cut], eps=0.8)
    with pytest.raises(InfeasiblePlan):
        witness_plan(bell4, [Bipartition([0, 1], 4)])
    with pytest.raises(ValueError):
        witness_plan(bell4, [cut], delta=0)


def test_witness_m_equals_e_for_stabilizer():
    rng = np.random.default_rng(3)
    t = random_tableau(6, rng)
    cut = Bipartition.half(6)
    assert witness_plan(t, [cut], eps=0.0).m_of_b == stabilizer_entanglement(t, cut) or stabilizer_entanglement(t, cut) == 0


def test_witness_exact_state():
    t = tab("XX", "ZZ")
    res = witness_estimate(dense_from_tableau(t), t, 50, np.random.default_rng(0), 0.5)
    assert res.pi_hat == 1 and res.verdict == "entangled" and res.score < 0


def test_witness_maximally_mixed():
    t = random_tableau(3, np.random.default_rng(4))
    rho = depolarize(dense_from_tableau(t), 1.0)
    exact = projector_expectation(rho, t)
    assert exact == pytest.approx(2**-3)
    res = witness_estimate(rho, t, 4000, np.random.default_rng(5))
    # mean of +-1 outcomes: E[outcome] = tr(Pi rho) only through the identity term
    assert abs(res.pi_hat - exact) < 4 / math.sqrt(4000)


def test_witness_robustness_on_noisy_states():
    rng = np.random.default_rng(9)
    t = tab("XXII", "ZZII", "IIXX", "IIZZ")
    psi = dense_from_tableau(t)
    m = 2
    for q in np.linspace(0, 1, 11):
        rho = depolarize(psi, q)
        fid = float(np.real(np.vdot(psi.amps, rho.rho @ psi.amps)))
        if fid > 2**-m:
            assert projector_expectation(rho, t) > 2**-m
    assert rng is not None


def test_witness_shots_validation():
    with pytest.raises(ValueError):
        witness_estimate(DenseState.zero(1), StabTableau.zero_state(1), 0, np.random.default_rng(0))


# --- cooling ----------------------------------------------------------------


def test_cool_stabilizer():
    t = random_tableau(6, np.random.default_rng(2))
    r = entanglement_cool(t, Bipartition.half(6))
    assert r.ratio == 0 and r.post_e == 0


def test_cool_doped_dense():
    rng = np.random.default_rng(33)
    for _ in range(40):
        _, psi, t = doped_instance(8, 3, rng)
        if t.nu == 3:
            break
    assert t.nu >= 3
    cut = Bipartition.half(8)
    r = entanglement_cool(t, cut)
    out = simulate_dense(r.circuit, initial=psi)
    assert renyi_entropy_dense(out, cut, 1) == pytest.approx(0, abs=1e-9)
    assert len(r.remainder_sites) == t.nu
    assert set(r.remainder_sites) <= set(cut.a_sites) or set(r.remainder_sites) <= set(cut.b_sites)


def test_cool_nu_too_large():
    with pytest.raises(InfeasiblePlan):
        entanglement_cool(StabTableau(3, []), Bipartition([0], 3))
