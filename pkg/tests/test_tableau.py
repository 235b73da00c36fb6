from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import all_cuts, random_cut
from oracles import group_elements, pauli_dense
from stabent.circuit import conjugate_pauli
from stabent.oracle import dense_from_tableau, expectation, renyi_entropy_dense
from stabent.pauli import Pauli, commutes, symplectic_form
from stabent.tableau import (
    Bipartition,
    StabTableau,
    add_ancilla,
    apply_circuit,
    apply_gate,
    canonical_pairing,
    discard,
    local_count,
    local_generators,
    measure_z,
    nullity_distillation,
    parse_parts,
    random_tableau,
    stabilizer_completion,
    stabilizer_entanglement,
)

seeds = st.integers(0, 2**32 - 1)


def tab_from(seed, n_max=6, partial=True):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    size = int(rng.integers(0, n + 1)) if partial else n
    return rng, random_tableau(n, rng, size=size)


def test_zero_state_and_text():
    t = StabTableau.zero_state(3)
    assert [str(g) for g in t.gens] == ["+ZII", "+IZI", "+IIZ"]
    assert StabTableau.parse(t.to_text()).same_group(t)
    with pytest.raises(ValueError):
        StabTableau.parse("+ZZ")


def test_validation_errors():
    with pytest.raises(ValueError, match="anticommute"):
        StabTableau(2, [Pauli.parse("XI"), Pauli.parse("ZI")])
    with pytest.raises(ValueError, match="independent"):
        StabTableau(2, [Pauli.parse("ZZ"), Pauli.parse("ZZ")])
    with pytest.raises(ValueError):
        StabTableau(1, [Pauli.parse("iZ")])


def test_bipartition_parse():
    assert Bipartition.parse("half", 4).a_sites == [0, 1]
    assert Bipartition.parse("0,2|rest", 4).b_sites == [1, 3]
    assert Bipartition.parse("0|1,2,3", 4).n_a == 1
    for bad in ["0,1", "0|0,1,2,3", "0|1", "5|rest"]:
        with pytest.raises(ValueError):
            Bipartition.parse(bad, 4)
    masks = parse_parts("0,1|2|3", 4)
    assert [m.sum() for m in masks] == [2, 1, 1]
    with pytest.raises(ValueError):
        parse_parts("0|1", 3)


@given(seeds)
def test_random_tableau_is_stabilized_dense(seed):
    _, t = tab_from(seed, partial=False)
    psi = dense_from_tableau(t)
    for g in t.gens:
        assert expectation(psi, g) == pytest.approx(1, abs=1e-10)


@given(seeds)
def test_entanglement_matches_dense_entropy(seed):
    """For stabilizer states E equals every Renyi entropy."""
    rng, t = tab_from(seed, partial=False)
    cut = random_cut(t.n, rng) if t.n > 1 else None
    if cut is None:
        return
    psi = dense_from_tableau(t)
    e = float(stabilizer_entanglement(t, cut))
    for a in (0.5, 1, 2, np.inf):
        assert renyi_entropy_dense(psi, cut, a) == pytest.approx(e, abs=1e-9)


@given(seeds)
def test_entanglement_symmetric_and_bounded(seed):
    rng, t = tab_from(seed)
    if t.n < 2:
        return
    cut = random_cut(t.n, rng)
    e = stabilizer_entanglement(t, cut)
    assert e == stabilizer_entanglement(t, cut.swapped())
    assert 0 <= e <= min(cut.n_a, cut.n_b)
    assert (2 * e).denominator == 1


@given(seeds)
def test_local_generators_are_local_and_in_group(seed):
    rng, t = tab_from(seed)
    if t.n < 2:
        return
    cut = random_cut(t.n, rng)
    for side, mask in (("A", cut.a_mask), ("B", cut.b_mask)):
        gens = local_generators(t, cut, side)
        assert len(gens) == local_count(t, mask)
        for g in gens:
            assert not (g.x[~mask].any() or g.z[~mask].any())
            assert t.find(g) == g


def test_local_count_bruteforce_ghz():
    t = StabTableau(3, [Pauli.parse(s) for s in ["XXX", "ZZI", "IZZ"]])
    elements = group_elements(["XXX", "ZZI", "IZZ"], 3)
    # count elements trivial on qubit 0 by dense inspection
    z = pauli_dense("ZII")
    trivial = sum(1 for m in elements if np.allclose(m @ z, z @ m) and np.allclose(m @ pauli_dense("XII"), pauli_dense("XII") @ m))
    assert 2 ** local_count(t, [1, 2]) == trivial == 2


@given(seeds)
def test_gate_then_inverse(seed):
    rng, t = tab_from(seed, partial=False)
    u = nullity_distillation(t)
    assert apply_circuit(apply_circuit(t, u), u.inverse()).same_group(t)


@given(seeds)
def test_nullity_distillation_to_z(seed):
    rng, t = tab_from(seed)
    u = nullity_distillation(t)
    out = apply_circuit(t, u)
    for i, g in enumerate(out.gens):
        assert g == Pauli.single(t.n, "Z", i)


@given(seeds)
def test_completion_contains_and_is_full(seed):
    rng, t = tab_from(seed)
    full = stabilizer_completion(t)
    assert full.size == t.n
    for g in t.gens:
        assert full.find(g) == g


def test_apply_gate_bell():
    t = apply_gate(apply_gate(StabTableau.zero_state(2), "H", [0]), "CNOT", [0, 1])
    assert t.same_group(StabTableau(2, [Pauli.parse("XX"), Pauli.parse("ZZ")]))
    with pytest.raises(ValueError):
        apply_gate(t, "H", [5])


@given(seeds)
def test_measure_z_matches_dense_projection(seed):
    rng, t = tab_from(seed, partial=False)
    site = int(rng.integers(t.n))
    psi = dense_from_tableau(t)
    zexp = expectation(psi, Pauli.single(t.n, "Z", site))
    after, m, random = measure_z(t, site, rng)
    assert random == (abs(zexp) < 0.5)
    if not random:
        assert m == round(zexp)
    # the post-measurement state is stabilized by the new tableau
    proj = (np.eye(2**t.n) + m * pauli_dense("I" * site + "Z" + "I" * (t.n - site - 1))) / 2
    phi = proj @ psi.amps
    phi /= np.linalg.norm(phi)
    for g in after.gens:
        gm = (1j ** g.phase) * pauli_dense(g.letters())
        assert np.allclose(gm @ phi, phi)


def test_measure_forced_outcome():
    t = apply_gate(StabTableau.zero_state(1), "H", [0])
    out, m, random = measure_z(t, 0, outcome=-1)
    assert random and m == -1 and out.gens[0] == Pauli.parse("-Z")
    with pytest.raises(ValueError):
        measure_z(t, 0)


def test_measure_mixed_tableau_adds_generator():
    t = StabTableau(2, [Pauli.parse("XX")])
    out, m, random = measure_z(t, 0, outcome=1)
    assert random and out.size == 1
    t2 = StabTableau(2, [Pauli.parse("ZZ")])
    out, m, random = measure_z(t2, 0, outcome=1)
    assert random and out.size == 2


def test_discard_and_ancilla():
    bell_pair = StabTableau(3, [Pauli.parse(s) for s in ["XXI", "ZZI", "IIZ"]])
    red = discard(bell_pair, [1])
    assert red.n == 2 and [str(g) for g in red.gens] == ["+IZ"]
    grown = add_ancilla(red, 0)
    assert grown.n == 3 and grown.gens[-1] == Pauli.parse("ZII")


@given(seeds)
def test_canonical_pairing_structure(seed):
    rng, t = tab_from(seed)
    if t.n < 2:
        return
    cut = random_cut(t.n, rng)
    split = canonical_pairing(t, cut)
    e = stabilizer_entanglement(t, cut)
    assert len(split.s_a) + len(split.s_b) + 2 * split.m + len(split.unpaired) == t.size
    assert split.m <= e
    a = cut.a_mask
    for i, (g, h) in enumerate(split.pairs):
        ga, ha = (Pauli(p.x & a, p.z & a) for p in (g, h))
        assert symplectic_form(ga, ha) == 1
        for j, (g2, h2) in enumerate(split.pairs):
            if i != j:
                for p, q in ((g, g2), (g, h2), (h, g2), (h, h2)):
                    assert symplectic_form(Pauli(p.x & a, p.z & a), Pauli(q.x & a, q.z & a)) == 0
    # for stabilizer states |S| = n pairs up completely
    if t.size == t.n:
        assert split.m == e and not split.unpaired


def test_entanglement_all_cuts_ghz4():
    t = apply_circuit(
        StabTableau.zero_state(4),
        nullity_distillation(StabTableau(4, [Pauli.parse(s) for s in ["XXXX", "ZZII", "IZZI", "IIZZ"]])).inverse(),
    )
    for cut in all_cuts(4):
        assert stabilizer_entanglement(t, cut) == Fraction(1)
