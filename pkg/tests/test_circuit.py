import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import circuit_dense, pauli_dense
from stabent.circuit import (
    Circuit,
    CliffordCircuit,
    Gate,
    MeasureZ,
    NonClifford,
    conjugate_pauli,
    parse_circuit,
    parse_clifford,
)
from stabent.pauli import Pauli

ONE = ["H", "S", "X", "Y", "Z"]
TWO = ["CNOT", "CZ", "SWAP"]


@st.composite
def cliffords(draw, n=None):
    n = draw(st.integers(1, 3)) if n is None else n
    c = CliffordCircuit(n)
    for _ in range(draw(st.integers(0, 12))):
        if n >= 2 and draw(st.booleans()):
            a, b = draw(st.permutations(range(n)))[:2]
            c.append(draw(st.sampled_from(TWO)), a, b)
        else:
            c.append(draw(st.sampled_from(ONE)), draw(st.integers(0, n - 1)))
    return c


def dense(p):
    return (1j ** p.phase) * pauli_dense(p.letters())


@given(cliffords(), st.data())
def test_conjugation_matches_dense(c, data):
    letters = data.draw(st.text("IXYZ", min_size=c.n, max_size=c.n))
    p = Pauli.parse(letters).with_phase(data.draw(st.sampled_from([0, 2])))
    u = circuit_dense(list(c), c.n)
    q = conjugate_pauli(p, c)
    assert np.allclose(u @ dense(p) @ u.conj().T, dense(q))


@given(cliffords())
def test_inverse(c):
    u = circuit_dense(list(c.then(c.inverse())), c.n)
    assert np.allclose(u / u[0, 0], np.eye(2**c.n))


@given(cliffords())
def test_text_roundtrip(c):
    again = parse_clifford(c.to_text(), c.n)
    assert [g.to_text() for g in again] == [g.to_text() for g in c]


def test_remap():
    c = CliffordCircuit(2).append("CNOT", 0, 1).append("H", 1)
    r = c.remap([3, 1], 4)
    assert [g.to_text() for g in r] == ["CNOT 3 1", "H 1"]


def test_parse_circuit_ops():
    text = "# comment\nn=5\nH 0\nCNOT 0 1\nT 2\nTDG 2\nRZ 0.7853981633974483 3\nHAAR 0 1\nM 4\n"
    c = parse_circuit(text)
    assert c.n == 5 and c.t_count == 4 and c.locality == 2 and c.has_measurements()
    assert isinstance(c.ops[-1], MeasureZ)
    assert c.ops[4].theta == pytest.approx(np.pi / 4)
    assert parse_circuit(c.to_text()).to_text() == c.to_text()


@pytest.mark.parametrize("bad", ["FOO 1", "H", "CNOT 0", "T 0 1", "RZ x 0", "M"])
def test_malformed(bad):
    with pytest.raises(ValueError):
        parse_circuit(bad)


def test_site_validation():
    with pytest.raises(ValueError):
        Circuit(2).append(Gate("H", (2,)))
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        parse_clifford("T 0", 1)


def test_nonclifford_diagonal_flag():
    assert NonClifford((0,), "T").diagonal
    assert NonClifford((0,), "RZ", theta=0.3).diagonal
    assert not NonClifford((0, 1), "HAAR").diagonal
