"""Tests for the phased Pauli / Clifford algebra."""

import numpy as np
import pytest

from mbqcomm import dense
from mbqcomm.pauli import (
    CliffordMap,
    PauliError,
    PauliString,
    circuit_map,
    commutes,
    gate_map,
    multiply,
    random_clifford,
    random_pauli,
)


def test_single_qubit_products():
    X = PauliString.from_string("X")
    Z = PauliString.from_string("Z")
    assert str(X * X) == "+I"
    assert str(X * Z) == "-iY"
    assert str(Z * X) == "iY"


def test_tensor_factorization():
    # (X (x) Z) * (Z (x) Z) = (XZ) (x) (ZZ) = (-iY) (x) I
    p = PauliString.from_string("XZ") * PauliString.from_string("ZZ")
    assert str(p) == "-iYI"


def test_square_is_sign_only():
    rng = np.random.default_rng(7)
    for _ in range(200):
        p = random_pauli(5, rng)
        sq = p * p
        assert sq.x == 0 and sq.z == 0
        assert sq.phase in (0, 2)


def test_commutes_basics():
    X = PauliString.from_string("X")
    Z = PauliString.from_string("Z")
    assert commutes(X, X)
    assert not commutes(X, Z)
    # two anticommuting factors make the whole strings commute
    assert commutes(PauliString.from_string("XZ"), PauliString.from_string("ZX"))


def test_length_mismatch_raises():
    with pytest.raises(PauliError):
        multiply(PauliString.from_string("X"), PauliString.from_string("XX"))
    with pytest.raises(PauliError):
        commutes(PauliString.from_string("X"), PauliString.from_string("XX"))


def test_multiplication_matches_dense_matrices():
    rng = np.random.default_rng(11)
    for _ in range(60):
        p = random_pauli(3, rng)
        q = random_pauli(3, rng)
        lhs = dense.pauli_matrix(p * q)
        rhs = dense.pauli_matrix(p) @ dense.pauli_matrix(q)
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_associativity_bit_exact():
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        n = int(rng.integers(1, 7))
        p, q, r = (random_pauli(n, rng) for _ in range(3))
        assert (p * q) * r == p * (q * r)


def test_parse_and_format_roundtrip():
    for text in ["+XIZ", "-YY", "iXZ", "-iZZZ", "+I"]:
        p = PauliString.from_string(text)
        assert PauliString.from_string(str(p)) == p
    assert str(PauliString.from_string("Y")) == "+Y"
    with pytest.raises(PauliError):
        PauliString.from_string("XQ")


def test_conjugate_standard_gates():
    h = gate_map(1, "H", 0)
    assert str(h.conjugate(PauliString.from_string("X"))) == "+Z"
    cnot = gate_map(2, "CNOT", 0, 1)
    assert str(cnot.conjugate(PauliString.from_string("XI"))) == "+XX"
    cz = gate_map(2, "CZ", 0, 1)
    assert str(cz.conjugate(PauliString.from_string("XI"))) == "+XZ"


def test_conjugate_matches_dense_oracle():
    # oracle: conjugate via explicit 2-qubit matrices
    rng = np.random.default_rng(5)
    gates = [("H", 0), ("S", 1), ("CNOT", 0, 1), ("CZ", 1, 0), ("SQX", 0)]
    mats = {
        "H": dense.H,
        "S": dense.S,
        "SQX": (dense.I2 - 1j * dense.X) / np.sqrt(2),
    }
    for name, *qs in gates:
        c = gate_map(2, name, *qs)
        if name == "CNOT":
            u = dense.embed_unitary(2, dense.CNOT, qs)
        elif name == "CZ":
            u = dense.embed_unitary(2, dense.U_PG, qs)
        else:
            u = dense.embed_unitary(2, mats[name], qs)
        for _ in range(40):
            p = random_pauli(2, rng)
            lhs = dense.pauli_matrix(c.conjugate(p))
            rhs = u @ dense.pauli_matrix(p) @ u.conj().T
            assert np.allclose(lhs, rhs, atol=1e-12), name


def test_conjugate_preserves_commutation():
    rng = np.random.default_rng(13)
    for _ in range(300):
        n = int(rng.integers(1, 5))
        c = random_clifford(n, rng)
        p, q = random_pauli(n, rng), random_pauli(n, rng)
        assert commutes(p, q) == commutes(c.conjugate(p), c.conjugate(q))


def test_composition_matches_sequential_conjugation():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        c1 = random_clifford(n, rng)
        c2 = random_clifford(n, rng)
        p = random_pauli(n, rng)
        assert (c2 @ c1).conjugate(p) == c2.conjugate(c1.conjugate(p))


def test_inverse():
    rng = np.random.default_rng(19)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        c = random_clifford(n, rng)
        inv = c.inverse()
        p = random_pauli(n, rng)
        assert inv.conjugate(c.conjugate(p)) == p
        assert c.conjugate(inv.conjugate(p)) == p


def test_invalid_clifford_rejected():
    n = 1
    with pytest.raises(PauliError):
        CliffordMap.from_images(
            [PauliString.from_string("X")], [PauliString.from_string("X")]
        )


def test_circuit_map_order():
    # H then S on one qubit: X -> Z -> Z, Z -> X -> Y
    c = circuit_map(1, [("H", 0), ("S", 0)])
    assert str(c.conjugate(PauliString.from_string("X"))) == "+Z"
    assert str(c.conjugate(PauliString.from_string("Z"))) == "+Y"
