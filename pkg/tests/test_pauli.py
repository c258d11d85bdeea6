"""Pauli operator algebra: products, phases, commutation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heraldtpc.pauli import DimensionError, PauliOperator, commutes, pauli_multiply


def random_pauli(rng, n):
    return PauliOperator(
        rng.integers(0, 2, n).astype(bool),
        rng.integers(0, 2, n).astype(bool),
        int(rng.integers(0, 4)),
    )


def test_single_qubit_products_fix_phase_convention():
    x = PauliOperator.from_label("X")
    y = PauliOperator.from_label("Y")
    z = PauliOperator.from_label("Z")
    assert pauli_multiply(x, z).to_label() == "-iY"
    assert pauli_multiply(z, x).to_label() == "iY"
    assert pauli_multiply(x, y).to_label() == "iZ"
    assert pauli_multiply(y, x).to_label() == "-iZ"
    assert pauli_multiply(y, z).to_label() == "iX"
    for p in (x, y, z):
        assert pauli_multiply(p, p).is_identity()


def test_label_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(300):
        p = random_pauli(rng, int(rng.integers(1, 17)))
        assert PauliOperator.from_label(p.to_label()) == p


def test_identity_and_single_constructors():
    ident = PauliOperator.identity(5)
    assert ident.is_identity() and ident.weight() == 0
    sx = PauliOperator.single(4, 2, "X")
    assert sx.to_label() == "IIXI"
    assert list(sx.support()) == [2]


def test_dimension_mismatch_raises():
    a = PauliOperator.identity(3)
    b = PauliOperator.identity(4)
    with pytest.raises(DimensionError):
        pauli_multiply(a, b)


@given(st.integers(0, 2**32 - 1), st.integers(1, 16))
@settings(max_examples=200, deadline=None)
def test_associativity_random_triples(seed, n):
    rng = np.random.default_rng(seed)
    a, b, c = (random_pauli(rng, n) for _ in range(3))
    assert pauli_multiply(pauli_multiply(a, b), c) == pauli_multiply(
        a, pauli_multiply(b, c)
    )


def test_commutes_matches_symplectic_product():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        n = int(rng.integers(1, 9))
        a, b = random_pauli(rng, n), random_pauli(rng, n)
        sym = int(np.sum(a.x & b.z) + np.sum(a.z & b.x)) % 2
        assert commutes(a, b) == (sym == 0)


def test_product_order_differs_only_when_anticommuting():
    rng = np.random.default_rng(2)
    for _ in range(500):
        n = int(rng.integers(1, 9))
        a, b = random_pauli(rng, n), random_pauli(rng, n)
        assert (pauli_multiply(a, b) == pauli_multiply(b, a)) == commutes(a, b)
