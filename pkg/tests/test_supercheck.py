"""Damaged parity checks on small tableau-built cluster states."""

import numpy as np
import pytest

from heraldtpc.supercheck import (
    TpcGraph,
    damaged_check_is_stabilizer,
    verify_supercheck_identity,
)


def test_no_missing_bond_is_identity_case():
    assert verify_supercheck_identity(2, None)


def test_every_single_missing_bond_l2():
    g = TpcGraph(2)
    for bond in range(len(g.edges())):
        assert verify_supercheck_identity(2, bond)


def test_sampled_missing_bonds_l3():
    g = TpcGraph(3)
    n_bonds = len(g.edges())
    rng = np.random.default_rng(0)
    for bond in rng.choice(n_bonds, size=12, replace=False):
        assert verify_supercheck_identity(3, int(bond))


def test_out_of_range_bond_rejected():
    g = TpcGraph(2)
    with pytest.raises((IndexError, ValueError)):
        verify_supercheck_identity(2, len(g.edges()) + 5)


def test_damaged_check_remains_stabilizer():
    rng = np.random.default_rng(1)
    g = TpcGraph(2)
    for bond in rng.choice(len(g.edges()), size=6, replace=False):
        assert damaged_check_is_stabilizer(2, int(bond), rng)
