"""Periodic 3D lattice geometry, loss sampling, and syndrome extraction."""

import numpy as np
import pytest

from heraldtpc.lattice import (
    build_lattice,
    cell_parities,
    inject_losses,
    sample_bonds,
    sample_errors,
)


def test_counts_scale_with_volume():
    for L in (2, 3, 4):
        lat = build_lattice(L)
        assert lat.n_cells == L**3
        assert lat.n_qubits == 3 * L**3
        assert lat.n_bonds == 12 * L**3


def test_small_l_rejected():
    with pytest.raises(ValueError):
        build_lattice(1)


def test_face_qubit_incidence():
    lat = build_lattice(3)
    # every face qubit borders exactly two cells, every cell has six faces
    counts = np.zeros(lat.n_qubits, dtype=int)
    for faces in lat.cell_edges:
        counts[faces] += 1
    assert (counts == 2).all()
    assert lat.cell_edges.shape == (lat.n_cells, 6)
    for q in range(lat.n_qubits):
        a, b = lat.edge_cells[q]
        assert q in lat.cell_edges[a] and q in lat.cell_edges[b]


def test_bond_loss_hits_both_sublattices():
    lat = build_lattice(3)
    rng = np.random.default_rng(0)
    loss = sample_bonds(lat, 0.2, rng)
    assert loss.lost_primal[lat.bond_primal[loss.missing_bonds]].all()
    assert loss.lost_dual[lat.bond_dual[loss.missing_bonds]].all()


def test_bond_loss_rate_matches_per_qubit_formula():
    # each primal qubit touches 4 bonds: loss rate 1 - (1-p)^4
    lat = build_lattice(6)
    rng = np.random.default_rng(1)
    p = 0.01
    hits = total = 0
    for _ in range(160):
        loss = sample_bonds(lat, p, rng)
        hits += int(loss.lost_primal.sum())
        total += lat.n_qubits
    expected = 1 - (1 - p) ** 4
    sigma = np.sqrt(expected * (1 - expected) / total)
    assert abs(hits / total - expected) < 3 * sigma


def test_direct_loss_rate():
    lat = build_lattice(6)
    rng = np.random.default_rng(2)
    loss = inject_losses(lat, 0.3, rng)
    rate = loss.lost_primal.mean()
    sigma = np.sqrt(0.3 * 0.7 / lat.n_qubits)
    assert abs(rate - 0.3) < 4 * sigma
    assert not loss.missing_bonds.any()


def test_lost_qubits_flip_half_the_time():
    lat = build_lattice(5)
    rng = np.random.default_rng(3)
    loss = inject_losses(lat, 0.5, rng)
    flips = np.zeros(lat.n_qubits)
    n_rep = 400
    for _ in range(n_rep):
        err = sample_errors(lat, loss, 0.0, rng)
        flips += err.z_errors
    lost_rate = flips[loss.lost_primal].mean() / n_rep
    total_lost = int(loss.lost_primal.sum()) * n_rep
    sigma = np.sqrt(0.25 / total_lost)
    assert abs(lost_rate - 0.5) < 3 * sigma
    assert flips[~loss.lost_primal].sum() == 0  # p_err = 0 on intact qubits


def test_single_error_flags_its_two_cells():
    lat = build_lattice(4)
    z = np.zeros(lat.n_qubits, dtype=bool)
    q = 17
    z[q] = True
    par = cell_parities(lat, z)
    flagged = np.flatnonzero(par)
    assert sorted(flagged) == sorted(lat.edge_cells[q])


def test_error_parity_is_linear():
    lat = build_lattice(3)
    rng = np.random.default_rng(4)
    a = rng.random(lat.n_qubits) < 0.1
    b = rng.random(lat.n_qubits) < 0.1
    pa, pb, pab = (cell_parities(lat, v) for v in (a, b, a ^ b))
    assert ((pa + pb) % 2 == pab).all()
