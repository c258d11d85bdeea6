"""Supercheck formation, exact matching, and end-to-end decoding."""

import numpy as np
import pytest

from heraldtpc.decoder import (
    brute_force_matching,
    build_defect_graph,
    decode_run,
    form_superchecks,
    mwpm,
)
from heraldtpc.lattice import (
    build_lattice,
    extract_syndrome,
    inject_losses,
    sample_bonds,
    sample_errors,
)


def test_no_loss_superchecks_are_single_cells():
    lat = build_lattice(3)
    rng = np.random.default_rng(0)
    loss = inject_losses(lat, 0.0, rng)
    sg = form_superchecks(lat, loss)
    assert sg.n_clusters() == lat.n_cells
    assert not sg.lost.any()


def test_losing_one_qubit_merges_its_two_cells():
    lat = build_lattice(3)
    rng = np.random.default_rng(1)
    loss = inject_losses(lat, 0.0, rng)
    loss.lost_primal[5] = True
    sg = form_superchecks(lat, loss)
    assert sg.n_clusters() == lat.n_cells - 1
    a, b = lat.edge_cells[5]
    assert sg.roots[a] == sg.roots[b]


def test_intact_qubit_borders_two_clusters_or_is_internal():
    lat = build_lattice(3)
    rng = np.random.default_rng(2)
    loss = inject_losses(lat, 0.15, rng)
    sg = form_superchecks(lat, loss)
    for q in range(lat.n_qubits):
        if loss.lost_primal[q]:
            continue
        a, b = sg.roots[lat.edge_cells[q]]
        assert a in sg.cluster_cells and b in sg.cluster_cells


def test_mwpm_matches_brute_force_weight():
    lat = build_lattice(4)
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 200:
        loss = inject_losses(lat, 0.1, rng)
        sg = form_superchecks(lat, loss)
        errors = sample_errors(lat, loss, 0.02, rng)
        syndrome = extract_syndrome(lat, loss, errors, sg.roots, "primal")
        dg = build_defect_graph(lat, sg, syndrome)
        if not 0 < len(dg.defect_roots) <= 8:
            continue
        assert mwpm(dg).total_weight == brute_force_matching(dg).total_weight
        checked += 1


def test_decode_perfect_run_succeeds():
    lat = build_lattice(4)
    rng = np.random.default_rng(4)
    for _ in range(5):
        assert decode_run(lat, rng, 0.0, p_loss=0.0)


def test_decode_run_argument_validation():
    lat = build_lattice(2)
    rng = np.random.default_rng(5)
    with pytest.raises(ValueError):
        decode_run(lat, rng, 0.01)
    with pytest.raises(ValueError):
        decode_run(lat, rng, 0.01, p_bond=0.1, p_loss=0.1)


def test_low_loss_mostly_correctable():
    # far below the loss threshold failures should be rare
    lat = build_lattice(6)
    rng = np.random.default_rng(6)
    fails = sum(
        not decode_run(lat, rng, 0.0, p_loss=0.05) for _ in range(200)
    )
    assert fails <= 4


def test_low_error_mostly_correctable():
    lat = build_lattice(6)
    rng = np.random.default_rng(7)
    fails = sum(
        not decode_run(lat, rng, 0.01, p_bond=0.0) for _ in range(100)
    )
    assert fails <= 4


def test_bond_channel_decodes_on_both_sublattices():
    lat = build_lattice(4)
    rng = np.random.default_rng(8)
    for sub in ("primal", "dual"):
        ok = sum(
            decode_run(lat, rng, 0.005, p_bond=0.02, sublattice=sub)
            for _ in range(50)
        )
        assert ok >= 45
