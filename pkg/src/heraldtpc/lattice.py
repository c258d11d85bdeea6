"""Periodic 3D cluster lattice, loss/error sampling, and syndrome extraction.

Decoding happens per sublattice.  For the primal sublattice the relevant
structure is the cubic cell graph: vertices are the L^3 unit cells and each
face qubit is the edge between the two cells sharing it, so a qubit is
indexed as (cell, axis) -> 3*cell + axis.  The dual sublattice is isomorphic
by construction; bond bookkeeping keeps both endpoints so either side can be
simulated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ClusterLattice:
    L: int
    n_cells: int
    n_qubits: int  # per sublattice (3 L^3)
    n_bonds: int  # 12 L^3
    edge_cells: np.ndarray  # (n_qubits, 2) cells joined by each face qubit
    cell_edges: np.ndarray  # (n_cells, 6) incident face qubits per cell
    edge_axis: np.ndarray  # (n_qubits,) direction of each face qubit
    edge_base: np.ndarray  # (n_qubits, 3) coordinates of the base cell
    bond_primal: np.ndarray  # (n_bonds,) primal face qubit of each bond
    bond_dual: np.ndarray  # (n_bonds,) dual face qubit of each bond


def build_lattice(L: int) -> ClusterLattice:
    """Deterministic periodic lattice; raises for L < 2."""
    if L < 2:
        raise ValueError("L must be at least 2")
    n_c = L**3
    n_q = 3 * n_c

    coords = np.array(np.unravel_index(np.arange(n_c), (L, L, L))).T  # (n_c, 3)

    def cell_id(c):
        return (c[..., 0] % L) * L * L + (c[..., 1] % L) * L + (c[..., 2] % L)

    edge_cells = np.zeros((n_q, 2), dtype=np.int32)
    edge_axis = np.zeros(n_q, dtype=np.int8)
    edge_base = np.zeros((n_q, 3), dtype=np.int32)
    for axis in range(3):
        e = 3 * np.arange(n_c) + axis
        shifted = coords.copy()
        shifted[:, axis] += 1
        edge_cells[e, 0] = np.arange(n_c)
        edge_cells[e, 1] = cell_id(shifted)
        edge_axis[e] = axis
        edge_base[e] = coords

    cell_edges = np.zeros((n_c, 6), dtype=np.int32)
    for axis in range(3):
        cell_edges[:, axis] = 3 * np.arange(n_c) + axis
        shifted = coords.copy()
        shifted[:, axis] -= 1
        cell_edges[:, 3 + axis] = 3 * cell_id(shifted) + axis

    # bonds, 4 per primal face qubit, in doubled coordinates
    m = 2 * L
    n_b = 4 * n_q
    bond_primal = np.zeros(n_b, dtype=np.int32)
    bond_dual = np.zeros(n_b, dtype=np.int32)
    k = 0
    for e in range(n_q):
        axis = int(edge_axis[e])
        site = 2 * edge_base[e]
        site[axis] += 1  # one odd coordinate
        for nu in range(3):
            if nu == axis:
                continue
            for sign in (+1, -1):
                s = site.copy()
                s[nu] = (s[nu] + sign) % m
                # s has two odd coordinates; its even axis locates the dual edge
                even_axis = next(a for a in range(3) if s[a] % 2 == 0)
                d = s.copy()
                d[even_axis] -= 1  # all odd: dual cell center 2*dc + (1,1,1)
                dc = ((d - 1) % m) // 2
                bond_primal[k] = e
                bond_dual[k] = 3 * (dc[0] * L * L + dc[1] * L + dc[2]) + even_axis
                k += 1
    assert k == n_b

    return ClusterLattice(
        L=L,
        n_cells=n_c,
        n_qubits=n_q,
        n_bonds=n_b,
        edge_cells=edge_cells,
        cell_edges=cell_edges,
        edge_axis=edge_axis,
        edge_base=edge_base,
        bond_primal=bond_primal,
        bond_dual=bond_dual,
    )


@dataclass
class LossMask:
    missing_bonds: np.ndarray  # bool over bonds (empty in direct-loss mode)
    lost_primal: np.ndarray  # bool over primal face qubits
    lost_dual: np.ndarray  # bool over dual face qubits


@dataclass
class ErrorMask:
    z_errors: np.ndarray  # bool per qubit of the simulated sublattice


@dataclass
class Syndrome:
    roots: np.ndarray  # supercheck root per cell
    defect_roots: np.ndarray  # roots with odd parity


def sample_bonds(lat: ClusterLattice, bond_missing_prob: float, rng) -> LossMask:
    """i.i.d. Bernoulli bond loss; both endpoints of a missing bond are lost."""
    if not 0.0 <= bond_missing_prob <= 1.0:
        raise ValueError("bond_missing_prob must be in [0, 1]")
    missing = rng.random(lat.n_bonds) < bond_missing_prob
    lost_p = np.zeros(lat.n_qubits, dtype=bool)
    lost_d = np.zeros(lat.n_qubits, dtype=bool)
    lost_p[lat.bond_primal[missing]] = True
    lost_d[lat.bond_dual[missing]] = True
    return LossMask(missing, lost_p, lost_d)


def inject_losses(lat: ClusterLattice, qubit_loss_prob: float, rng) -> LossMask:
    """Direct i.i.d. qubit loss on the primal sublattice (validation mode)."""
    if not 0.0 <= qubit_loss_prob <= 1.0:
        raise ValueError("qubit_loss_prob must be in [0, 1]")
    lost_p = rng.random(lat.n_qubits) < qubit_loss_prob
    return LossMask(
        np.zeros(lat.n_bonds, dtype=bool), lost_p, np.zeros(lat.n_qubits, dtype=bool)
    )


def sample_errors(
    lat: ClusterLattice, loss: LossMask, p_err: float, rng, sublattice: str = "primal"
) -> ErrorMask:
    """Z errors: rate p_err on intact qubits, 1/2 on lost ones (erasure)."""
    if not 0.0 <= p_err <= 0.5:
        raise ValueError("p_err must be in [0, 0.5]")
    lost = loss.lost_primal if sublattice == "primal" else loss.lost_dual
    u = rng.random(lat.n_qubits)
    z = np.where(lost, u < 0.5, u < p_err)
    return ErrorMask(z)


def cell_parities(lat: ClusterLattice, z: np.ndarray) -> np.ndarray:
    """Ideal parity-check value (error parity) for every unit cell."""
    return z[lat.cell_edges].sum(axis=1) % 2


def extract_syndrome(
    lat: ClusterLattice,
    loss: LossMask,
    errors: ErrorMask,
    roots: np.ndarray,
    sublattice: str = "primal",
) -> Syndrome:
    """Supercheck defects: parity of errors on intact faces of merged cells.

    ``roots`` is the supercheck partition from the decoder; it must merge the
    two cells adjacent to every lost qubit, otherwise the supercheck would
    still touch a lost qubit and the syndrome would not be observable.
    """
    lost = loss.lost_primal if sublattice == "primal" else loss.lost_dual
    bad = lost & (roots[lat.edge_cells[:, 0]] != roots[lat.edge_cells[:, 1]])
    if bad.any():
        raise ValueError("supercheck partition does not cover all lost qubits")
    z_intact = errors.z_errors & ~lost
    parity = cell_parities(lat, z_intact)
    acc = np.zeros(lat.n_cells, dtype=np.int64)
    np.add.at(acc, roots, parity)
    defect_roots = np.flatnonzero(acc % 2)
    return Syndrome(roots=roots, defect_roots=defect_roots)
