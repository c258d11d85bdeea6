"""Parity-check algebra on small 3D cluster lattices with a missing bond.

The cluster graph lives on a 3-torus in doubled coordinates: cell centers at
even-even-even sites, face qubits of the primal sublattice at sites with
exactly one odd coordinate, face qubits of the dual sublattice at sites with
exactly two odd coordinates.  Every bond joins one primal and one dual face
qubit; every face qubit has four bonds.
"""

from __future__ import annotations

import itertools

import numpy as np

from .pauli import PauliOperator
from .tableau import StabilizerTableau

_AXES = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


class TpcGraph:
    """Both sublattices of an L^3 (unit cells) cluster lattice, periodic."""

    def __init__(self, L: int):
        if L < 2:
            raise ValueError("L must be at least 2")
        self.L = L
        self.site_to_qubit: dict[tuple, int] = {}
        self.primal: list[tuple] = []  # sites with one odd coordinate
        self.dual: list[tuple] = []  # sites with two odd coordinates
        m = 2 * L
        for site in itertools.product(range(m), repeat=3):
            odd = sum(c % 2 for c in site)
            if odd == 1:
                self.site_to_qubit[site] = len(self.primal)
                self.primal.append(site)
        for site in itertools.product(range(m), repeat=3):
            if sum(c % 2 for c in site) == 2:
                self.site_to_qubit[site] = len(self.primal) + len(self.dual)
                self.dual.append(site)
        self.n = len(self.primal) + len(self.dual)
        # bonds: enumerate from the primal side, 4 per primal qubit
        self.bonds: list[tuple[int, int]] = []
        for pq, site in enumerate(self.primal):
            odd_axis = next(a for a in range(3) if site[a] % 2 == 1)
            for axis in range(3):
                if axis == odd_axis:
                    continue
                for sign in (+1, -1):
                    nb = self._shift(site, axis, sign)
                    self.bonds.append((pq, self.site_to_qubit[nb]))

    def _shift(self, site, axis, sign):
        m = 2 * self.L
        s = list(site)
        s[axis] = (s[axis] + sign) % m
        return tuple(s)

    def edges(self, missing_bond: int | None = None):
        """All cluster bonds, optionally with one removed."""
        if missing_bond is None:
            return list(self.bonds)
        if not (0 <= missing_bond < len(self.bonds)):
            raise IndexError(f"bond {missing_bond} out of range")
        return [b for i, b in enumerate(self.bonds) if i != missing_bond]

    def adjacency(self, missing_bond: int | None = None):
        adj = [set() for _ in range(self.n)]
        for a, b in self.edges(missing_bond):
            adj[a].add(b)
            adj[b].add(a)
        return adj

    # -- cells -----------------------------------------------------------

    def primal_cells(self):
        return list(itertools.product(range(self.L), repeat=3))

    def cell_faces(self, cell, sublattice: str):
        """The 6 face-qubit ids of a primal or dual unit cell."""
        x, y, z = cell
        if sublattice == "primal":
            center = (2 * x, 2 * y, 2 * z)
        else:
            center = (2 * x + 1, 2 * y + 1, 2 * z + 1)
        faces = []
        for axis in range(3):
            for sign in (+1, -1):
                faces.append(self.site_to_qubit[self._shift(center, axis, sign)])
        return faces

    def cells_of_qubit(self, qubit: int):
        """The two unit cells (of the qubit's own sublattice) sharing it."""
        if qubit < len(self.primal):
            site = self.primal[qubit]
            sub = "primal"
            offset = 0
        else:
            site = self.dual[qubit - len(self.primal)]
            sub = "dual"
            offset = 1
        axis = next(a for a in range(3) if site[a] % 2 != offset % 2)
        cells = []
        for sign in (+1, -1):
            c = self._shift(site, axis, sign)
            cells.append(tuple(((v - offset) % (2 * self.L)) // 2 for v in c))
        return sub, cells


def stabilizer_product(graph: TpcGraph, adj, qubits) -> PauliOperator:
    """Product of graph-state generators K_q = X_q prod_{v in N(q)} Z_v."""
    p = PauliOperator.identity(graph.n)
    for q in qubits:
        p.x[q] ^= True
        for v in adj[q]:
            p.z[v] ^= True
    return p


def verify_supercheck_identity(L: int, missing_bond: int | None) -> bool:
    """Check the damaged-check and supercheck identities for one bond.

    With no bond missing, both cell checks of every qubit reduce to plain
    X-products.  With bond (i, j) missing, each of i's cell checks must equal
    the ideal X-product times Z on j (and symmetrically for j), and the
    product of the two damaged checks per qubit must have no support on
    either endpoint.
    """
    graph = TpcGraph(L)
    adj = graph.adjacency(missing_bond)

    if missing_bond is None:
        for cell in graph.primal_cells():
            for sub in ("primal", "dual"):
                faces = graph.cell_faces(cell, sub)
                if stabilizer_product(graph, adj, faces) != _x_product(graph, faces):
                    return False
        return True

    i, j = graph.bonds[missing_bond]
    for endpoint, other in ((i, j), (j, i)):
        sub, cells = graph.cells_of_qubit(endpoint)
        damaged = []
        for cell in cells:
            faces = graph.cell_faces(cell, sub)
            check = stabilizer_product(graph, adj, faces)
            expected = _x_product(graph, faces)
            expected.z[other] ^= True
            if check != expected:
                return False
            damaged.append(check)
        super_check = damaged[0] * damaged[1]
        if super_check.x[endpoint] or super_check.z[endpoint]:
            return False
        if super_check.x[other] or super_check.z[other]:
            return False
    return True


def _x_product(graph: TpcGraph, faces) -> PauliOperator:
    p = PauliOperator.identity(graph.n)
    for f in faces:
        p.x[f] ^= True
    return p


def damaged_check_is_stabilizer(L: int, missing_bond: int, rng) -> bool:
    """Tableau oracle: damaged checks stabilize the damaged cluster state."""
    graph = TpcGraph(L)
    adj = graph.adjacency(missing_bond)
    t = StabilizerTableau.graph_state(graph.n, graph.edges(missing_bond))
    i, j = graph.bonds[missing_bond]
    for endpoint in (i, j):
        sub, cells = graph.cells_of_qubit(endpoint)
        for cell in cells:
            check = stabilizer_product(graph, adj, graph.cell_faces(cell, sub))
            if t.measure_pauli(check, rng) != +1:
                return False
    return True
