"""Supercheck formation, defect matching, correction, and homology test.

Lost qubits are zero-weight: the two cells sharing a lost qubit merge into
one supercheck cluster, so correction paths traverse merged regions for
free.  After applying the matched correction, residual error parity left
inside clusters (from the random errors carried by lost qubits) is cleaned
up along the clusters' own lost-qubit spanning forests, which makes the
residual a genuine cycle whose winding parities decide logical success.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .lattice import (
    ClusterLattice,
    ErrorMask,
    LossMask,
    Syndrome,
    cell_parities,
    extract_syndrome,
    inject_losses,
    sample_bonds,
    sample_errors,
)


class MatchingParityError(ValueError):
    """Odd defect count: indicates an upstream bug."""


class DefectGraphError(RuntimeError):
    """A defect pair is unreachable (integrity failure)."""


@dataclass
class SupercheckGraph:
    roots: np.ndarray  # cluster root per cell
    cluster_cells: dict  # root -> list of member cells
    merge_edges: dict  # root -> list of lost qubits forming a spanning forest
    intact_edges: np.ndarray  # qubit ids of intact faces
    lost: np.ndarray  # bool per qubit

    def n_clusters(self) -> int:
        return len(self.cluster_cells)


@dataclass
class Matching:
    pairs: list  # list of (defect_index, defect_index) tuples
    total_weight: float


@dataclass
class LogicalOutcome:
    h: tuple  # winding parities along the three torus directions

    @property
    def success(self) -> bool:
        return self.h == (0, 0, 0)


@dataclass
class DefectGraph:
    """Pairwise cluster distances plus the data needed to realize paths."""

    defect_roots: np.ndarray
    weights: np.ndarray  # (d, d) symmetric integer distances
    dist: np.ndarray  # (d, n_cells) distances from each defect cluster
    predecessors: np.ndarray  # (d, n_cells) predecessor cells
    cross_edge: dict  # (cell_u, cell_v) -> qubit id used between clusters


def form_superchecks(lat: ClusterLattice, loss: LossMask, sublattice: str = "primal") -> SupercheckGraph:
    """Union-find merge of the two cells adjacent to every lost qubit."""
    lost = loss.lost_primal if sublattice == "primal" else loss.lost_dual
    parent = np.arange(lat.n_cells, dtype=np.int64)

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    merge_edges: dict[int, list] = {}
    lost_ids = np.flatnonzero(lost)
    spanning: list[tuple[int, int]] = []  # (qubit, kept for forest)
    for e in lost_ids:
        a, b = lat.edge_cells[e]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
            spanning.append(e)
    roots = np.array([find(c) for c in range(lat.n_cells)], dtype=np.int64)
    cluster_cells: dict[int, list] = {}
    for c in range(lat.n_cells):
        cluster_cells.setdefault(int(roots[c]), []).append(c)
    for e in spanning:
        merge_edges.setdefault(int(roots[lat.edge_cells[e, 0]]), []).append(int(e))
    return SupercheckGraph(
        roots=roots,
        cluster_cells=cluster_cells,
        merge_edges=merge_edges,
        intact_edges=np.flatnonzero(~lost),
        lost=lost,
    )


def build_defect_graph(lat: ClusterLattice, sg: SupercheckGraph, syndrome: Syndrome) -> DefectGraph:
    """Shortest cluster-to-cluster distances, one intact qubit per unit weight.

    Runs Dijkstra on the cell graph where lost qubits cost 0 and intact ones
    cost 1; this equals shortest paths in the contracted cluster-adjacency
    graph while keeping cell-level predecessors for path realization.
    """
    defects = syndrome.defect_roots
    d = len(defects)
    if d == 0:
        empty = np.zeros((0, 0))
        return DefectGraph(defects, empty, empty, empty, {})
    u = lat.edge_cells[:, 0]
    v = lat.edge_cells[:, 1]
    # within-cluster moves are free, so Dijkstra runs on the contracted
    # cluster graph (nodes = cluster roots) with unit edge weights; parallel
    # edges between the same cluster pair are collapsed to weight 1
    ru = sg.roots[u]
    rv = sg.roots[v]
    keep = (~sg.lost) & (ru != rv)
    lo = np.minimum(ru[keep], rv[keep])
    hi = np.maximum(ru[keep], rv[keep])
    uniq = np.unique(np.stack([lo, hi], axis=1), axis=0)
    n = lat.n_cells
    graph = coo_matrix(
        (np.ones(len(uniq)), (uniq[:, 0], uniq[:, 1])), shape=(n, n)
    ).tocsr()
    dist, pred = dijkstra(
        graph, directed=False, indices=defects, return_predecessors=True, min_only=False
    )
    weights = dist[:, defects]
    if np.isinf(weights).any():
        raise DefectGraphError("defect clusters are not mutually reachable")
    # deterministic representative intact qubit for each cluster-graph edge
    cross_edge: dict[tuple, int] = {}
    for e in np.flatnonzero(keep):
        key = (int(ru[e]), int(rv[e]))
        if key not in cross_edge:
            cross_edge[key] = int(e)
            cross_edge[(key[1], key[0])] = int(e)
    return DefectGraph(defects, weights, dist, pred, cross_edge)


def mwpm(dg: DefectGraph) -> Matching:
    """Exact minimum-weight perfect matching of the defect clusters.

    Ties between equal-weight matchings are broken deterministically by
    lexicographic pair order (encoded into the edge weights so the blossom
    search itself resolves them).
    """
    d = len(dg.defect_roots)
    if d % 2:
        raise MatchingParityError(f"odd defect count {d}")
    if d == 0:
        return Matching([], 0.0)
    pairs = list(itertools.combinations(range(d), 2))
    scale = len(pairs) * (len(pairs) + 1)
    wmax = int(dg.weights.max())
    graph = nx.Graph()
    graph.add_nodes_from(range(d))
    for rank, (i, j) in enumerate(pairs):
        w = int(dg.weights[i, j])
        graph.add_edge(i, j, weight=(wmax - w) * scale + (len(pairs) - rank))
    mate = nx.max_weight_matching(graph, maxcardinality=True)
    chosen = sorted(tuple(sorted(p)) for p in mate)
    total = float(sum(dg.weights[i, j] for i, j in chosen))
    return Matching(chosen, total)


def brute_force_matching(dg: DefectGraph) -> Matching:
    """Exhaustive minimum over all perfect pairings (testing oracle)."""
    d = len(dg.defect_roots)
    if d % 2:
        raise MatchingParityError(f"odd defect count {d}")
    if d > 12:
        raise ValueError("brute force limited to 12 defects")
    if d == 0:
        return Matching([], 0.0)

    best = [None, np.inf]

    def rec(remaining, acc, weight):
        if weight >= best[1]:
            return
        if not remaining:
            best[0] = list(acc)
            best[1] = weight
            return
        i = remaining[0]
        for j in remaining[1:]:
            rest = [k for k in remaining if k not in (i, j)]
            rec(rest, acc + [(i, j)], weight + dg.weights[i, j])

    rec(list(range(d)), [], 0.0)
    return Matching(best[0], float(best[1]))


def correction_chain(lat: ClusterLattice, sg: SupercheckGraph, dg: DefectGraph, matching: Matching) -> np.ndarray:
    """Realize the matched pairs as a qubit set (bool per face qubit).

    Cluster-graph paths are lifted to actual qubit chains: intact qubits
    between clusters, plus lost-qubit connectors inside each traversed
    cluster so the chain is a connected 1-chain on the cell graph.
    """
    chain = np.zeros(lat.n_qubits, dtype=bool)
    defects = dg.defect_roots
    for i, j in matching.pairs:
        # walk predecessors from defect j's root back to defect i's root
        node = int(defects[j])
        path_nodes = [node]
        while node != defects[i]:
            node = int(dg.predecessors[i, node])
            path_nodes.append(node)
        for a, b in zip(path_nodes, path_nodes[1:]):
            chain[dg.cross_edge[(a, b)]] ^= True
    # the free (lost-qubit) connectors inside traversed clusters are filled
    # in by the erasure cleanup, which closes all interior parity
    return chain


def _cluster_adjacency(lat: ClusterLattice, sg: SupercheckGraph, root: int) -> dict:
    adj: dict[int, list] = {}
    for e in sg.merge_edges.get(root, []):
        a, b = map(int, lat.edge_cells[e])
        adj.setdefault(a, []).append((b, e))
        adj.setdefault(b, []).append((a, e))
    return adj


def _erasure_cleanup(lat: ClusterLattice, sg: SupercheckGraph, residual: np.ndarray) -> None:
    """Cancel residual check parity inside clusters along lost-qubit forests.

    The matched correction zeroes every supercheck, but the random errors on
    lost qubits still leave pairs of defective cells inside clusters.  Each
    cluster's parity total is even, so peeling its spanning forest clears
    them with lost (weight-0) qubits, leaving a closed residual chain.
    """
    parity = cell_parities(lat, residual)
    bad_cells = np.flatnonzero(parity)
    if len(bad_cells) == 0:
        return
    bad_roots = set(int(r) for r in sg.roots[bad_cells])
    for root in bad_roots:
        adj = _cluster_adjacency(lat, sg, root)
        if not adj:
            raise AssertionError("defective singleton cluster after correction")
        # iterative post-order peel over the spanning tree
        start = next(iter(adj))
        par = {start: (None, None)}
        order = []
        stack = [start]
        while stack:
            c = stack.pop()
            order.append(c)
            for nb, e in adj.get(c, []):
                if nb not in par:
                    par[nb] = (c, e)
                    stack.append(nb)
        odd = {c: bool(parity[c]) for c in par}
        for c in reversed(order):
            p, e = par[c]
            if p is None:
                continue
            if odd[c]:
                residual[e] ^= True
                odd[c] = False
                odd[p] = not odd[p]
        if odd[start]:
            raise AssertionError("odd parity total within a cluster")


def apply_correction_and_classify(
    lat: ClusterLattice,
    loss: LossMask,
    errors: ErrorMask,
    matching: Matching,
    sg: SupercheckGraph,
    dg: DefectGraph,
) -> LogicalOutcome:
    """Residual = errors xor correction; success iff no winding parity is odd."""
    residual = errors.z_errors.copy()
    if matching.pairs:
        residual ^= correction_chain(lat, sg, dg, matching)
    _erasure_cleanup(lat, sg, residual)
    h = []
    for axis in range(3):
        crossing = (lat.edge_axis == axis) & (lat.edge_base[:, axis] == lat.L - 1)
        h.append(int(residual[crossing].sum() % 2))
    return LogicalOutcome(tuple(h))


def decode_run(
    lat: ClusterLattice,
    rng,
    p_err: float,
    p_bond: float | None = None,
    p_loss: float | None = None,
    sublattice: str = "primal",
) -> bool:
    """One end-to-end trial; returns True on logical success.

    Exactly one of p_bond (bond sampling with correlated endpoint loss) and
    p_loss (direct qubit loss) must be given; zero loss is p_loss=0.
    """
    if (p_bond is None) == (p_loss is None):
        raise ValueError("specify exactly one of p_bond and p_loss")
    if p_bond is not None:
        loss = sample_bonds(lat, p_bond, rng)
    else:
        loss = inject_losses(lat, p_loss, rng)
        if sublattice == "dual":
            loss = LossMask(loss.missing_bonds, loss.lost_dual, loss.lost_primal)
    sg = form_superchecks(lat, loss, sublattice)
    errors = sample_errors(lat, loss, p_err, rng, sublattice)
    syndrome = extract_syndrome(lat, loss, errors, sg.roots, sublattice)
    dg = build_defect_graph(lat, sg, syndrome)
    matching = mwpm(dg)
    outcome = apply_correction_and_classify(lat, loss, errors, matching, sg, dg)
    return outcome.success
