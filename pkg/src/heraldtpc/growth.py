"""Probabilistic growth of entangled resources and fusion into lattice nodes.

Resources (star / cross / snowflake shaped graph states) are grown by
size-doubling joins.  Joins are heralded: with probability p_s they succeed,
otherwise the whole partial object is discarded and rebuilt.  A completed
resource offers attempts_n leaf qubits toward each of its 4 future lattice
neighbors; bonding tries them one at a time, so a bond is missing with
probability p_h ** attempts_n.  After bonding, everything but the core is
measured out ("pruning") and the accumulated gate/memory faults are pushed
onto the surviving core qubits.

Cost accounting never replays individual failed builds: the number of
failed join cycles at each doubling level is a negative-binomial variable,
which we sample in aggregate level by level.  This is distribution-exact
and stays cheap even when the expected consumption is astronomical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .circuits import _PAULI_1Q, _PAULI_2Q, Circuit, PauliFrame, fault_locations
from .pauli import PauliOperator
from .stats import wilson_interval

KINDS = ("star", "cross", "snowflake")


class DivergentCostError(ValueError):
    """Expected cost is infinite (p_h = 1)."""


class BudgetExceededError(RuntimeError):
    """Raw-qubit budget exhausted before a resource completed."""


@dataclass(frozen=True)
class EOModel:
    """Noise/heralding parameters of the entangling operation."""

    p_h: float
    p_G: float = 0.0
    p_M: float = 0.0
    eo_kind: str = "auto"  # parity_projection | control_phase | auto

    def __post_init__(self):
        for name in ("p_h", "p_G", "p_M"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} = {v} outside [0, 1]")
        if self.eo_kind not in ("auto", "parity_projection", "control_phase"):
            raise ValueError(f"unknown eo_kind {self.eo_kind!r}")

    @property
    def p_s(self) -> float:
        return 1.0 - self.p_h


@dataclass(frozen=True)
class GrowthStrategy:
    """Resource recipe: geometry kind plus bond attempt budget."""

    kind: str
    attempts_n: int
    branching: int = 2
    depth: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.attempts_n < 1:
            raise ValueError("attempts_n must be >= 1")
        if self.branching < 2:
            raise ValueError("branching must be >= 2")
        if self.depth is not None:
            if self.depth < 1:
                raise ValueError("depth must be >= 1")
            cap = (self.branching - 1) * self.branching ** (self.depth - 1)
            if self.kind == "snowflake" and cap < self.attempts_n:
                raise ValueError(
                    f"depth {self.depth} supplies only {cap} leaves per "
                    f"direction, need {self.attempts_n}"
                )


@dataclass
class ResourceStats:
    total_raw_qubits_consumed: int
    completed_resource_size: int
    growth_rounds: int
    abandonments: int


@dataclass
class NodeErrorProfile:
    p_x: float
    p_z: float
    p_corr_same_sublattice: float
    p_corr_cross_sublattice: float
    bond_missing_prob: float
    samples: int
    intervals: dict = field(default_factory=dict)


@dataclass
class Resource:
    """A completed resource: build plan plus role bookkeeping.

    The plan is the abandonment-free trace of the successful build, as
    (round, op) pairs over local node ids; it is what fusion/pruning and
    the error audit replay.
    """

    strategy: GrowthStrategy
    plan: list  # (round, ("prep", v) | ("cz", u, v) | ("pp", keep, drop))
    n_nodes: int
    center: int
    hubs: list  # snowflake: 4 subtree roots; else empty
    attempts: list  # 4 lists of node ids, in attempt order
    parent: dict  # tree parent pointers toward the center
    rounds: int


# ---------------------------------------------------------------------------
# geometry plans

class _PlanBuilder:
    def __init__(self):
        self.plan = []
        self.n = 0
        self.parent = {}

    def prep(self):
        q = self.n
        self.n += 1
        self.plan.append((0, ("prep", q)))
        return q

    def cz(self, u, v, rnd):
        self.plan.append((rnd, ("cz", u, v)))

    def pp(self, keep, drop, rnd):
        self.plan.append((rnd, ("pp", keep, drop)))


def _build_chain(pb: _PlanBuilder, m: int):
    """Chain of m qubits joined end-to-end by halving; returns (qubits, rounds)."""
    if m == 1:
        return [pb.prep()], 0
    a = (m + 1) // 2
    left, rl = _build_chain(pb, a)
    right, rr = _build_chain(pb, m - a)
    rnd = max(rl, rr) + 1
    pb.cz(left[-1], right[0], rnd)
    pb.parent[right[0]] = left[-1]
    return left + right, rnd


def _build_star(pb: _PlanBuilder, leaves: int):
    """Star with the given leaf count; centers of merged halves stay pending.

    Returns (live center, leaf list, rounds).
    """
    if leaves == 1:
        c = pb.prep()
        l = pb.prep()
        pb.cz(c, l, 1)
        pb.parent[l] = c
        return c, [l], 1
    a = (leaves + 1) // 2
    c1, l1, r1 = _build_star(pb, a)
    c2, l2, r2 = _build_star(pb, leaves - a)
    rnd = max(r1, r2) + 1
    pb.pp(c1, c2, rnd)
    return c1, l1 + l2, rnd


def _build_tree(pb: _PlanBuilder, leaves: int, b: int):
    """Tree with the given leaf count, joined root-to-root up to b-way.

    Returns (root, leaf list, rounds).
    """
    if leaves == 1:
        r = pb.prep()
        l = pb.prep()
        pb.cz(r, l, 1)
        pb.parent[l] = r
        return r, [l], 1
    nparts = min(b, leaves)
    base, extra = divmod(leaves, nparts)
    sizes = [base + (1 if i < extra else 0) for i in range(nparts)]
    parts = [_build_tree(pb, s, b) for s in sizes]
    rnd = max(r for _, _, r in parts) + 1
    root = parts[0][0]
    all_leaves = list(parts[0][1])
    for sub_root, sub_leaves, _ in parts[1:]:
        pb.cz(root, sub_root, rnd)
        pb.parent[sub_root] = root
        all_leaves += sub_leaves
    return root, all_leaves, rnd


def build_plan(s: GrowthStrategy) -> Resource:
    """Deterministic abandonment-free build plan for the strategy."""
    n = s.attempts_n
    pb = _PlanBuilder()
    if s.kind == "star":
        center, leaves, rounds = _build_star(pb, 4 * n)
        for l in leaves:
            pb.parent[l] = center
        attempts = [leaves[d * n : (d + 1) * n] for d in range(4)]
        hubs = []
    elif s.kind == "cross":
        a, ra = _build_chain(pb, 2 * n + 1)
        b, rb = _build_chain(pb, 2 * n + 1)
        rounds = max(ra, rb) + 1
        center = a[n]
        pb.pp(center, b[n], rounds)
        # arms listed inner -> outer; attempts consume the outermost first
        arms = [a[:n][::-1], a[n + 1 :], b[:n][::-1], b[n + 1 :]]
        for arm in arms:
            prev = center
            for q in arm:
                pb.parent[q] = prev
                prev = q
        attempts = [arm[::-1] for arm in arms]
        hubs = []
    else:  # snowflake
        center = pb.prep()
        parts = [_build_tree(pb, n, s.branching) for _ in range(4)]
        rounds = max(r for _, _, r in parts)
        hubs = []
        attempts = []
        for root, leaves, _ in parts:
            rounds += 1
            pb.cz(center, root, rounds)
            pb.parent[root] = center
            hubs.append(root)
            attempts.append(leaves)
    return Resource(
        strategy=s,
        plan=pb.plan,
        n_nodes=pb.n,
        center=center,
        hubs=hubs,
        attempts=attempts,
        parent=pb.parent,
        rounds=rounds,
    )


def resource_graph(res: Resource) -> nx.Graph:
    """Logical geometry graph of a completed resource.

    Parity-projected partner centers are absorbed into the surviving node;
    the physical qubit count (including pending partners) is stored as the
    "multiplicity" node attribute.
    """
    g = nx.Graph()
    live = {}  # node -> live representative
    mult = {}
    for _, op in res.plan:
        if op[0] == "prep":
            g.add_node(op[1])
            live[op[1]] = op[1]
            mult[op[1]] = 1
        elif op[0] == "cz":
            g.add_edge(live[op[1]], live[op[2]])
        else:  # pp merge: symmetric-difference adjacency onto the keeper
            keep, drop = live[op[1]], live[op[2]]
            nbrs = set(g[drop])
            g.remove_node(drop)
            for v in nbrs - {keep}:
                if g.has_edge(keep, v):
                    g.remove_edge(keep, v)
                else:
                    g.add_edge(keep, v)
            mult[keep] += mult.pop(drop)
            live[op[2]] = keep
    nx.set_node_attributes(g, mult, "multiplicity")
    return g


# ---------------------------------------------------------------------------
# cost accounting

def _top_shape(s: GrowthStrategy):
    n = s.attempts_n
    if s.kind == "star":
        return ("star", 4 * n)
    if s.kind == "cross":
        return ("cross", n)
    return ("snow", n, s.branching)


def _shape_children(shape):
    """(parts, join success probability exponent) for one build cycle."""
    kind = shape[0]
    if kind == "prep":
        return None
    if kind == "star":
        m = shape[1]
        if m == 1:
            return [("prep",)] * 2, 1
        a = (m + 1) // 2
        return [("star", a), ("star", m - a)], 1
    if kind == "chain":
        m = shape[1]
        if m == 1:
            return None  # bare prep
        a = (m + 1) // 2
        return [("chain", a), ("chain", m - a)], 1
    if kind == "tree":
        m, b = shape[1], shape[2]
        if m == 1:
            return [("prep",)] * 2, 1
        nparts = min(b, m)
        base, extra = divmod(m, nparts)
        parts = [("tree", base + (1 if i < extra else 0), b) for i in range(nparts)]
        return parts, nparts - 1
    if kind == "cross":
        n = shape[1]
        return [("chain", 2 * n + 1)] * 2, 1
    if kind == "snow":
        n, b = shape[1], shape[2]
        return [("tree", n, b)] * 4 + [("prep",)], 4
    raise ValueError(shape)


def _shape_size(shape):
    if shape[0] == "prep":
        return 0
    if shape[0] in ("cross", "snow"):
        return 10 ** 9 + shape[1]
    return shape[1]


def resource_size(s: GrowthStrategy) -> int:
    """Physical qubits in one completed resource (pending partners included)."""
    n = s.attempts_n
    return {"star": 8 * n, "cross": 4 * n + 2, "snowflake": 8 * n + 1}[s.kind]


def expected_cost(s: GrowthStrategy, p_h: float) -> float:
    """Expected raw qubits consumed per completed resource.

    Each join cycle consumes all its parts and succeeds with p_s per EO;
    any heralded failure discards the whole cycle.
    """
    if p_h >= 1.0:
        raise DivergentCostError("p_h = 1 never completes a resource")
    p_s = 1.0 - p_h
    memo = {}

    def cost(shape):
        if shape[0] == "prep" or (shape[0] == "chain" and shape[1] == 1):
            return 1.0
        if shape not in memo:
            parts, n_eo = _shape_children(shape)
            memo[shape] = sum(cost(p) for p in parts) / p_s ** n_eo
        return memo[shape]

    return cost(_top_shape(s))


_NB_EXACT_LIMIT = 10 ** 8


def _sample_cycles(needed: float, q: float, rng) -> float:
    """Total build cycles until `needed` successes, success prob q per cycle."""
    if needed <= 0:
        return 0.0
    if q >= 1.0:
        return needed
    if needed <= _NB_EXACT_LIMIT:
        return needed + float(rng.negative_binomial(int(needed), q))
    # gaussian limit of the negative binomial (relative spread ~ needed^-1/2)
    mean = needed * (1.0 - q) / q
    sd = math.sqrt(needed * (1.0 - q)) / q
    return needed + max(0.0, mean + sd * rng.standard_normal())


def grow_resource(
    s: GrowthStrategy, m: EOModel, rng, max_raw_qubits: float | None = None
):
    """Grow one resource to completion; returns (graph, ResourceStats).

    The per-level failed-cycle counts are sampled in aggregate (negative
    binomial), which is equivalent in distribution to replaying every
    discarded partial object.
    """
    if m.p_h >= 1.0:
        raise DivergentCostError("p_h = 1 never completes a resource")
    res = build_plan(s)
    p_s = m.p_s
    need = {_top_shape(s): 1.0}
    raw = 0.0
    abandoned = 0.0
    while need:
        shape = max(need, key=_shape_size)
        count = need.pop(shape)
        if shape[0] == "prep" or (shape[0] == "chain" and shape[1] == 1):
            raw += count
            continue
        parts, n_eo = _shape_children(shape)
        cycles = _sample_cycles(count, p_s ** n_eo, rng)
        abandoned += cycles - count
        for p in parts:
            need[p] = need.get(p, 0.0) + cycles
        if max_raw_qubits is not None and raw + sum(need.values()) > max_raw_qubits:
            raise BudgetExceededError(
                f"raw-qubit budget {max_raw_qubits} exhausted growing {s.kind}"
            )
    stats = ResourceStats(
        total_raw_qubits_consumed=int(round(raw)),
        completed_resource_size=res.n_nodes,
        growth_rounds=res.rounds,
        abandonments=int(round(abandoned)),
    )
    return resource_graph(res), stats


def required_resource_size(kind: str, p_h: float, target_bond_fail: float):
    """Attempts and size needed to push bond failure below the target.

    Returns (attempts_n, leaves_per_direction, total_qubits).
    """
    if not (0.0 < target_bond_fail < 1.0):
        raise ValueError("target_bond_fail must lie in (0, 1)")
    if p_h >= 1.0:
        raise DivergentCostError("p_h = 1 cannot reach any bond-failure target")
    if p_h <= 0.0:
        n = 1
    else:
        n = max(1, math.ceil(math.log(target_bond_fail) / math.log(p_h)))
    s = GrowthStrategy(kind=kind, attempts_n=n)
    return n, n, resource_size(s)


# ---------------------------------------------------------------------------
# fusion, pruning, and the bonded-patch circuit

def sample_fusion_structure(attempts_n: int, p_h: float, rng):
    """Per direction: (heralded failures, bonded?) with at most N attempts."""
    out = []
    for _ in range(4):
        fails = 0
        while fails < attempts_n and rng.random() < p_h:
            fails += 1
        out.append((fails, fails < attempts_n))
    return tuple(out)


class _PatchBuilder:
    """Assembles the full trace circuit of one node patch.

    Patch = central resource bonded to 4 neighbor resources (each grown in
    full; neighbors attempt no other bonds).  Ops are bucketed into rounds
    so idle qubits can accrue memory noise.
    """

    def __init__(self, model: EOModel, growth_noise: bool):
        self.m = model
        self.growth_noise = growth_noise
        self.rounds = {}  # round -> list of (emit ops)
        self.n = 0
        self.adj = {}  # logical adjacency over live qubits
        self.pend = {}  # live center -> pending partner qubits
        self.alive = {}  # qubit -> birth round
        self.dead = {}  # qubit -> measurement round
        self.touched = {}  # round -> set of qubits acted on
        self.frozen_round = None  # growth prefix boundary (see freeze)
        self._prefix_ops = None
        self._prefix_meas = 0

    def freeze(self):
        """Mark the growth section immutable so clones can share it.

        All later ops must land in rounds past the boundary; the emitted
        op list of the frozen prefix is computed once and reused.
        """
        self.frozen_round = max(self.rounds) if self.rounds else -1
        circ = Circuit(self.n)
        self._emit_rounds(circ, [r for r in sorted(self.rounds)])
        self._prefix_ops = circ.ops
        self._prefix_meas = circ.n_meas

    def clone(self):
        """Copy for one fusion/pruning continuation of a frozen patch."""
        assert self.frozen_round is not None
        c = _PatchBuilder.__new__(_PatchBuilder)
        c.m = self.m
        c.growth_noise = self.growth_noise
        c.rounds = dict(self.rounds)  # frozen buckets shared, new keys local
        c.n = self.n
        c.adj = {q: set(v) for q, v in self.adj.items()}
        c.pend = {q: list(v) for q, v in self.pend.items()}
        c.alive = self.alive  # no preps after freeze
        c.dead = dict(self.dead)
        c.touched = dict(self.touched)
        c.frozen_round = self.frozen_round
        c._prefix_ops = self._prefix_ops
        c._prefix_meas = self._prefix_meas
        return c

    def _bucket(self, rnd):
        self.touched.setdefault(rnd, set())
        return self.rounds.setdefault(rnd, [])

    def _touch(self, rnd, *qs):
        self.touched.setdefault(rnd, set()).update(qs)

    def _alloc(self):
        q = self.n
        self.n += 1
        return q

    def prep(self, rnd, noisy):
        q = self._alloc()
        ops = self._bucket(rnd)
        ops.append(("prep", q))
        if noisy and self.m.p_G > 0:
            ops.append(("noise1", q, self.m.p_G, "gate"))
        self._touch(rnd, q)
        self.adj[q] = set()
        self.alive[q] = rnd
        return q

    def cz(self, a, b, rnd, noisy, tag="gate"):
        ops = self._bucket(rnd)
        ops.append(("gate", "CZ", (a, b)))
        if noisy and self.m.p_G > 0:
            ops.append(("noise2", a, b, self.m.p_G, tag))
        self._touch(rnd, a, b)
        if b in self.adj[a]:
            self.adj[a].discard(b)
            self.adj[b].discard(a)
        else:
            self.adj[a].add(b)
            self.adj[b].add(a)

    def failed_attempt_noise(self, a, b, rnd):
        # a heralded EO failure still touches both qubits
        if self.m.p_G > 0:
            self._bucket(rnd).append(("noise2", a, b, self.m.p_G, "gate"))
        self._touch(rnd, a, b)

    def pp_merge(self, keep, drop, rnd, noisy):
        """Parity-project two nodes; drop becomes a pending partner of keep.

        On an odd outcome the full keep-side node stabilizer must be
        applied: X on every physical representative of the kept node and
        Z on its logical neighbors.  (The circuit primitive contributes
        the X on `keep`; the rest is explicit feedback.)
        """
        assert drop not in self.adj[keep], "cannot merge adjacent nodes"
        ops = self._bucket(rnd)
        xfb = tuple(self.pend.get(keep, ()))
        zfb = tuple(sorted(self.adj[keep]))
        ops.append(("pp", keep, drop, xfb, zfb))
        if noisy and self.m.p_G > 0:
            ops.append(("noise2", keep, drop, self.m.p_G, "gate"))
        self._touch(rnd, keep, drop)
        new = self.adj[keep] ^ self.adj[drop]
        new -= {keep, drop}
        for v in self.adj[keep] - new:
            self.adj[v].discard(keep)
        for v in new - self.adj[keep]:
            self.adj[v].add(keep)
        for v in self.adj[drop]:
            self.adj[v].discard(drop)
        self.adj[keep] = new
        self.adj[drop] = set()
        self.pend.setdefault(keep, []).extend(
            [drop] + self.pend.pop(drop, [])
        )

    def _measure(self, q, basis, rnd, fb_kind, fb_targets):
        ops = self._bucket(rnd)
        if self.m.p_G > 0:
            ops.append(("noise1", q, self.m.p_G, "gate"))
        ops.append(("measure", q, basis, None, tuple(fb_targets), fb_kind))
        self._touch(rnd, q)
        self.dead[q] = rnd

    def measure_partner(self, q, live, rnd):
        """Deferred half of a parity-projection merge: X-measure the partner."""
        self._measure(q, "X", rnd, "Z", [live])

    def zmeas(self, q, rnd):
        nbrs = sorted(self.adj.pop(q))
        for v in nbrs:
            self.adj[v].discard(q)
        self._measure(q, "Z", rnd, "Z", nbrs)

    def ymeas(self, q, rnd):
        """Remove a degree-2 qubit, directly linking its two neighbors."""
        nbrs = sorted(self.adj.pop(q))
        assert len(nbrs) == 2, f"contraction needs degree 2, got {nbrs}"
        a, b = nbrs
        self.adj[a].discard(q)
        self.adj[b].discard(q)
        if b in self.adj[a]:
            self.adj[a].discard(b)
            self.adj[b].discard(a)
        else:
            self.adj[a].add(b)
            self.adj[b].add(a)
        self._measure(q, "Y", rnd, "S", nbrs)

    def instantiate(self, res: Resource, round_offset=0):
        """Replay a resource plan; returns local-node -> circuit-qubit map."""
        qmap = {}
        for rnd, op in res.plan:
            r = rnd + round_offset
            if op[0] == "prep":
                qmap[op[1]] = self.prep(r, self.growth_noise)
            elif op[0] == "cz":
                self.cz(qmap[op[1]], qmap[op[2]], r, self.growth_noise)
            else:
                self.pp_merge(qmap[op[1]], qmap[op[2]], r, self.growth_noise)
        return qmap

    def emit(self) -> Circuit:
        """Flatten rounds (with idle memory noise) into a Circuit."""
        circ = Circuit(self.n)
        if self._prefix_ops is not None:
            circ.ops = list(self._prefix_ops)
            circ.n_meas = self._prefix_meas
            rounds = [r for r in sorted(self.rounds) if r > self.frozen_round]
        else:
            rounds = sorted(self.rounds)
        self._emit_rounds(circ, rounds)
        return circ

    def _emit_rounds(self, circ, rounds):
        for rnd in rounds:
            for op in self.rounds[rnd]:
                if op[0] == "prep":
                    circ.prep_plus(op[1])
                elif op[0] == "gate":
                    circ.gate(op[1], *op[2])
                elif op[0] == "noise1":
                    circ.noise1(op[1], op[2], op[3])
                elif op[0] == "noise2":
                    circ.noise2(op[1], op[2], op[3], op[4])
                elif op[0] == "pp":
                    _, keep, drop, xfb, zfb = op
                    mid = circ.parity_projection(keep, drop)
                    if xfb:
                        circ.cfeedback(mid, xfb, "X")
                    if zfb:
                        circ.cfeedback(mid, zfb, "Z")
                elif op[0] == "measure":
                    _, q, basis, _, fb, fb_kind = op
                    mid = circ.measure(q, basis)
                    if fb:
                        circ.cfeedback(mid, fb, fb_kind)
                else:
                    raise ValueError(op)
            if self.m.p_M > 0:
                busy = self.touched[rnd]
                for q in range(self.n):
                    born = self.alive.get(q)
                    if born is None or born >= rnd or q in busy:
                        continue
                    died = self.dead.get(q)
                    if died is not None and died <= rnd:
                        continue
                    circ.noise1(q, self.m.p_M, "memory")


def _tree_path(res: Resource, leaf: int, stop: int):
    """Nodes from leaf up to (excluding) stop, following parent pointers."""
    path = []
    q = leaf
    while q != stop:
        path.append(q)
        q = res.parent[q]
    return path


def prepare_patch(central: Resource, neighbors, model: EOModel, growth_noise=True):
    """Instantiate and freeze the (structure-independent) grown patch.

    The result can be passed to build_patch as `base` to amortize the
    growth section over many fusion samples.
    """
    pb = _PatchBuilder(model, growth_noise)
    cmap = pb.instantiate(central)
    nmaps = [pb.instantiate(r) for r in neighbors]
    pb.freeze()
    return pb, cmap, nmaps


def build_patch(
    central: Resource,
    neighbors: list,
    model: EOModel,
    structure,
    growth_noise: bool = True,
    base=None,
):
    """Full trace circuit of one bonded node patch.

    structure = 4 tuples (heralded failures, bonded?).  Returns
    (circuit, core qubit ids [center, n1..n4], bond statuses).
    """
    s = central.strategy
    n_att = s.attempts_n
    if base is None:
        base = prepare_patch(central, neighbors, model, growth_noise)
    pb, cmap, nmaps = base
    pb = pb.clone()

    rf = max([central.rounds] + [r.rounds for r in neighbors])
    statuses = []
    bonded = []  # per direction: (a_leaf, b_leaf) circuit qubits or None
    max_t = 0
    for d, (fails, ok) in enumerate(structure):
        res_b = neighbors[d]
        att_a = [cmap[q] for q in central.attempts[d]]
        att_b = [nmaps[d][q] for q in res_b.attempts[(d + 2) % 4]]
        t = fails + 1 if ok else n_att
        max_t = max(max_t, t)
        for i in range(t):
            rnd = rf + 1 + i
            a, b = att_a[i], att_b[i]
            if i < fails or not ok:
                pb.failed_attempt_noise(a, b, rnd)
                pb.zmeas(a, rnd)
                pb.zmeas(b, rnd)
            else:
                pb.cz(a, b, rnd, noisy=True, tag="fusion")
        statuses.append(ok)
        bonded.append((att_a[t - 1], att_b[t - 1]) if ok else None)

    rp1 = rf + max_t + 1

    def prune_resource(res, qmap, keep_nodes):
        live_center = qmap[res.center]
        for p in pb.pend.pop(live_center, []):
            pb.measure_partner(p, live_center, rp1)
        keep = {qmap[v] for v in keep_nodes}
        for v in range(res.n_nodes):
            q = qmap[v]
            if q in keep or q in pb.dead:
                continue
            pb.zmeas(q, rp1)

    def essential(res, direction, bonded_local):
        """Nodes kept at pruning: core skeleton plus the bonded branch."""
        keep = {res.center}
        keep.update(res.hubs)
        if bonded_local is not None:
            stop = res.hubs[direction] if res.hubs else res.center
            keep.update(_tree_path(res, bonded_local, stop))
        return keep

    # map bonded circuit qubits back to local node ids
    inv_c = {q: v for v, q in cmap.items()}
    keep_c = {central.center}
    keep_c.update(central.hubs)
    paths_a = []
    paths_b = []
    for d in range(4):
        if bonded[d] is None:
            paths_a.append([])
            paths_b.append([])
            continue
        qa, qb = bonded[d]
        stop_a = central.hubs[d] if central.hubs else central.center
        pa = _tree_path(central, inv_c[qa], stop_a)
        keep_c.update(pa)
        paths_a.append([cmap[v] for v in pa[::-1]])  # inner -> outer
        inv_b = {q: v for v, q in nmaps[d].items()}
        res_b = neighbors[d]
        stop_b = res_b.hubs[(d + 2) % 4] if res_b.hubs else res_b.center
        pbth = _tree_path(res_b, inv_b[qb], stop_b)
        paths_b.append([nmaps[d][v] for v in pbth])  # outer -> inner
    prune_resource(central, cmap, keep_c)
    for d in range(4):
        res_b = neighbors[d]
        inv_b_keep = essential(
            res_b,
            (d + 2) % 4,
            {q: v for v, q in nmaps[d].items()}[bonded[d][1]]
            if bonded[d]
            else None,
        )
        prune_resource(res_b, nmaps[d], inv_b_keep)

    # contraction: collapse each bonded branch to a single core-core edge
    rp2 = rp1 + 1
    for d in range(4):
        if bonded[d] is None:
            continue
        for q in paths_a[d] + paths_b[d]:
            pb.ymeas(q, rp2)

    cores = [cmap[central.center]]
    rp3 = rp2 + 1
    if s.kind == "snowflake":
        def collapse_hubs(res, qmap):
            h = [qmap[v] for v in res.hubs]
            pb.pp_merge(h[0], h[1], rp3, noisy=True)
            pb.pp_merge(h[2], h[3], rp3, noisy=True)
            pb.pp_merge(h[0], h[2], rp3 + 1, noisy=True)
            for p in pb.pend.pop(h[0], []):
                pb.measure_partner(p, h[0], rp3 + 2)
            pb.zmeas(qmap[res.center], rp3 + 2)  # now disconnected
            return h[0]

        cores = [collapse_hubs(central, cmap)]
        for d in range(4):
            cores.append(collapse_hubs(neighbors[d], nmaps[d]))
    else:
        for d in range(4):
            cores.append(nmaps[d][neighbors[d].center])

    circ = pb.emit()
    return circ, cores, statuses


# ---------------------------------------------------------------------------
# exact fault transfer: backward sweep

def residual_table(circ: Circuit, out_qubits):
    """Per fault location, the final-frame image of each Pauli component.

    Images are bitmasks over the out qubits: bit 2i is X on out_qubits[i],
    bit 2i+1 is Z.  Propagation (including measurement folding and
    conditioned feedback) is GF(2)-linear, so a single reverse sweep covers
    every location; entries align with fault_locations(circ).
    """
    ix = [0] * circ.n
    iz = [0] * circ.n
    fm = [0] * circ.n_meas
    for i, q in enumerate(out_qubits):
        ix[q] = 1 << (2 * i)
        iz[q] = 1 << (2 * i + 1)
    table = []
    for op in reversed(circ.ops):
        kind = op[0]
        if kind == "noise1":
            q = op[1]
            table.append(((ix[q], ix[q] ^ iz[q], iz[q]), op[2]))
        elif kind == "noise2":
            a, b = op[1], op[2]
            masks = tuple(
                (ix[a] if axx else 0)
                ^ (iz[a] if az else 0)
                ^ (ix[b] if bx else 0)
                ^ (iz[b] if bz else 0)
                for axx, az, bx, bz in _PAULI_2Q
            )
            table.append((masks, op[3]))
        elif kind == "prep":
            q = op[1]
            ix[q] = iz[q] = 0
        elif kind == "gate":
            name, qs = op[1], op[2]
            if name == "CZ":
                a, b = qs
                ix[a], ix[b] = ix[a] ^ iz[b], ix[b] ^ iz[a]
            elif name == "CNOT":
                a, b = qs
                ix[a] ^= ix[b]
                iz[b] ^= iz[a]
            elif name == "H":
                (q,) = qs
                ix[q], iz[q] = iz[q], ix[q]
            elif name in ("S", "SDG"):
                (q,) = qs
                ix[q] ^= iz[q]
        elif kind == "measure":
            _, q, basis, mid = op
            xb, zb = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}[basis]
            ix[q] = fm[mid] if zb else 0
            iz[q] = fm[mid] if xb else 0
        elif kind == "pp":
            _, a, b, mid = op
            ix[a], ix[b] = fm[mid], fm[mid] ^ ix[a] ^ ix[b]
        elif kind == "cfeedback":
            _, mid, targets, fkind = op
            acc = 0
            for t in targets:
                acc ^= ix[t] if fkind == "X" else iz[t]
            fm[mid] ^= acc
            if fkind == "S":
                for t in targets:
                    ix[t] ^= iz[t]
        else:
            raise ValueError(op)
    table.reverse()
    return table


def sample_fault_mask(table, rng, require_fault=False):
    """Sample one shot of depolarizing faults; returns the residual bitmask."""
    rates = np.array([r for _, r in table])
    while True:
        hits = rng.random(len(table)) < rates
        if hits.any() or not require_fault:
            break
    mask = 0
    for i in np.flatnonzero(hits):
        masks = table[i][0]
        mask ^= masks[rng.integers(len(masks))]
    return mask


def marginal_bit_probabilities(table, n_bits, rate_of=None):
    """Exact marginal flip probability of each output bit.

    Locations are independent; each contributes an odd-flip probability
    q = rate * (#components flipping the bit) / (#components), so
    P(bit) = (1 - prod(1 - 2q)) / 2.  rate_of optionally overrides the
    recorded per-location rates (e.g. to rescale memory noise).
    """
    probs = []
    for b in range(n_bits):
        prod = 1.0
        for j, (masks, rate) in enumerate(table):
            if rate_of is not None:
                rate = rate_of(j)
            c = sum(1 for mk in masks if (mk >> b) & 1)
            if c:
                prod *= 1.0 - 2.0 * rate * c / len(masks)
        probs.append(0.5 * (1.0 - prod))
    return probs


# ---------------------------------------------------------------------------
# node-level operations

def fuse_and_prune_node(resource: Resource, neighbor_resources, m: EOModel, rng):
    """Bond one resource to four neighbors, prune, and collect faults.

    Returns (bond statuses, fault record) where the fault record is a
    PauliOperator over [node, neighbor1..4] core qubits.  Faults are
    sampled during fusion/pruning only (the growth trace is taken as
    already audited).
    """
    structure = sample_fusion_structure(resource.strategy.attempts_n, m.p_h, rng)
    circ, cores, statuses = build_patch(
        resource, list(neighbor_resources), m, structure, growth_noise=False
    )
    table = residual_table(circ, cores)
    mask = sample_fault_mask(table, rng) if table else 0
    rec = PauliOperator.identity(len(cores))
    for i in range(len(cores)):
        rec.x[i] = bool((mask >> (2 * i)) & 1)
        rec.z[i] = bool((mask >> (2 * i + 1)) & 1)
    return statuses, rec


def _patch_loc_count(central: Resource, neighbors, model: EOModel):
    """Closed-form fault-location count of a patch (p_M = 0 traces).

    Every qubit is prepared once and all but the 5 cores are measured once;
    two-qubit markers come from growth joins, hub collapses, and one per
    fusion attempt.  Returns (fixed part, per-attempt increment) so callers
    can skip building circuits for fault-free shots.
    """
    n_q = central.n_nodes + sum(r.n_nodes for r in neighbors)
    n1 = 2 * n_q - 5
    joins = (central.n_nodes - 1) + sum(r.n_nodes - 1 for r in neighbors)
    if central.strategy.kind == "snowflake":
        joins += 3 * 5
    return n1 + joins, 1


def estimate_error_profile(
    s: GrowthStrategy, m: EOModel, samples: int, rng
) -> NodeErrorProfile:
    """Monte Carlo audit of the error channels left on a completed node.

    Each shot grows a fresh patch trace (central resource plus 4 bonded
    neighbors), samples depolarizing faults on every active operation and
    idle step, and propagates them onto the 5 surviving cores.  Reported:
      p_x, p_z           marginal X/Z on the node,
      p_corr_same        Z on >= 2 of the 4 neighbors (one sublattice),
      p_corr_cross       Z on both the node and a neighbor,
      bond_missing       all attempts failed on a direction.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    central = build_plan(s)
    neighbors = [build_plan(s) for _ in range(4)]
    base = prepare_patch(central, neighbors, m, growth_noise=True)
    fixed, per_att = (
        _patch_loc_count(central, neighbors, m) if m.p_M == 0 else (None, None)
    )
    n_x = n_z = n_same = n_cross = 0
    n_missing = 0
    zero_rates = m.p_G == 0 and m.p_M == 0
    table_cache = {}
    for _ in range(samples):
        structure = sample_fusion_structure(s.attempts_n, m.p_h, rng)
        n_missing += sum(1 for _, ok in structure if not ok)
        if zero_rates:
            continue
        if fixed is not None:
            n_locs = fixed + per_att * sum(
                (f + 1 if ok else s.attempts_n) for f, ok in structure
            )
            # draw the number of faulting locations without building
            if rng.binomial(n_locs, m.p_G) == 0:
                continue
        key = structure
        if key not in table_cache:
            circ, cores, _ = build_patch(
                central, neighbors, m, structure, base=base
            )
            if fixed is not None:
                n_check = len(fault_locations(circ))
                expect = fixed + per_att * sum(
                    (f + 1 if ok else s.attempts_n) for f, ok in structure
                )
                assert n_check == expect, (n_check, expect)
            if len(table_cache) > 64:
                table_cache.clear()
            table_cache[key] = residual_table(circ, cores)
        mask = sample_fault_mask(
            table_cache[key], rng, require_fault=fixed is not None
        )
        if mask == 0:
            continue
        zx = (mask >> 0) & 1
        zz = (mask >> 1) & 1
        nbr_z = [(mask >> (2 * i + 1)) & 1 for i in range(1, 5)]
        n_x += zx
        n_z += zz
        if sum(nbr_z) >= 2:
            n_same += 1
        if zz and any(nbr_z):
            n_cross += 1
    n_dir = 4 * samples
    profile = NodeErrorProfile(
        p_x=n_x / samples,
        p_z=n_z / samples,
        p_corr_same_sublattice=n_same / samples,
        p_corr_cross_sublattice=n_cross / samples,
        bond_missing_prob=n_missing / n_dir,
        samples=samples,
        intervals={
            "p_x": wilson_interval(n_x, samples),
            "p_z": wilson_interval(n_z, samples),
            "p_corr_same_sublattice": wilson_interval(n_same, samples),
            "p_corr_cross_sublattice": wilson_interval(n_cross, samples),
            "bond_missing_prob": wilson_interval(n_missing, n_dir),
        },
    )
    return profile


def node_marginal_evaluator(
    s: GrowthStrategy, p_h: float, n_structures: int, rng, include_memory=False
):
    """Precompute fault-transfer tables; returns f(p_G, p_M) -> (p_x, p_z).

    The transfer of each fault location onto the node core is independent
    of the noise rates, so the expensive patch traces are built once per
    sampled fusion structure and the marginals are then closed-form in
    (p_G, p_M).  Used by the phase-diagram search, which must evaluate
    many candidate rates per strategy.
    """
    model = EOModel(p_h, 0.5, 0.5 if include_memory else 0.0)
    central = build_plan(s)
    neighbors = [build_plan(s) for _ in range(4)]
    base = prepare_patch(central, neighbors, model, growth_noise=True)
    per_structure = []
    for _ in range(n_structures):
        structure = sample_fusion_structure(s.attempts_n, p_h, rng)
        circ, cores, _ = build_patch(
            central, neighbors, model, structure, base=base
        )
        table = residual_table(circ, [cores[0]])
        locs = fault_locations(circ)
        cx = np.array([sum((mk >> 0) & 1 for mk in masks) for masks, _ in table])
        cz = np.array([sum((mk >> 1) & 1 for mk in masks) for masks, _ in table])
        ncomp = np.array([len(masks) for masks, _ in table], dtype=float)
        is_mem = np.array([tag == "memory" for _, _, _, tag in locs])
        keep = (cx > 0) | (cz > 0)
        per_structure.append((cx[keep], cz[keep], ncomp[keep], is_mem[keep]))

    def marginals(p_G, p_M=0.0):
        px = pz = 0.0
        for cx, cz, ncomp, is_mem in per_structure:
            rates = np.where(is_mem, p_M, p_G)
            px += 0.5 * (1.0 - np.prod(1.0 - 2.0 * rates * cx / ncomp))
            pz += 0.5 * (1.0 - np.prod(1.0 - 2.0 * rates * cz / ncomp))
        return px / n_structures, pz / n_structures

    return marginals


def mean_node_marginals(
    s: GrowthStrategy, m: EOModel, n_structures: int, rng, memory_ratio=None
):
    """Structure-averaged exact marginals (p_x, p_z) on the node core.

    Used by the phase-diagram search, where Monte Carlo per candidate
    point would be wasteful: for each sampled fusion structure the fault
    transfer is computed exactly, and only the fusion randomness is
    averaged.  memory_ratio, if given, sets p_M = ratio * p_G by rescaling
    the memory locations of a trace built with placeholder rates.
    """
    model = m
    if memory_ratio is not None:
        model = EOModel(m.p_h, m.p_G, memory_ratio * m.p_G, m.eo_kind)
    central = build_plan(s)
    neighbors = [build_plan(s) for _ in range(4)]
    base = prepare_patch(central, neighbors, model, growth_noise=True)
    px = pz = 0.0
    for _ in range(n_structures):
        structure = sample_fusion_structure(s.attempts_n, model.p_h, rng)
        circ, cores, _ = build_patch(
            central, neighbors, model, structure, base=base
        )
        table = residual_table(circ, cores)
        probs = marginal_bit_probabilities(table, 2)
        px += probs[0]
        pz += probs[1]
    return px / n_structures, pz / n_structures
