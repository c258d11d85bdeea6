"""Monte Carlo experiment layer: sweeps, crossings, and the phase diagram.

Per-trial randomness is counter-mode: every (point, size, trial) triple
keys its own Philox stream from the master seed, so aggregated results are
bit-identical no matter how trials are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decoder import decode_run
from .growth import (
    GrowthStrategy,
    node_marginal_evaluator,
    required_resource_size,
    resource_size,
)
from .lattice import build_lattice
from .stats import wilson_interval

_MASK64 = (1 << 64) - 1
_KEY_PAD = 0x9E3779B97F4A7C15  # golden-ratio constant, second key word


class NoCrossingError(ValueError):
    """Failure-rate curves never cross on the swept grid."""


def trial_rng(master_seed: int, point_idx: int, size_idx: int, trial_idx: int):
    """Independent generator for one trial, order- and worker-independent."""
    bg = np.random.Philox(
        key=np.array([master_seed & _MASK64, _KEY_PAD], dtype=np.uint64),
        counter=np.array(
            [0, trial_idx & _MASK64, point_idx & _MASK64, size_idx & _MASK64],
            dtype=np.uint64,
        ),
    )
    return np.random.Generator(bg)


@dataclass(frozen=True)
class SweepConfig:
    """Grid of (loss-channel, error) points swept over lattice sizes.

    channel selects how the loss parameter is applied: "bond" removes
    lattice bonds (losing both endpoint qubits, the heralded-gate case),
    "loss" erases qubits independently.
    """

    sizes: tuple
    points: tuple  # ((p_channel, p_err), ...)
    trials: int
    seed: int
    channel: str = "bond"
    workers: int = 1
    sublattice: str = "primal"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.points:
            raise ValueError("empty point grid")
        if any(L < 2 for L in self.sizes) or not self.sizes:
            raise ValueError("sizes must all be >= 2")
        if self.channel not in ("bond", "loss"):
            raise ValueError(f"unknown loss channel {self.channel!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class SweepRow:
    p_channel: float
    p_err: float
    size: int
    trials: int
    failures: int
    rate: float
    ci: tuple


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list

    def rates(self, size: int):
        """(p_channel, p_err, rate) triples for one lattice size."""
        return [
            (r.p_channel, r.p_err, r.rate) for r in self.rows if r.size == size
        ]


def _run_batch(args):
    (
        master,
        channel,
        p_ch,
        p_err,
        size,
        point_idx,
        size_idx,
        lo,
        hi,
        sublattice,
    ) = args
    lat = build_lattice(size)
    kwargs = {"p_bond": p_ch} if channel == "bond" else {"p_loss": p_ch}
    failures = 0
    for t in range(lo, hi):
        rng = trial_rng(master, point_idx, size_idx, t)
        if not decode_run(lat, rng, p_err, sublattice=sublattice, **kwargs):
            failures += 1
    return point_idx, size_idx, hi - lo, failures


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Run all grid points; deterministic for a given master seed."""
    batches = []
    chunk = max(1, math.ceil(cfg.trials / max(cfg.workers, 1) / 4))
    for pi, (p_ch, p_err) in enumerate(cfg.points):
        for si, size in enumerate(cfg.sizes):
            for lo in range(0, cfg.trials, chunk):
                batches.append(
                    (
                        cfg.seed,
                        cfg.channel,
                        p_ch,
                        p_err,
                        size,
                        pi,
                        si,
                        lo,
                        min(lo + chunk, cfg.trials),
                        cfg.sublattice,
                    )
                )
    counts = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_batch, batches, chunksize=1))
    else:
        results = [_run_batch(b) for b in batches]
    for pi, si, n, f in results:
        t, ff = counts.get((pi, si), (0, 0))
        counts[(pi, si)] = (t + n, ff + f)
    rows = []
    for pi, (p_ch, p_err) in enumerate(cfg.points):
        for si, size in enumerate(cfg.sizes):
            t, f = counts[(pi, si)]
            rows.append(
                SweepRow(
                    p_channel=p_ch,
                    p_err=p_err,
                    size=size,
                    trials=t,
                    failures=f,
                    rate=f / t,
                    ci=wilson_interval(f, t),
                )
            )
    return SweepResult(config=cfg, rows=rows)


# ---------------------------------------------------------------------------
# threshold crossings

@dataclass
class CrossingEstimate:
    threshold: float
    uncertainty: float
    pair_crossings: dict  # (L_small, L_large) -> crossing


def estimate_crossing(xs, rates_by_size) -> CrossingEstimate:
    """Locate where failure curves of increasing sizes cross.

    Below threshold bigger lattices fail less, above they fail more; for
    each adjacent size pair the sign change of the rate difference is
    linearly interpolated.  Mean over pairs is the estimate, the spread
    (at least half a grid step) the uncertainty.
    """
    sizes = sorted(rates_by_size)
    if len(sizes) < 2:
        raise ValueError("need at least two sizes")
    xs = np.asarray(xs, dtype=float)
    if len(xs) < 3:
        raise ValueError("need at least three grid points")
    crossings = {}
    for a, b in zip(sizes, sizes[1:]):
        diff = np.asarray(rates_by_size[b], dtype=float) - np.asarray(
            rates_by_size[a], dtype=float
        )
        found = None
        for i in range(len(xs) - 1):
            if diff[i] < 0 <= diff[i + 1]:
                frac = -diff[i] / (diff[i + 1] - diff[i])
                found = xs[i] + frac * (xs[i + 1] - xs[i])
                break
        if found is None:
            raise NoCrossingError(
                f"no upward sign change between sizes {a} and {b}"
            )
        crossings[(a, b)] = float(found)
    vals = list(crossings.values())
    step = float(np.min(np.diff(xs)))
    spread = (max(vals) - min(vals)) / 2 if len(vals) > 1 else 0.0
    return CrossingEstimate(
        threshold=float(np.mean(vals)),
        uncertainty=max(spread, step / 2),
        pair_crossings=crossings,
    )


# ---------------------------------------------------------------------------
# correctable region

@dataclass
class RegionBoundary:
    """Largest correctable p_err per loss-channel value (isotonic in loss)."""

    channel: str
    p_channel: tuple
    p_err_max: tuple
    flagged: tuple  # inconclusive statistics below the reported boundary
    err_step: float

    def limit(self, p_ch: float, margin_cells: float = 1.0) -> float:
        """Interpolated boundary with a safety margin of grid cells.

        Points must sit inside the measured region; beyond the largest
        measured loss the limit is -inf.
        """
        xs = np.asarray(self.p_channel)
        ys = np.asarray(self.p_err_max)
        dx = float(np.min(np.diff(xs))) if len(xs) > 1 else 0.0
        x_eval = p_ch + margin_cells * dx
        if x_eval > xs[-1]:
            return -math.inf
        y = float(np.interp(x_eval, xs, ys))
        return y - margin_cells * self.err_step

    def contains(self, p_ch: float, p_err: float, margin_cells: float = 1.0):
        return p_err < self.limit(p_ch, margin_cells)


def _separated_decrease(row_small: SweepRow, row_large: SweepRow) -> bool:
    """Failure rate decreases with size, beyond statistical overlap."""
    if row_small.failures == 0 and row_large.failures == 0:
        return True
    return row_large.ci[1] < row_small.ci[0]


def correctable_region(
    loss_grid, err_grid, cfg_base: SweepConfig
) -> tuple[RegionBoundary, SweepResult]:
    """Map the correctable (loss, error) region on a product grid.

    For each loss value the boundary is the largest error rate whose
    failure rate still decreases with lattice size (CI-separated, using
    the two largest sizes); the curve is then forced nonincreasing in
    loss.  Points with contradictory statistics below the boundary are
    flagged rather than silently kept.
    """
    loss_grid = list(loss_grid)
    err_grid = list(err_grid)
    points = tuple((pl, pe) for pl in loss_grid for pe in err_grid)
    cfg = SweepConfig(
        sizes=cfg_base.sizes,
        points=points,
        trials=cfg_base.trials,
        seed=cfg_base.seed,
        channel=cfg_base.channel,
        workers=cfg_base.workers,
        sublattice=cfg_base.sublattice,
    )
    result = run_sweep(cfg)
    sizes = sorted(cfg.sizes)
    by_point = {}
    for r in result.rows:
        by_point[(r.p_channel, r.p_err, r.size)] = r
    boundary = []
    flags = []
    for pl in loss_grid:
        best = 0.0
        flagged = False
        for pe in err_grid:
            small = by_point[(pl, pe, sizes[-2])]
            large = by_point[(pl, pe, sizes[-1])]
            if _separated_decrease(small, large):
                best = pe
            elif large.ci[0] > small.ci[1]:
                break  # separated increase: firmly outside
            else:
                flagged = True  # inconclusive point below any later boundary
        boundary.append(best)
        flags.append(flagged)
    # isotonic cleanup: more loss can never allow more error
    for i in range(1, len(boundary)):
        boundary[i] = min(boundary[i], boundary[i - 1])
    err_step = (
        float(np.min(np.diff(sorted(set(err_grid)))))
        if len(set(err_grid)) > 1
        else err_grid[0] or 1.0
    )
    region = RegionBoundary(
        channel=cfg.channel,
        p_channel=tuple(loss_grid),
        p_err_max=tuple(boundary),
        flagged=tuple(flags),
        err_step=err_step,
    )
    return region, result


# ---------------------------------------------------------------------------
# phase diagram

@dataclass
class PhaseDiagramResult:
    strategy: str
    rows: list  # (p_h, p_G_max, attempts_n, resource_qubits)
    memory_ratio: float = 0.0
    diagnostics: dict = field(default_factory=dict)


DEFAULT_BOND_TARGETS = (0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001)


def phase_boundary(
    kind: str,
    p_h_grid,
    region: RegionBoundary,
    seed: int,
    bond_targets=DEFAULT_BOND_TARGETS,
    n_structures: int = 16,
    memory_ratio: float = 0.0,
    p_g_hi: float = 2e-2,
    tol_factor: float = 1.05,
    branching: int = 2,
) -> PhaseDiagramResult:
    """Maximal tolerable gate error per heralded-failure probability.

    For each p_h, candidate attempt budgets N are derived from a ladder of
    bond-failure targets; each candidate is scored by bisecting on p_G the
    condition that (bond loss p_h^N, node error marginal) lies strictly
    inside the correctable region.  The best candidate wins.
    """
    if region.channel != "bond":
        raise ValueError("phase boundary needs a bond-channel region")
    rows = []
    diagnostics = {}
    for ih, p_h in enumerate(p_h_grid):
        cand_n = sorted(
            {
                required_resource_size(kind, p_h, t)[0]
                for t in bond_targets
            }
        )
        best = (0.0, cand_n[0])
        notes = []
        for n in cand_n:
            p_bond = p_h ** n if p_h > 0 else 0.0
            limit = region.limit(p_bond)
            if limit <= 0:
                notes.append((n, "bond loss outside region"))
                continue
            s = GrowthStrategy(kind=kind, attempts_n=n, branching=branching)
            rng = np.random.default_rng([seed & _MASK64, ih, n])
            marginals = node_marginal_evaluator(
                s, p_h, n_structures, rng, include_memory=memory_ratio > 0
            )

            def feasible(p_g):
                _, pz = marginals(p_g, memory_ratio * p_g)
                return pz < limit

            if not feasible(0.0):
                notes.append((n, "infeasible even at p_G = 0"))
                continue
            lo, hi = 0.0, p_g_hi
            if feasible(hi):
                lo = hi
            else:
                while hi / max(lo, 1e-12) > tol_factor and hi - lo > 1e-9:
                    mid = math.sqrt(max(lo, 1e-9) * hi) if lo > 0 else hi / 2
                    if feasible(mid):
                        lo = mid
                    else:
                        hi = mid
            if lo > best[0]:
                best = (lo, n)
        rows.append(
            (
                p_h,
                best[0],
                best[1],
                resource_size(GrowthStrategy(kind, best[1], branching)),
            )
        )
        if notes:
            diagnostics[p_h] = notes
    return PhaseDiagramResult(
        strategy=kind,
        rows=rows,
        memory_ratio=memory_ratio,
        diagnostics=diagnostics,
    )


def memory_effect(
    kind: str, p_h_grid, region: RegionBoundary, seed: int, ratio: float = 0.1, **kw
) -> PhaseDiagramResult:
    """Phase boundary with memory error p_M = ratio * p_G during growth."""
    if ratio < 0:
        raise ValueError("ratio must be >= 0")
    return phase_boundary(
        kind, p_h_grid, region, seed, memory_ratio=ratio, **kw
    )
