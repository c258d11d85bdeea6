"""Command-line driver: config parsing, experiment dispatch, CSV emission.

Every run writes its CSV plus a JSON sidecar (config echo, seed, version,
wall time) next to it.  Floats are printed with 9 significant digits and
rows follow grid order, so identical configs produce identical bytes.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .growth import (
    EOModel,
    GrowthStrategy,
    estimate_error_profile,
    grow_resource,
    required_resource_size,
)
from .pauli import PauliOperator, commutes, pauli_multiply
from .supercheck import verify_supercheck_identity
from .threshold import (
    RegionBoundary,
    SweepConfig,
    correctable_region,
    memory_effect,
    phase_boundary,
    run_sweep,
)


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.9g" % float(x)
    return str(x)


def write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_sidecar(out_path: str, cfg: dict, t0: float) -> None:
    meta = {
        "config": cfg,
        "seed": cfg.get("seed"),
        "version": __version__,
        "wall_time_s": round(time.time() - t0, 3),
    }
    with open(out_path + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _floats(text: str):
    return [float(t) for t in str(text).split(",") if t != ""]


def _ints(text: str):
    return [int(t) for t in str(text).split(",") if t != ""]


def _check_prob(name: str, value) -> None:
    for v in np.atleast_1d(value):
        if not 0.0 <= float(v) <= 1.0:
            raise ConfigError(f"{name} must be in [0, 1], got {v}")


def _check_pos(name: str, value, minimum=1) -> None:
    for v in np.atleast_1d(value):
        if int(v) < minimum:
            raise ConfigError(f"{name} must be >= {minimum}, got {v}")


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="heraldtpc",
        description="Threshold experiments for cluster states grown with "
        "heralded entangling gates.",
    )
    sub = top.add_subparsers(dest="subcommand", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", help="JSON file with flat keys mirroring flags")
        p.add_argument("--seed", type=int, help="master seed (default 1)")
        p.add_argument("--workers", type=int, help="parallel workers")
        if needs_out:
            p.add_argument("--out", help="output CSV path")

    p = sub.add_parser("verify", help="run Pauli-algebra self checks")
    common(p, needs_out=False)

    p = sub.add_parser("grow", help="resource cost and node error profile")
    common(p)
    p.add_argument("--strategy", choices=("star", "cross", "snowflake"))
    p.add_argument("--attempts-n", type=int, dest="attempts_n")
    p.add_argument("--branching", type=int)
    p.add_argument("--ph", type=float)
    p.add_argument("--pg", type=float)
    p.add_argument("--pm", type=float)
    p.add_argument("--runs", type=int, help="growth cost samples")
    p.add_argument("--samples", type=int, help="error profile samples")

    p = sub.add_parser("resource-size", help="attempts needed for a bond target")
    common(p)
    p.add_argument("--strategy", choices=("star", "cross", "snowflake"))
    p.add_argument("--ph", type=float)
    p.add_argument("--target", type=float, help="bond failure target")

    p = sub.add_parser("lattice-sweep", help="failure rates over a grid")
    common(p)
    p.add_argument("--channel", choices=("bond", "loss"))
    p.add_argument("--p-channel", dest="p_channel", help="comma list")
    p.add_argument("--p-err", dest="p_err", help="comma list")
    p.add_argument("--sizes", help="comma list of L")
    p.add_argument("--trials", type=int)
    p.add_argument("--sublattice", choices=("primal", "dual"))
    p.add_argument("--ph", type=float, help="echoed p_h column")
    p.add_argument("--pg", type=float, help="echoed p_G column")
    p.add_argument("--pm", type=float, help="echoed p_M column")

    p = sub.add_parser("region", help="correctable (loss, error) boundary")
    common(p)
    p.add_argument("--channel", choices=("bond", "loss"))
    p.add_argument("--p-loss", dest="p_loss", help="comma list")
    p.add_argument("--p-err", dest="p_err", help="comma list")
    p.add_argument("--sizes", help="comma list of L")
    p.add_argument("--trials", type=int)
    p.add_argument("--sweep-out", dest="sweep_out", help="also save raw sweep CSV")

    for name in ("phase-diagram", "memory-effect"):
        p = sub.add_parser(name, help="maximal gate error vs heralded failure")
        common(p)
        p.add_argument("--strategy", choices=("star", "cross", "snowflake"))
        p.add_argument("--ph", help="comma list of p_h values")
        p.add_argument("--region-csv", dest="region_csv", help="boundary input")
        p.add_argument("--structures", type=int, help="fusion structures averaged")
        if name == "memory-effect":
            p.add_argument("--ratio", type=float, help="p_M / p_G during growth")

    return top


_DEFAULTS = {
    "seed": 1,
    "workers": None,  # resolved from HERALD_TPC_WORKERS, then 1
    "out": None,
    "strategy": "snowflake",
    "attempts_n": 4,
    "branching": 2,
    "ph": 0.5,
    "pg": 0.0,
    "pm": 0.0,
    "runs": 200,
    "samples": 2000,
    "target": 0.01,
    "channel": "bond",
    "p_channel": "0.0",
    "p_err": "0.01",
    "p_loss": "0.0",
    "sizes": "4,6",
    "trials": 200,
    "sublattice": "primal",
    "sweep_out": None,
    "region_csv": None,
    "structures": 16,
    "ratio": 0.1,
}


def parse_config(argv) -> dict:
    """Merge flags over an optional JSON config file and validate."""
    args = vars(_build_parser().parse_args(argv))
    file_cfg = {}
    if args.get("config"):
        try:
            with open(args["config"]) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config file: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file: top level must be an object")
        for key in file_cfg:
            if key not in _DEFAULTS and key != "subcommand":
                raise ConfigError(f"config file: unknown key {key!r}")
    cfg = {"subcommand": args["subcommand"]}
    for key, default in _DEFAULTS.items():
        if args.get(key) is not None:
            cfg[key] = args[key]
        elif key in file_cfg:
            cfg[key] = file_cfg[key]
        else:
            cfg[key] = default
    if cfg["workers"] is None:
        cfg["workers"] = int(os.environ.get("HERALD_TPC_WORKERS", "1"))

    for name in ("ph", "pg", "pm", "target", "ratio"):
        _check_prob(name, _floats(cfg[name]) if isinstance(cfg[name], str) else cfg[name])
    for name in ("p_channel", "p_err", "p_loss"):
        _check_prob(name, _floats(cfg[name]))
    for name in ("trials", "runs", "samples", "workers", "attempts_n", "structures"):
        _check_pos(name, cfg[name])
    _check_pos("sizes", _ints(cfg["sizes"]), minimum=2)
    _check_pos("branching", cfg["branching"], minimum=2)
    if cfg["out"] is None and cfg["subcommand"] != "verify":
        cfg["out"] = cfg["subcommand"].replace("-", "_") + ".csv"
    return cfg


# ---------------------------------------------------------------------------
# subcommands

def _cmd_verify(cfg) -> int:
    checks = []
    x = PauliOperator.from_label("X")
    z = PauliOperator.from_label("Z")
    y = PauliOperator.from_label("Y")
    checks.append(("single-qubit products", pauli_multiply(x, z).to_label() == "-iY"
                   and pauli_multiply(z, x).to_label() == "iY"
                   and pauli_multiply(x, y).to_label() == "iZ"))
    rng = np.random.default_rng(cfg["seed"])
    ok_assoc = ok_comm = ok_round = True
    for _ in range(200):
        n = int(rng.integers(1, 7))
        ops = []
        for _ in range(3):
            xs = rng.integers(0, 2, n).astype(bool)
            zs = rng.integers(0, 2, n).astype(bool)
            ops.append(PauliOperator(xs, zs, int(rng.integers(0, 4))))
        a, b, c = ops
        lhs = pauli_multiply(pauli_multiply(a, b), c)
        rhs = pauli_multiply(a, pauli_multiply(b, c))
        ok_assoc &= lhs == rhs
        ab, ba = pauli_multiply(a, b), pauli_multiply(b, a)
        ok_comm &= (ab == ba) == commutes(a, b)
        ok_round &= PauliOperator.from_label(a.to_label()) == a
    checks.append(("product associativity", ok_assoc))
    checks.append(("commutation vs product order", ok_comm))
    checks.append(("label round trip", ok_round))
    graph_ok = verify_supercheck_identity(2, None)
    for bond in range(8):
        graph_ok &= verify_supercheck_identity(2, bond)
    checks.append(("damaged parity-check identity (L=2)", graph_ok))
    all_ok = True
    for name, ok in checks:
        print(("PASS" if ok else "FAIL") + f" {name}")
        all_ok &= ok
    return 0 if all_ok else 1


GROW_HEADER = (
    "strategy,p_h,p_G,p_M,mean_cost,cost_ci,p_x,p_z,"
    "p_corr_same,p_corr_cross,bond_missing,seed"
)


def _cmd_grow(cfg) -> int:
    s = GrowthStrategy(cfg["strategy"], cfg["attempts_n"], cfg["branching"])
    m = EOModel(cfg["ph"], cfg["pg"], cfg["pm"])
    rng = np.random.default_rng(cfg["seed"])
    costs = np.array(
        [grow_resource(s, m, rng)[1].total_raw_qubits_consumed
         for _ in range(cfg["runs"])],
        dtype=float,
    )
    mean_cost = float(costs.mean())
    cost_ci = 1.96 * float(costs.std(ddof=1)) / np.sqrt(len(costs)) if len(costs) > 1 else 0.0
    prof = estimate_error_profile(s, m, cfg["samples"], rng)
    rows = [(
        cfg["strategy"], cfg["ph"], cfg["pg"], cfg["pm"], mean_cost, cost_ci,
        prof.p_x, prof.p_z, prof.p_corr_same_sublattice,
        prof.p_corr_cross_sublattice, prof.bond_missing_prob, cfg["seed"],
    )]
    write_csv(cfg["out"], GROW_HEADER, rows)
    return 0


def _cmd_resource_size(cfg) -> int:
    n, _, total = required_resource_size(cfg["strategy"], cfg["ph"], cfg["target"])
    rows = [(cfg["strategy"], cfg["ph"], cfg["target"], n, total, cfg["seed"])]
    write_csv(
        cfg["out"],
        "strategy,p_h,target_bond_fail,attempts_N,total_qubits,seed",
        rows,
    )
    print(f"attempts_N={n} total_qubits={total}")
    return 0


SWEEP_HEADER = (
    "p_h,p_G,p_M,p_bond,p_loss,p_err,L,trials,failures,"
    "fail_rate,ci_low,ci_high,seed"
)


def _sweep_rows(result, cfg):
    rows = []
    for r in result.rows:
        p_bond = r.p_channel if result.config.channel == "bond" else 0.0
        p_loss = r.p_channel if result.config.channel == "loss" else 0.0
        rows.append((
            cfg["ph"], cfg["pg"], cfg["pm"], p_bond, p_loss, r.p_err,
            r.size, r.trials, r.failures, r.rate, r.ci[0], r.ci[1],
            cfg["seed"],
        ))
    return rows


def _cmd_lattice_sweep(cfg) -> int:
    points = tuple(
        (pc, pe) for pc in _floats(cfg["p_channel"]) for pe in _floats(cfg["p_err"])
    )
    sweep = SweepConfig(
        sizes=tuple(_ints(cfg["sizes"])),
        points=points,
        trials=cfg["trials"],
        seed=cfg["seed"],
        channel=cfg["channel"],
        workers=cfg["workers"],
        sublattice=cfg["sublattice"],
    )
    result = run_sweep(sweep)
    write_csv(cfg["out"], SWEEP_HEADER, _sweep_rows(result, cfg))
    return 0


def _cmd_region(cfg) -> int:
    base = SweepConfig(
        sizes=tuple(_ints(cfg["sizes"])),
        points=((0.0, 0.0),),
        trials=cfg["trials"],
        seed=cfg["seed"],
        channel=cfg["channel"],
        workers=cfg["workers"],
    )
    region, sweep = correctable_region(
        _floats(cfg["p_loss"]), _floats(cfg["p_err"]), base
    )
    rows = [
        (pl, pe, region.err_step, cfg["seed"])
        for pl, pe in zip(region.p_channel, region.p_err_max)
    ]
    write_csv(cfg["out"], "p_loss,p_err_max,ci,seed", rows)
    if cfg["sweep_out"]:
        write_csv(cfg["sweep_out"], SWEEP_HEADER, _sweep_rows(sweep, cfg))
    return 0


def load_region_csv(path: str) -> RegionBoundary:
    """Rebuild a boundary from the region CSV schema (bond channel)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for col in ("p_loss", "p_err_max", "ci"):
            if col not in header:
                raise ConfigError(f"region CSV missing column {col!r}")
        ip, ie, ic = (header.index(c) for c in ("p_loss", "p_err_max", "ci"))
        xs, ys, cis = [], [], []
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) < len(header):
                continue
            xs.append(float(parts[ip]))
            ys.append(float(parts[ie]))
            cis.append(float(parts[ic]))
    if len(xs) < 2:
        raise ConfigError("region CSV needs at least two boundary points")
    return RegionBoundary(
        channel="bond",
        p_channel=tuple(xs),
        p_err_max=tuple(ys),
        flagged=tuple(False for _ in xs),
        err_step=min(cis),
    )


PHASE_HEADER = "strategy,p_h,p_G_max,attempts_N,resource_qubits,seed"


def _cmd_phase(cfg, with_memory: bool) -> int:
    if not cfg["region_csv"]:
        raise ConfigError("--region-csv is required (run the region subcommand first)")
    region = load_region_csv(cfg["region_csv"])
    kw = dict(n_structures=cfg["structures"], branching=cfg["branching"])
    grid = _floats(cfg["ph"]) if isinstance(cfg["ph"], str) else [cfg["ph"]]
    if with_memory:
        pd = memory_effect(
            cfg["strategy"], grid, region, cfg["seed"], ratio=cfg["ratio"], **kw
        )
    else:
        pd = phase_boundary(cfg["strategy"], grid, region, cfg["seed"], **kw)
    rows = [
        (pd.strategy, p_h, p_g, n, q, cfg["seed"]) for p_h, p_g, n, q in pd.rows
    ]
    write_csv(cfg["out"], PHASE_HEADER, rows)
    return 0


_COMMANDS = {
    "verify": _cmd_verify,
    "grow": _cmd_grow,
    "resource-size": _cmd_resource_size,
    "lattice-sweep": _cmd_lattice_sweep,
    "region": _cmd_region,
    "phase-diagram": lambda cfg: _cmd_phase(cfg, with_memory=False),
    "memory-effect": lambda cfg: _cmd_phase(cfg, with_memory=True),
}


def run_command(cfg: dict) -> int:
    t0 = time.time()
    code = _COMMANDS[cfg["subcommand"]](cfg)
    if cfg.get("out"):
        _write_sidecar(cfg["out"], cfg, t0)
    return code


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run_command(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surface as runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
