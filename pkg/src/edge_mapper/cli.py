"""Command-line front end for planning, sweeps, partitioning and validation.

Loads network/device/calibration inputs, dispatches to the engines, and
renders reports as text, JSON, or CSV.  Outputs are deterministic for a
given config and seed: files and tables are byte-identical across runs.

Exit codes: 0 success, 1 input or feasibility error, 2 throughput target
unmet (plan only).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .aiecost import pad_up, spatial_latency
from .executor import audit_plan, verify_plan
from .lare import LARE_SWEEP_COLUMNS, lare_sweep
from .model import (
    DOMAIN_AIE,
    DOMAIN_PL,
    STRATEGIES,
    STRATEGY_RESOURCE,
    InfeasibleError,
    MapperError,
    NetworkSpec,
    ResourceVector,
    TilingPlan,
    ValidationError,
    _require,
    default_device_from_env,
    load_calibration,
    load_device,
    load_network,
)
from .planner import (
    PlanConstraints,
    crossing_sensitivity,
    hybrid_partition,
    partition_costs,
    plan_network,
)
from .plcost import min_feasible_rf, pl_network_interval


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs, resolved from flags and environment."""

    command: str
    network: Optional[Path]
    device: Optional[Path]
    calib: Optional[Path]
    out: Path
    format: str
    seed: int
    verbose: bool
    args: argparse.Namespace


# ---------------------------------------------------------------------------
# Flag parsing helpers


def _parse_budget(text: str) -> ResourceVector:
    """'lut=800000,ff=1600000,dsp=680,bram=4000'; omitted classes are zero."""
    vals = {"lut": 0.0, "ff": 0.0, "dsp": 0.0, "bram": 0.0}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, val = part.partition("=")
        key = key.strip().lower()
        _require(key in vals, ValidationError, f"unknown resource class {key!r} in budget")
        try:
            vals[key] = float(val)
        except ValueError as e:
            raise ValidationError(f"bad budget value {val!r} for {key}") from e
    return ResourceVector(**vals)


def _parse_shapes(text: str) -> list:
    """'64x64,128x16' -> [(64, 64), (128, 16)]."""
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        dims = chunk.lower().split("x")
        _require(len(dims) == 2, ValidationError, f"shape {chunk!r} is not KxN")
        try:
            out.append((int(dims[0]), int(dims[1])))
        except ValueError as e:
            raise ValidationError(f"shape {chunk!r} is not KxN") from e
    _require(len(out) > 0, ValidationError, "no shapes given")
    return out


def _parse_triple(text: str) -> tuple:
    dims = text.replace("x", ",").split(",")
    _require(len(dims) == 3, ValidationError, f"{text!r} is not an MxKxN triple")
    try:
        return tuple(int(d) for d in dims)
    except ValueError as e:
        raise ValidationError(f"{text!r} is not an MxKxN triple") from e


def _parse_pins(items: Sequence[str]) -> dict:
    pins = {}
    for item in items:
        idx, _, dom = item.partition("=")
        try:
            pins[int(idx)] = dom.strip().lower()
        except ValueError as e:
            raise ValidationError(f"pin {item!r} is not INDEX=pl|aie") from e
    return pins


def _load_inputs(cfg: RunConfig, need_network: bool = True):
    device = load_device(cfg.device) if cfg.device else default_device_from_env()
    network = load_network(cfg.network) if cfg.network else None
    _require(network is not None or not need_network, ValidationError,
             f"{cfg.command} requires --network")
    calib = load_calibration(cfg.calib) if cfg.calib else None
    return network, device, calib


def _constraints(cfg: RunConfig) -> PlanConstraints:
    return PlanConstraints(
        max_tiles_per_layer=cfg.args.max_tiles,
        allow_multi_band=cfg.args.allow_multi_band,
    )


# ---------------------------------------------------------------------------
# Rendering


def _mhz(hz: float) -> str:
    return f"{hz / 1e6:.2f} MHz ({hz:.0f} inferences/s)"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _table_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(c) for c in row] for row in [header, *rows]]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _emit_rows(cfg: RunConfig, header: Sequence[str], rows: Sequence[Sequence],
               file_name: Optional[str]) -> None:
    if cfg.format == "json":
        records = [dict(zip(header, row)) for row in rows]
        sys.stdout.write(json.dumps(records, indent=2, sort_keys=True) + "\n")
    elif cfg.format == "csv":
        sys.stdout.write(_csv_text(header, rows))
    else:
        sys.stdout.write(_table_text(header, rows))
    if file_name is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / file_name).write_text(_csv_text(header, rows))


def _flags_text(flags: Sequence[str]) -> str:
    return "+".join(flags) if flags else "-"


# ---------------------------------------------------------------------------
# plan


PLAN_COLUMNS = ["name", "domain", "p_k", "p_n", "q_k", "q_n", "shape", "band",
                "cols", "latency_cycles", "source", "flags"]


def _plan_rows(plan: TilingPlan) -> list:
    rows = []
    for l in plan.layers:
        shape = "x".join(str(s) for s in l.api_shape)
        rows.append([l.name, l.domain, l.p_k, l.p_n, l.q_k, l.q_n, shape, l.band,
                     f"{l.first_col}-{l.last_col}", l.latency_cycles, l.source,
                     _flags_text(l.flags)])
    return rows


def _pl_baseline(network: NetworkSpec, device, calib, strategy: str) -> Optional[dict]:
    """All-fabric reference point: fastest reuse factors under prorated budgets."""
    if device.pl_budget is None:
        return None
    total = network.total_macs
    rfs, sources = [], []
    try:
        for layer in network.layers:
            share = device.pl_budget.scaled(layer.mac_count / total)
            point = min_feasible_rf(layer, share, strategy, device, calib)
            rfs.append(point.reuse_factor)
            sources.append(point.source)
    except InfeasibleError as e:
        return {"feasible": False, "reason": str(e)}
    interval = pl_network_interval(network, rfs, strategy, device, calib)
    hz = device.pl_clock_hz / interval
    return {"feasible": True, "reuse_factors": rfs, "interval_cycles": interval,
            "throughput_hz": hz, "sources": sources}


def cmd_plan(cfg: RunConfig) -> int:
    network, device, calib = _load_inputs(cfg)
    if cfg.args.target_mhz is not None:
        network = dataclasses.replace(network, target_throughput_hz=cfg.args.target_mhz * 1e6)
    plan = plan_network(network, device, _constraints(cfg), calib)
    baseline = _pl_baseline(network, device, calib, cfg.args.strategy)

    cfg.out.mkdir(parents=True, exist_ok=True)
    plan_file = cfg.out / f"{network.name}_plan.json"
    plan.save(plan_file)

    target = network.target_throughput_hz
    if cfg.format == "json":
        doc = {"plan": plan.to_json_dict(), "pl_baseline": baseline}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif cfg.format == "csv":
        sys.stdout.write(_csv_text(PLAN_COLUMNS, _plan_rows(plan)))
    else:
        out = [f"network {network.name} on {device.name}  (batch {network.batch})"]
        out.append(_table_text(PLAN_COLUMNS, _plan_rows(plan)).rstrip("\n"))
        out.append(f"array: {plan.bands} band(s), {plan.crossings} crossings, "
                   f"penalty x{plan.penalty_factor:.3f}")
        out.append(f"array interval: {plan.interval_seconds:.6e} s -> "
                   f"throughput {_mhz(plan.throughput_hz)}")
        if baseline is None:
            out.append("fabric baseline: skipped (device profile has no fabric budget)")
        elif not baseline["feasible"]:
            out.append(f"fabric baseline: infeasible ({baseline['reason']})")
        else:
            tag = "" if all(s == "calibrated" for s in baseline["sources"]) else "  [analytic]"
            out.append(f"fabric baseline: rf {baseline['reuse_factors']}, "
                       f"interval {baseline['interval_cycles']} cycles -> "
                       f"throughput {_mhz(baseline['throughput_hz'])}{tag}")
        if target is not None:
            aie_met = "met" if plan.throughput_hz >= target else "unmet"
            out.append(f"target {target / 1e6:.2f} MHz: {aie_met} on array")
            if baseline is not None and baseline.get("feasible"):
                pl_met = "met" if baseline["throughput_hz"] >= target else "unmet"
                out.append(f"target {target / 1e6:.2f} MHz: {pl_met} on fabric")
        out.append(f"plan written to {plan_file}")
        sys.stdout.write("\n".join(out) + "\n")
    if plan.target_met is False:
        print("target unmet", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# lare


def cmd_lare(cfg: RunConfig) -> int:
    network, device, calib = _load_inputs(cfg, need_network=cfg.args.shapes is None)
    if cfg.args.shapes is not None:
        shapes = _parse_shapes(cfg.args.shapes)
    else:
        shapes = [(l.k, l.n) for l in network.layers]
    if cfg.args.budget:
        budgets = [_parse_budget(b) for b in cfg.args.budget]
    else:
        budgets = [device.pl_budget] if device.pl_budget is not None else []
    rows = lare_sweep(shapes, budgets, device, calib, cfg.args.strategy)
    table = [[r[c] for c in LARE_SWEEP_COLUMNS] for r in rows]
    _emit_rows(cfg, LARE_SWEEP_COLUMNS, table,
               "lare_sweep.csv" if cfg.args.out_given else None)
    return 0


# ---------------------------------------------------------------------------
# partition


def cmd_partition(cfg: RunConfig) -> int:
    network, device, calib = _load_inputs(cfg)
    _require(device.pl_budget is not None, ValidationError,
             f"device profile {device.name} has no fabric budget to prorate")
    pl_s, aie_s = partition_costs(network, device, device.pl_budget,
                                  cfg.args.strategy, _constraints(cfg), calib)
    pins = _parse_pins(cfg.args.pin) if cfg.args.pin else None
    result = hybrid_partition(network, device, pl_s, aie_s,
                              rho=cfg.args.rho, pins=pins)
    # the published sweep varies only the crossing count against a fixed
    # base interval; an all-fabric walk has nothing to vary
    if DOMAIN_AIE in result.domains:
        sens = crossing_sensitivity(result.base_interval_seconds, result.rho)
    else:
        sens = [(result.crossings, 1.0, result.base_interval_seconds)]
    sens_rows = [[c, f, s] for c, f, s in sens]

    cfg.out.mkdir(parents=True, exist_ok=True)
    part_file = cfg.out / f"{network.name}_partition.json"
    doc = {**result.to_json_dict(),
           "layers": [{"name": l.name, "domain": d}
                      for l, d in zip(network.layers, result.domains)],
           "sensitivity": sens_rows}
    part_file.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    header = ["crossings", "penalty_factor", "interval_seconds"]
    if cfg.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif cfg.format == "csv":
        sys.stdout.write(_csv_text(header, sens_rows))
    else:
        walk = "  ".join(f"{l.name}:{d}" for l, d in zip(network.layers, result.domains))
        sys.stdout.write(
            f"partition of {network.name}: {walk}\n"
            f"crossings {result.crossings}, penalty x{result.penalty_factor:.3f}, "
            f"interval {result.penalized_interval_seconds:.6e} s "
            f"(base {result.base_interval_seconds:.6e} s, rho {result.rho})\n"
            + _table_text(header, sens_rows)
            + f"result written to {part_file}\n")
    return 0


# ---------------------------------------------------------------------------
# validate


def cmd_validate(cfg: RunConfig) -> int:
    _, device, _ = _load_inputs(cfg, need_network=False)
    plan = TilingPlan.load(cfg.args.plan)
    if plan.device != device.name:
        print(f"note: plan was made for {plan.device!r}, checking against {device.name!r}")
    problems = audit_plan(plan, device)
    if problems:
        for p in problems:
            print(f"invariant violated: {p}")
        return 1
    print(f"plan {plan.network}: structural checks ok ({len(plan.layers)} layers)")
    failed = False
    for entry in plan.layers:
        if entry.domain != DOMAIN_AIE:
            print(f"  {entry.name}: skipped (fabric layer, no array execution to replay)")
            continue
        report = verify_plan(entry, trials=cfg.args.trials, seed=cfg.seed)
        if report.passed:
            note = f" ({report.warning})" if report.warning else ""
            print(f"  {entry.name}: {report.trials} trials ok{note}")
        else:
            failed = True
            t, i, j, got, want = report.first_mismatch
            print(f"  {entry.name}: MISMATCH in {report.mismatches}/{report.trials} trials; "
                  f"first at trial {t}, row {i}, col {j}: got {got}, expected {want}")
    print("validation failed" if failed else "validation passed")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# sweep


SWEEP_COLUMNS = ["p_k", "p_n", "parallelism", "legal", "latency_cycles",
                 "bound", "source", "flags", "reason"]


def _sweep_cell(layer, p_k, p_n, device, calib, constraints, api_shape):
    try:
        lat = spatial_latency(layer, p_k, p_n, device, api_shape=api_shape, calib=calib)
    except InfeasibleError as e:
        return [p_k, p_n, p_k * p_n, 0, "", "", "", "-", str(e)]
    shape = lat.tiling.api_shape
    e_m, e_k, e_n = device.effective_tile(shape)
    q_k = pad_up(layer.k, p_k * e_k) // p_k
    q_n = pad_up(layer.n, p_n * e_n) // p_n
    flags = list(lat.flags)
    legal = 1
    if q_k < min(constraints.min_q_k, pad_up(layer.k, e_k)) \
            or q_n < min(constraints.min_q_n, pad_up(layer.n, e_n)):
        # kept in the table with the workload flag; the planner would skip it
        legal = 0
        if "below_min_workload" not in flags:
            flags.append("below_min_workload")
    return [p_k, p_n, p_k * p_n, legal, lat.cycles, lat.bound, lat.source,
            _flags_text(flags), ""]


def cmd_sweep(cfg: RunConfig) -> int:
    network, device, calib = _load_inputs(cfg)
    sel = cfg.args.layer
    by_name = {l.name: l for l in network.layers}
    if sel in by_name:
        layer = by_name[sel]
    else:
        try:
            layer = network.layers[int(sel)]
        except (ValueError, IndexError) as e:
            raise ValidationError(f"no layer {sel!r} in {network.name}") from e
    grid = _parse_shapes(cfg.args.grid)[0]
    api_shape = _parse_triple(cfg.args.shape) if cfg.args.shape else None
    constraints = _constraints(cfg)
    rows = [_sweep_cell(layer, p_k, p_n, device, calib, constraints, api_shape)
            for p_k in range(1, grid[0] + 1) for p_n in range(1, grid[1] + 1)]
    _emit_rows(cfg, SWEEP_COLUMNS, rows,
               f"sweep_{layer.name}.csv" if cfg.args.out_given else None)
    if cfg.format == "text":
        # constant-parallelism groups: best cell on each p_k*p_n diagonal
        best: dict = {}
        for r in rows:
            if r[3] == 1 and (r[2] not in best or r[4] < best[r[2]][4]):
                best[r[2]] = r
        group_rows = [[t, best[t][0], best[t][1], best[t][4]] for t in sorted(best)]
        sys.stdout.write("\nbest cell per parallelism:\n"
                         + _table_text(["parallelism", "p_k", "p_n", "latency_cycles"],
                                       group_rows))
    return 0


# ---------------------------------------------------------------------------
# Entry point


COMMANDS = {
    "plan": cmd_plan,
    "lare": cmd_lare,
    "partition": cmd_partition,
    "validate": cmd_validate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--network", type=Path, help="network description JSON")
    common.add_argument("--device", type=Path,
                        help="device profile JSON (default: bundled profile "
                             "named by EDGE_MAPPER_PROFILE, else vek280)")
    common.add_argument("--calib", type=Path, help="measured calibration CSV")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--strategy", choices=sorted(STRATEGIES), default=STRATEGY_RESOURCE)
    common.add_argument("--max-tiles", type=int, default=PlanConstraints().max_tiles_per_layer,
                        help="spatial tile budget per layer")
    common.add_argument("--allow-multi-band", action="store_true")
    common.add_argument("--rho", type=float, default=None,
                        help="crossing penalty rate override")
    common.add_argument("--target-mhz", type=float, default=None,
                        help="override the network's throughput target")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="edge-mapper",
        description="Decide where a quantized dense network runs on a "
                    "heterogeneous device and how to tile it.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("plan", parents=[common],
                   help="tile and place every layer on the array")
    p_lare = sub.add_parser("lare", parents=[common],
                            help="latency-adjusted resource equivalence sweep")
    p_lare.add_argument("--shapes", help="explicit KxN list, e.g. 64x64,128x16")
    p_lare.add_argument("--budget", action="append",
                        help="available resources, e.g. dsp=680,lut=800000 "
                             "(repeatable; omitted classes are zero)")
    p_part = sub.add_parser("partition", parents=[common],
                            help="optimal fabric/array split of a chain")
    p_part.add_argument("--pin", action="append",
                        help="force a layer's domain, e.g. 0=pl (repeatable)")
    p_val = sub.add_parser("validate", parents=[common],
                           help="recheck a saved plan and replay it on random data")
    p_val.add_argument("--plan", type=Path, required=True, help="plan JSON to check")
    p_val.add_argument("--trials", type=int, default=5)
    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="latency over a spatial split grid for one layer")
    p_sweep.add_argument("--layer", default="0", help="layer name or index")
    p_sweep.add_argument("--grid", default="8x8", help="PKxPN grid extent")
    p_sweep.add_argument("--shape", help="restrict to one API shape, e.g. 4x8x8")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        network=args.network,
        device=args.device,
        calib=args.calib,
        out=args.out if args.out is not None else Path("."),
        format=args.format,
        seed=args.seed,
        verbose=args.verbose,
        args=args,
    )
    args.out_given = args.out is not None
    try:
        return COMMANDS[args.command](cfg)
    except MapperError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
