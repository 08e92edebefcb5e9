"""Placement planning: spatial tiling search, band packing, hybrid split.

The planner decides, per layer, how many array columns and rows to
spend (column splits cascade partial sums, so they are cheap; row
splits replicate activation streams) and which API shape to run, then
packs the per-layer column spans into horizontal bands west to east.
A separate exact dynamic program assigns whole layers to the fabric or
the array when the two must share a chain, charging the measured
penalty for every extra boundary crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from .model import (
    CalibrationTable,
    DOMAIN_AIE,
    DOMAIN_PL,
    DeviceSpec,
    InfeasibleError,
    LayerPlan,
    LayerSpec,
    NetworkSpec,
    ResourceVector,
    TilingPlan,
    ValidationError,
    _require,
)
from . import aiecost
from .aiecost import (
    AieLatency,
    FLAG_UNDER_UTILIZED,
    crossing_count,
    crossing_penalty_factor,
    memory_feasible,
    pad_up,
    plan_metrics,
    shape_fits_layer,
)
from .plcost import min_feasible_rf

OBJECTIVE_MIN_LATENCY = "min_latency"
OBJECTIVE_MIN_TILES = "min_tiles"

FLAG_MULTI_BAND = "multi_band"
FLAG_ANALYTIC = "analytic_model"

EXHAUSTIVE_CAP = 100_000


@dataclass(frozen=True)
class PlanConstraints:
    max_tiles_per_layer: int = 16
    allow_multi_band: bool = False
    min_q_k: int = aiecost.MIN_TILE_WORKLOAD[1]
    min_q_n: int = aiecost.MIN_TILE_WORKLOAD[2]
    api_shape: Optional[tuple] = None     # pin one API shape for every layer
    objective: str = OBJECTIVE_MIN_LATENCY

    def __post_init__(self):
        _require(self.max_tiles_per_layer >= 1, ValidationError, "max tiles must be >= 1")
        _require(self.objective in (OBJECTIVE_MIN_LATENCY, OBJECTIVE_MIN_TILES),
                 ValidationError, f"unknown objective {self.objective!r}")


@dataclass(frozen=True)
class Candidate:
    """One evaluated spatial tiling option for a layer."""

    p_k: int
    p_n: int
    api_shape: tuple
    shape_index: int
    q_k: int
    q_n: int
    padded_m: int
    padded_k: int
    padded_n: int
    latency: AieLatency

    @property
    def tiles(self) -> int:
        return self.p_k * self.p_n

    @property
    def sort_key(self) -> tuple:
        # cheaper first; then fewer tiles, wider column spans, default shape
        return (self.latency.cycles, self.tiles, -self.p_k, self.shape_index)


def _shape_list(device: DeviceSpec, constraints: PlanConstraints) -> list:
    if constraints.api_shape is not None:
        shape = tuple(constraints.api_shape)
        _require(shape in {tuple(s) for s in device.legal_api_shapes}, ValidationError,
                 f"API shape {shape} is not legal on {device.name}")
        return [shape]
    return [tuple(s) for s in device.legal_api_shapes]


def _evaluate_candidate(
    layer: LayerSpec,
    p_k: int,
    p_n: int,
    shape: tuple,
    device: DeviceSpec,
    constraints: PlanConstraints,
    calib: Optional[CalibrationTable],
) -> Optional[Candidate]:
    """Legality-check one (p_k, p_n, shape) option; None when it is out."""
    if not shape_fits_layer(layer.k, layer.n, shape, device.unroll):
        return None
    e_m, e_k, e_n = device.effective_tile(shape)
    padded_m = pad_up(layer.m, e_m)
    padded_k = pad_up(layer.k, p_k * e_k)
    padded_n = pad_up(layer.n, p_n * e_n)
    q_k = padded_k // p_k
    q_n = padded_n // p_n
    # the minimum useful workload only binds for splits: a layer that is
    # itself smaller than the minimum still plans at full size (flagged)
    min_q_k = min(constraints.min_q_k, pad_up(layer.k, e_k))
    min_q_n = min(constraints.min_q_n, pad_up(layer.n, e_n))
    if q_k < min_q_k or q_n < min_q_n:
        return None
    if not memory_feasible(q_k, q_n, padded_m, device, layer.dtype_bytes):
        return None
    latency = aiecost.spatial_latency(layer, p_k, p_n, device, api_shape=shape, calib=calib)
    shape_index = [tuple(s) for s in device.legal_api_shapes].index(shape)
    return Candidate(
        p_k=p_k, p_n=p_n, api_shape=shape, shape_index=shape_index,
        q_k=q_k, q_n=q_n, padded_m=padded_m, padded_k=padded_k, padded_n=padded_n,
        latency=latency,
    )


def candidate_tilings(
    layer: LayerSpec,
    device: DeviceSpec,
    constraints: PlanConstraints = PlanConstraints(),
    calib: Optional[CalibrationTable] = None,
    p_k_cap: Optional[int] = None,
) -> list:
    """Every legal spatial tiling of one layer, deterministically ordered.

    Order: ascending tile count, then wider column spans first, then the
    device's API shape order.  Candidates that split a dimension below
    the minimum per-tile workload, overflow local memory, or exceed the
    tile budget are excluded.
    """
    out = []
    p_k_max = min(device.usable_width, p_k_cap if p_k_cap is not None else device.usable_width)
    for p_k in range(1, p_k_max + 1):
        for p_n in range(1, device.rows + 1):
            if p_k * p_n > constraints.max_tiles_per_layer:
                continue
            for shape in _shape_list(device, constraints):
                cand = _evaluate_candidate(layer, p_k, p_n, shape, device, constraints, calib)
                if cand is not None:
                    out.append(cand)
    out.sort(key=lambda c: (c.tiles, -c.p_k, c.shape_index))
    return out


def plan_layer(
    layer: LayerSpec,
    device: DeviceSpec,
    constraints: PlanConstraints = PlanConstraints(),
    calib: Optional[CalibrationTable] = None,
    p_k_cap: Optional[int] = None,
) -> Candidate:
    """Lowest-latency candidate for one layer.

    Ties fall to fewer tiles, then wider column spans, then the device's
    first API shape, so repeated runs agree bit for bit.
    """
    cands = candidate_tilings(layer, device, constraints, calib, p_k_cap)
    if not cands:
        raise InfeasibleError(
            f"layer {layer.name} ({layer.m}x{layer.k}x{layer.n}) has no feasible tiling: "
            f"a weight dimension may be below the smallest unrolled API block, or every "
            f"split violates memory or workload constraints"
        )
    return min(cands, key=lambda c: c.sort_key)


def exhaustive_layer_search(
    layer: LayerSpec,
    device: DeviceSpec,
    constraints: PlanConstraints = PlanConstraints(),
    calib: Optional[CalibrationTable] = None,
    p_k_max: Optional[int] = None,
    p_n_max: Optional[int] = None,
    cap: int = EXHAUSTIVE_CAP,
) -> tuple:
    """Brute-force reference search: full (p_k, p_n, shape) table plus argmin.

    Walks the raw grid without any of plan_layer's ordering shortcuts;
    used to cross-check the planner.  Refuses grids larger than `cap`.
    """
    p_k_hi = p_k_max if p_k_max is not None else device.usable_width
    p_n_hi = p_n_max if p_n_max is not None else device.rows
    shapes = _shape_list(device, constraints)
    space = p_k_hi * p_n_hi * len(shapes)
    _require(space <= cap, ValidationError,
             f"search space {space} exceeds the cap of {cap} candidates")
    table = []
    best = None
    for p_k in range(1, p_k_hi + 1):
        for p_n in range(1, p_n_hi + 1):
            if p_k * p_n > constraints.max_tiles_per_layer:
                continue
            for shape in shapes:
                cand = _evaluate_candidate(layer, p_k, p_n, shape, device, constraints, calib)
                if cand is None:
                    continue
                table.append(cand)
                if best is None or cand.sort_key < best.sort_key:
                    best = cand
    if best is None:
        raise InfeasibleError(f"layer {layer.name}: empty search space")
    return best, table


# ---------------------------------------------------------------------------
# Band packing


@dataclass(frozen=True)
class BandLayout:
    """Horizontal placement of layer column spans into bands."""

    assignments: tuple   # per layer: (band, first_col, last_col), absolute columns
    bands: int
    groups: tuple        # per band: tuple of layer indices, west to east

    def __post_init__(self):
        _require(self.bands >= 1, ValidationError, "layout needs at least one band")


def band_layout(column_counts: Sequence[int], device: DeviceSpec) -> BandLayout:
    """Greedy west-to-east packing in network order.

    Layers keep their chain order; when the next span would run past the
    east edge of the usable region, a new band opens at the west edge.
    """
    width = device.usable_width
    lo = device.usable_column_lo
    assignments = []
    groups = [[]]
    cursor = 0
    for idx, cols in enumerate(column_counts):
        _require(1 <= cols, ValidationError, f"layer {idx}: column count must be >= 1")
        _require(cols <= width, InfeasibleError,
                 f"layer {idx} needs {cols} columns but only {width} are usable")
        if cursor + cols > width:
            groups.append([])
            cursor = 0
        band = len(groups) - 1
        assignments.append((band, lo + cursor, lo + cursor + cols - 1))
        groups[band].append(idx)
        cursor += cols
    return BandLayout(
        assignments=tuple(assignments),
        bands=len(groups),
        groups=tuple(tuple(g) for g in groups),
    )


def _band_row_check(choices: Sequence[Candidate], layout: BandLayout, device: DeviceSpec) -> None:
    total_rows = sum(max(choices[i].p_n for i in group) for group in layout.groups)
    _require(total_rows <= device.rows, InfeasibleError,
             f"band layout needs {total_rows} rows but the array has {device.rows}")


# ---------------------------------------------------------------------------
# Whole-network planning


def _assemble_plan(
    network: NetworkSpec,
    device: DeviceSpec,
    choices: Sequence[Candidate],
    layout: BandLayout,
) -> TilingPlan:
    entries = []
    for layer, cand, (band, first, last) in zip(network.layers, choices, layout.assignments):
        tiling = cand.latency.tiling
        flags = list(cand.latency.flags)
        if layout.bands > 1:
            flags.append(FLAG_MULTI_BAND)
        if cand.latency.source == aiecost.SOURCE_ANALYTIC:
            flags.append(FLAG_ANALYTIC)
        entries.append(LayerPlan(
            name=layer.name, domain=DOMAIN_AIE,
            m=layer.m, k=layer.k, n=layer.n,
            padded_m=cand.padded_m, padded_k=cand.padded_k, padded_n=cand.padded_n,
            p_k=cand.p_k, p_n=cand.p_n, q_k=cand.q_k, q_n=cand.q_n,
            api_shape=cand.api_shape,
            r_m=tiling.r_m, r_k=tiling.r_k, r_n=tiling.r_n,
            unroll=tiling.unroll,
            band=band, first_col=first, last_col=last,
            reuse_factor=None,
            latency_cycles=float(cand.latency.cycles),
            latency_seconds=cand.latency.cycles / device.aie_clock_hz,
            bound=cand.latency.bound, source=cand.latency.source,
            flags=tuple(flags),
        ))
    report = plan_metrics(entries, network.batch, device, layout.bands)
    target = network.target_throughput_hz
    return TilingPlan(
        network=network.name, device=device.name, batch=network.batch,
        layers=tuple(entries), bands=layout.bands,
        interval_seconds=report.penalized_interval_seconds,
        throughput_hz=report.throughput_hz,
        crossings=report.crossings,
        penalty_factor=report.penalty_factor,
        target_throughput_hz=target,
        target_met=None if target is None else report.throughput_hz >= target,
    )


def _shrink_to_single_band(
    network: NetworkSpec,
    device: DeviceSpec,
    constraints: PlanConstraints,
    calib: Optional[CalibrationTable],
    choices: list,
) -> list:
    """Reduce column spans, widest layer first, until one band suffices."""
    while sum(c.p_k for c in choices) > device.usable_width:
        widest = max(range(len(choices)), key=lambda i: (choices[i].p_k, -i))
        cap = choices[widest].p_k - 1
        if cap < 1:
            raise InfeasibleError(
                f"network {network.name} cannot fit one band even at single-column layers"
            )
        try:
            choices[widest] = plan_layer(
                network.layers[widest], device, constraints, calib, p_k_cap=cap
            )
        except InfeasibleError as e:
            raise InfeasibleError(
                f"layer {network.layers[widest].name} cannot shrink below "
                f"{choices[widest].p_k} columns: {e}"
            ) from e
    return choices


def plan_network(
    network: NetworkSpec,
    device: DeviceSpec,
    constraints: PlanConstraints = PlanConstraints(),
    calib: Optional[CalibrationTable] = None,
) -> TilingPlan:
    """Array placement for a whole network.

    Plans each layer independently, then packs bands.  When multiple
    bands are disallowed but the spans overflow one band, the widest
    layers give up columns first until the chain fits.  The min-tiles
    objective instead starts every layer at its smallest option and
    spends tiles only while the throughput target is missed.
    """
    if constraints.objective == OBJECTIVE_MIN_TILES:
        _require(network.target_throughput_hz is not None, ValidationError,
                 "the min-tiles objective needs a network throughput target")
        return _plan_network_min_tiles(network, device, constraints, calib)

    choices = [plan_layer(l, device, constraints, calib) for l in network.layers]
    if not constraints.allow_multi_band:
        choices = _shrink_to_single_band(network, device, constraints, calib, choices)
    layout = band_layout([c.p_k for c in choices], device)
    _band_row_check(choices, layout, device)
    return _assemble_plan(network, device, choices, layout)


def _plan_network_min_tiles(
    network: NetworkSpec,
    device: DeviceSpec,
    constraints: PlanConstraints,
    calib: Optional[CalibrationTable],
) -> TilingPlan:
    target = network.target_throughput_hz
    per_layer = [candidate_tilings(l, device, constraints, calib) for l in network.layers]
    for layer, cands in zip(network.layers, per_layer):
        if not cands:
            raise InfeasibleError(f"layer {layer.name} has no feasible tiling")
    # start minimal, upgrade the binding layer while the target is missed
    choices = [min(cands, key=lambda c: (c.tiles, c.latency.cycles, -c.p_k, c.shape_index))
               for cands in per_layer]
    seen = set()
    while True:
        if not constraints.allow_multi_band:
            choices = _shrink_to_single_band(network, device, constraints, calib, list(choices))
        layout = band_layout([c.p_k for c in choices], device)
        _band_row_check(choices, layout, device)
        plan = _assemble_plan(network, device, choices, layout)
        if plan.throughput_hz >= target:
            return plan
        state = tuple((c.p_k, c.p_n, c.api_shape) for c in choices)
        if state in seen:
            return plan   # upgrades and band shrinking are cycling; give up
        seen.add(state)
        binding = max(range(len(choices)),
                      key=lambda i: (plan.layers[i].latency_seconds, -i))
        faster = [c for c in per_layer[binding]
                  if c.latency.cycles < choices[binding].latency.cycles]
        if not faster:
            return plan   # cannot improve further; target_met stays False
        choices[binding] = min(faster, key=lambda c: (c.tiles, c.latency.cycles, -c.p_k,
                                                      c.shape_index))


# ---------------------------------------------------------------------------
# Hybrid fabric/array partitioning


@dataclass(frozen=True)
class PartitionResult:
    """Exact optimal layer-to-domain assignment for a chain."""

    domains: tuple
    crossings: int
    base_interval_seconds: float
    penalized_interval_seconds: float
    penalty_factor: float
    rho: float
    optimal: bool = True

    def to_json_dict(self) -> dict:
        return {
            "domains": list(self.domains),
            "crossings": self.crossings,
            "base_interval_seconds": self.base_interval_seconds,
            "penalized_interval_seconds": self.penalized_interval_seconds,
            "penalty_factor": self.penalty_factor,
            "rho": self.rho,
            "optimal": self.optimal,
        }


def hybrid_partition(
    network: NetworkSpec,
    device: DeviceSpec,
    pl_seconds: Sequence,
    aie_seconds: Sequence,
    rho: Optional[float] = None,
    pins: Optional[Mapping[int, str]] = None,
) -> PartitionResult:
    """Minimize (slowest stage) * (crossing penalty) over all assignments.

    Costs are per-batch stage intervals in seconds.  The objective is not
    additive, so the dynamic program tracks the running maximum per
    (layer, domain, crossings-so-far) state; crossings count every
    fabric/array boundary including chip input and output.  By default
    the first and last layers pin to the fabric, where the chain's I/O
    lives.  Exact: enumerates every reachable crossing count.
    """
    n = len(network.layers)
    _require(len(pl_seconds) == n and len(aie_seconds) == n, ValidationError,
             f"need {n} costs per domain")
    if rho is None:
        rho = device.aie_model.crossing_penalty_rate
    _require(rho >= 0, ValidationError, "rho must be nonnegative")
    if pins is None:
        pins = {0: DOMAIN_PL, n - 1: DOMAIN_PL} if n >= 2 else {0: DOMAIN_PL}
    for idx, dom in pins.items():
        _require(0 <= idx < n, ValidationError, f"pin index {idx} out of range")
        _require(dom in (DOMAIN_PL, DOMAIN_AIE), ValidationError,
                 f"pin for layer {idx} must be a domain, got {dom!r}")

    def cost(i: int, dom: str) -> float:
        c = pl_seconds[i] if dom == DOMAIN_PL else aie_seconds[i]
        if c is None:
            raise ValidationError(
                f"layer {network.layers[i].name} has no {dom} cost but the "
                f"partition needs one"
            )
        _require(c > 0, ValidationError,
                 f"layer {network.layers[i].name}: {dom} cost must be positive")
        return c

    def allowed(i: int) -> list:
        pin = pins.get(i)
        return [pin] if pin is not None else [DOMAIN_PL, DOMAIN_AIE]

    # state: (domain of layer i, boundary transitions so far incl. chip input)
    states = {}
    parents = {}
    for dom in allowed(0):
        t = 1 if dom != DOMAIN_PL else 0
        states[(dom, t)] = cost(0, dom)
        parents[(0, dom, t)] = None
    for i in range(1, n):
        nxt = {}
        for dom in allowed(i):
            stage = cost(i, dom)
            for (prev_dom, t), worst in states.items():
                t2 = t + (1 if dom != prev_dom else 0)
                val = max(worst, stage)
                key = (dom, t2)
                if key not in nxt or val < nxt[key]:
                    nxt[key] = val
                    parents[(i, dom, t2)] = (prev_dom, t)
        states = nxt
    _require(bool(states), InfeasibleError, "no feasible assignment under the pins")

    best = None
    for (dom, t), worst in states.items():
        t_total = t + (1 if dom != DOMAIN_PL else 0)
        crossings = max(2, t_total)
        factor = crossing_penalty_factor(crossings, rho)
        key = (worst * factor, crossings, 0 if dom == DOMAIN_PL else 1, t)
        if best is None or key < best[0]:
            best = (key, dom, t, worst, crossings, factor)
    _, dom, t, base, crossings, factor = best
    domains = [dom]
    state = (dom, t)
    for i in range(n - 1, 0, -1):
        state = parents[(i, state[0], state[1])]
        domains.append(state[0])
    domains.reverse()
    assert crossing_count(domains) == crossings
    return PartitionResult(
        domains=tuple(domains),
        crossings=crossings,
        base_interval_seconds=base,
        penalized_interval_seconds=base * factor,
        penalty_factor=factor,
        rho=rho,
    )


def partition_costs(
    network: NetworkSpec,
    device: DeviceSpec,
    budget: ResourceVector,
    strategy: str,
    constraints: PlanConstraints = PlanConstraints(),
    calib: Optional[CalibrationTable] = None,
) -> tuple:
    """Per-layer (pl, aie) stage costs in seconds per batch.

    Fabric layers get their fastest reuse factor under a budget prorated
    by the layer's share of the network's MACs; one batch then takes
    m * interval fabric cycles.  Array layers use their best planned
    tiling.  A layer that fits neither model reports None for that side.
    """
    total = network.total_macs
    pl_list, aie_list = [], []
    for layer in network.layers:
        share = layer.mac_count / total
        try:
            point = min_feasible_rf(layer, budget.scaled(share), strategy, device, calib)
            pl_list.append(layer.m * point.interval_cycles / device.pl_clock_hz)
        except InfeasibleError:
            pl_list.append(None)
        try:
            cand = plan_layer(layer, device, constraints, calib)
            aie_list.append(cand.latency.cycles / device.aie_clock_hz)
        except InfeasibleError:
            aie_list.append(None)
    return pl_list, aie_list


def crossing_sensitivity(base_seconds: float, rho: float, counts: Sequence[int] = range(2, 15, 2)) -> list:
    """Penalized interval at each crossing count; linear in the count."""
    return [(c, crossing_penalty_factor(c, rho), base_seconds * crossing_penalty_factor(c, rho))
            for c in counts]
