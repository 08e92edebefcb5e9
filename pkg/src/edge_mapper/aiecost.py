"""Vector-array cost model: API tilings, per-tile latency, spatial scaling.

One array tile holds a q_k x q_n weight slice in local memory and streams
m x q_k activations in and m x q_n partial results out through 32-bit
ports.  The kernel covers its workload with an integer grid of unrolled
API-call blocks (the API shape times the unroll factors).  A layer can
additionally be split spatially over p_k columns (partial sums cascade
west to east over the dedicated channel) and p_n rows (activation
fan-out / result fan-in over streams).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .model import (
    CalibrationTable,
    DTYPE_BYTES,
    DeviceSpec,
    InfeasibleError,
    LayerSpec,
    NetworkSpec,
    TilingPlan,
    ValidationError,
    DOMAIN_AIE,
    DOMAIN_PL,
    _require,
)

SOURCE_ANALYTIC = "analytic"
SOURCE_CALIBRATED = "calibrated"

BOUND_COMPUTE = "Compute"
BOUND_STREAM_IN = "StreamIn"
BOUND_STREAM_OUT = "StreamOut"
BOUND_CASCADE = "Cascade"

# Smallest per-tile workload (m, q_k, q_n) that keeps a tile usefully busy.
# Splitting below this wastes the array; results get flagged, not rejected.
MIN_TILE_WORKLOAD = (8, 16, 32)

FLAG_UNDER_UTILIZED = "under_utilized"


def pad_up(value: int, unit: int) -> int:
    """Round value up to the next multiple of unit."""
    assert unit >= 1
    return ((value + unit - 1) // unit) * unit


@dataclass(frozen=True)
class ApiTiling:
    """Repetition counts of one unrolled API block over a per-tile workload."""

    api_shape: tuple
    unroll: tuple
    r_m: int
    r_k: int
    r_n: int

    @property
    def effective(self) -> tuple:
        return tuple(s * u for s, u in zip(self.api_shape, self.unroll))

    @property
    def calls(self) -> int:
        """Total API invocations for the workload."""
        u_m, u_k, u_n = self.unroll
        return self.r_m * self.r_k * self.r_n * u_m * u_k * u_n


@dataclass(frozen=True)
class AieLatency:
    """Latency estimate for one tile (or one spatially tiled layer)."""

    cycles: int
    bound: str
    source: str
    tiling: Optional[ApiTiling] = None
    compute_cycles: int = 0
    stream_in_cycles: int = 0
    stream_out_cycles: int = 0
    overhead_cycles: int = 0
    spatial_cycles: int = 0
    flags: tuple = ()

    def __post_init__(self):
        _require(self.cycles >= 1, ValidationError, "latency must be at least one cycle")


def shape_fits_layer(k: int, n: int, shape: Sequence[int], unroll: Sequence[int]) -> bool:
    """An API shape is usable only when the layer holds at least one full
    unrolled block in each weight dimension before any padding."""
    s_m, s_k, s_n = shape
    u_m, u_k, u_n = unroll
    return k >= s_k * u_k and n >= s_n * u_n


def enumerate_api_tilings(m: int, q_k: int, q_n: int, device: DeviceSpec) -> list:
    """All legal API tilings of an already-padded per-tile workload.

    A shape qualifies when its unrolled block divides every dimension
    exactly.  Returns tilings in the device's shape order; empty when the
    workload is smaller than every unrolled block.
    """
    out = []
    for shape in device.legal_api_shapes:
        e_m, e_k, e_n = device.effective_tile(shape)
        if m % e_m == 0 and q_k % e_k == 0 and q_n % e_n == 0:
            out.append(ApiTiling(
                api_shape=tuple(shape), unroll=tuple(device.unroll),
                r_m=m // e_m, r_k=q_k // e_k, r_n=q_n // e_n,
            ))
    return out


def memory_feasible(q_k: int, q_n: int, m: int, device: DeviceSpec, dtype_bytes: int = 1) -> bool:
    """Weights plus double-buffered activation I/O must fit the local memory
    share reserved for the kernel."""
    weights = q_k * q_n * dtype_bytes
    io = 2 * m * (q_k + q_n) * dtype_bytes
    return weights + io <= device.aie_model.weight_mem_fraction * device.local_mem_bytes


def _cycles_per_call(shape: Sequence[int], device: DeviceSpec) -> int:
    s_m, s_k, s_n = shape
    return max(1, math.ceil(s_m * s_k * s_n / device.macs_per_cycle))


def single_tile_latency(
    m: int,
    q_k: int,
    q_n: int,
    device: DeviceSpec,
    api_shape: Optional[Sequence[int]] = None,
    calib: Optional[CalibrationTable] = None,
    dtype_bytes: int = 1,
) -> AieLatency:
    """Latency of one tile processing a padded (m, q_k, q_n) workload.

    A calibrated record for the exact (m, q_k, q_n, shape) key wins.  The
    analytic model serializes the kernel's phases: fixed overhead, the
    activation stream-in window, the MAC loop, and the result stream-out
    window.  The MAC loop pays a fractional penalty when the accumulation
    depth exceeds the output width (r_k > r_n), where register pressure
    on the accumulators breaks perfect pipelining.  The reported bound
    names the largest phase.
    """
    shapes = [tuple(api_shape)] if api_shape is not None else [tuple(s) for s in device.legal_api_shapes]
    best = None
    for shape in shapes:
        tilings = enumerate_api_tilings(m, q_k, q_n, device)
        tiling = next((t for t in tilings if t.api_shape == shape), None)
        if tiling is None:
            continue
        cand = _tile_latency_for(m, q_k, q_n, tiling, device, calib, dtype_bytes)
        if best is None or cand.cycles < best.cycles:
            best = cand
    if best is None:
        raise InfeasibleError(
            f"workload ({m}, {q_k}, {q_n}) admits no legal API tiling"
            + (f" for shape {tuple(api_shape)}" if api_shape is not None else "")
        )
    return best


def _tile_latency_for(
    m: int,
    q_k: int,
    q_n: int,
    tiling: ApiTiling,
    device: DeviceSpec,
    calib: Optional[CalibrationTable],
    dtype_bytes: int,
) -> AieLatency:
    params = device.aie_model
    measured = calib.aie_lookup(m, q_k, q_n, tiling.api_shape) if calib is not None else None
    if measured is not None:
        return AieLatency(cycles=measured, bound="", source=SOURCE_CALIBRATED, tiling=tiling)

    inefficiency = 1.0 + (params.k_heavy_penalty if tiling.r_k > tiling.r_n else 0.0)
    calls = tiling.calls
    compute = math.ceil(calls * _cycles_per_call(tiling.api_shape, device) * inefficiency)
    bytes_per_cycle = device.stream_port_bits // 8
    stream_in = math.ceil(m * q_k * dtype_bytes / bytes_per_cycle)
    stream_out = math.ceil(m * q_n * dtype_bytes / bytes_per_cycle)
    cycles = params.overhead_cycles + compute + stream_in + stream_out
    # the phase-serialized total can never undercut the raw MAC throughput
    assert cycles >= math.ceil(m * q_k * q_n / device.macs_per_cycle)
    bound = max(
        ((compute, 3, BOUND_COMPUTE), (stream_in, 2, BOUND_STREAM_IN), (stream_out, 1, BOUND_STREAM_OUT)),
    )[2]
    return AieLatency(
        cycles=cycles, bound=bound, source=SOURCE_ANALYTIC, tiling=tiling,
        compute_cycles=compute, stream_in_cycles=stream_in, stream_out_cycles=stream_out,
        overhead_cycles=params.overhead_cycles,
    )


def spatial_latency(
    layer: LayerSpec,
    p_k: int,
    p_n: int,
    device: DeviceSpec,
    api_shape: Optional[Sequence[int]] = None,
    calib: Optional[CalibrationTable] = None,
) -> AieLatency:
    """Latency of a layer split over p_k columns by p_n rows.

    Each tile runs the per-tile workload; the column split adds one
    cascade hop per west-to-east neighbour for the partial-sum drain and
    the row split adds stream fan-out/fan-in hops.  Workloads that fall
    below the minimum useful per-tile size are flagged, not rejected.
    """
    _require(p_k >= 1 and p_n >= 1, ValidationError, "spatial split factors must be >= 1")
    shapes = [tuple(api_shape)] if api_shape is not None else [tuple(s) for s in device.legal_api_shapes]
    params = device.aie_model
    best = None
    for shape in shapes:
        if not shape_fits_layer(layer.k, layer.n, shape, device.unroll):
            continue
        e_m, e_k, e_n = device.effective_tile(shape)
        padded_m = pad_up(layer.m, e_m)
        padded_k = pad_up(layer.k, p_k * e_k)
        padded_n = pad_up(layer.n, p_n * e_n)
        q_k = padded_k // p_k
        q_n = padded_n // p_n
        if not memory_feasible(q_k, q_n, padded_m, device, layer.dtype_bytes):
            continue
        tile = single_tile_latency(padded_m, q_k, q_n, device, shape, calib, layer.dtype_bytes)
        spatial = (p_k - 1) * params.cascade_hop_cycles + (p_n - 1) * params.fanout_hop_cycles
        flags = ()
        if (padded_m < MIN_TILE_WORKLOAD[0] or q_k < MIN_TILE_WORKLOAD[1]
                or q_n < MIN_TILE_WORKLOAD[2]):
            flags = (FLAG_UNDER_UTILIZED,)
        per_tile_peak = max(tile.compute_cycles, tile.stream_in_cycles, tile.stream_out_cycles)
        bound = tile.bound
        if spatial > per_tile_peak and tile.source == SOURCE_ANALYTIC:
            bound = BOUND_CASCADE
        cand = AieLatency(
            cycles=tile.cycles + spatial, bound=bound, source=tile.source, tiling=tile.tiling,
            compute_cycles=tile.compute_cycles, stream_in_cycles=tile.stream_in_cycles,
            stream_out_cycles=tile.stream_out_cycles, overhead_cycles=tile.overhead_cycles,
            spatial_cycles=spatial, flags=flags,
        )
        if best is None or cand.cycles < best.cycles:
            best = cand
    if best is None:
        raise InfeasibleError(
            f"layer {layer.name} ({layer.m}x{layer.k}x{layer.n}) has no feasible mapping "
            f"at split ({p_k}, {p_n}): no API shape fits or the per-tile slice "
            f"exceeds local memory"
        )
    return best


def crossing_count(domains: Sequence[str]) -> int:
    """Boundary crossings for a domain sequence, counting chip I/O.

    Data enters and leaves through the fabric, so the walk is
    PL -> d_1 ... d_L -> PL and every PL/array transition is one
    crossing.  The floor of 2 makes the all-PL chain equivalent to the
    single-block baseline (input and output only).
    """
    walk = [DOMAIN_PL, *domains, DOMAIN_PL]
    transitions = sum(1 for a, b in zip(walk, walk[1:]) if a != b)
    return max(2, transitions)


def crossing_penalty_factor(crossings: int, rho: float) -> float:
    """Interval inflation for crossings beyond the two-crossing baseline."""
    _require(crossings >= 2, ValidationError, "crossing count below the I/O baseline")
    _require(rho >= 0, ValidationError, "penalty rate must be nonnegative")
    return 1.0 + rho * (crossings - 2)


@dataclass(frozen=True)
class ThroughputReport:
    interval_seconds: float        # slowest stage, per batch, before penalties
    penalized_interval_seconds: float
    throughput_hz: float           # inferences per second (batch rows per interval)
    crossings: int
    penalty_factor: float
    bands: int
    band_factor: float


def plan_metrics(
    entries: Sequence,
    batch: int,
    device: DeviceSpec,
    bands: int,
    rho: Optional[float] = None,
) -> ThroughputReport:
    """Steady-state metrics for a sequence of per-layer plan entries.

    Array layers count their cycles at the array clock for one whole
    batch; fabric layers initiate one row per interval, so a batch takes
    m * interval fabric cycles.  Layers pipeline, so the slowest stage
    sets the pace.  Multi-band layouts share memory-tile columns between
    bands, which inflates every array stage by the contention factor per
    extra band; mixed-domain chains additionally pay the crossing
    penalty on the whole interval.
    """
    _require(len(entries) >= 1, ValidationError, "plan has no layers")
    params = device.aie_model
    if rho is None:
        rho = params.crossing_penalty_rate
    band_factor = params.band_contention_factor ** max(0, bands - 1)
    worst = 0.0
    for e in entries:
        if e.domain == DOMAIN_AIE:
            seconds = e.latency_cycles * band_factor / device.aie_clock_hz
        elif e.domain == DOMAIN_PL:
            seconds = batch * e.latency_cycles / device.pl_clock_hz
        else:
            raise ValidationError(f"layer {e.name}: unknown domain {e.domain!r}")
        worst = max(worst, seconds)
    crossings = crossing_count([e.domain for e in entries])
    factor = crossing_penalty_factor(crossings, rho)
    penalized = worst * factor
    return ThroughputReport(
        interval_seconds=worst,
        penalized_interval_seconds=penalized,
        throughput_hz=batch / penalized,
        crossings=crossings,
        penalty_factor=factor,
        bands=bands,
        band_factor=band_factor,
    )


def plan_throughput(plan: TilingPlan, network: NetworkSpec, device: DeviceSpec) -> ThroughputReport:
    """Recompute steady-state throughput for a finished plan.

    Validates that the plan covers the network's layers in order before
    trusting any of its stored latencies.
    """
    _require(len(plan.layers) == len(network.layers), ValidationError,
             f"plan covers {len(plan.layers)} layers, network has {len(network.layers)}")
    for entry, layer in zip(plan.layers, network.layers):
        _require(entry.name == layer.name, ValidationError,
                 f"plan layer {entry.name!r} does not match network layer {layer.name!r}")
    return plan_metrics(plan.layers, network.batch, device, plan.bands)
